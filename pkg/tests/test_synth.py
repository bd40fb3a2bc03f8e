"""Tests for wrench_grammar.synth module."""

import json

import numpy as np
import pytest

from wrench_grammar.errors import InvalidProfile
from wrench_grammar.signal_io import AXES, PHASES, Arm, Axis, load_trials
from wrench_grammar.synth import (
    DEFAULT_PROFILE,
    default_profile,
    generate_dataset,
    generate_trial,
    load_profile,
    reaction_response,
    save_profile,
    trial_seeds,
    write_dataset,
)


class TestGenerateTrial:
    def test_deterministic(self):
        a = generate_trial(default_profile(), seed=1)
        b = generate_trial(default_profile(), seed=1)
        np.testing.assert_array_equal(a.wrench, b.wrench)
        assert a.phases == b.phases

    def test_seeds_differ(self):
        a = generate_trial(default_profile(), seed=1)
        b = generate_trial(default_profile(), seed=2)
        assert a.phases != b.phases or not np.array_equal(a.wrench, b.wrench)

    def test_phase_table(self):
        trial = generate_trial(default_profile(), seed=4)
        assert [p.phase_id for p in trial.phases] == list(PHASES)
        for prev, cur in zip(trial.phases, trial.phases[1:], strict=False):
            assert prev.t_end == cur.t_start
        for phase in trial.phases:
            assert 2.0 - 0.01 <= phase.t_end - phase.t_start <= 5.0 + 0.01

    def test_sampling_rate(self):
        trial = generate_trial(default_profile(), seed=4)
        assert np.diff(trial.times) == pytest.approx(1 / 200.0, abs=1e-6)
        assert trial.wrench.shape == (len(trial.times), len(AXES))

    def test_noiseless_axes_stay_flat(self):
        trial = generate_trial(default_profile().without_noise(), seed=8)
        # No template touches Fy outside rotation and mating.
        fy = trial.wrench[:, AXES.index(Axis.FY)]
        approach = trial.phases[0]
        mask = trial.times < approach.t_end
        assert np.all(fy[mask] == 0.0)

    def test_insertion_holds_the_largest_drop(self):
        trial = generate_trial(default_profile().without_noise(), seed=8)
        fz = trial.wrench[:, AXES.index(Axis.FZ)]
        insertion = trial.phases[2]
        inside = (trial.times >= insertion.t_start) & (trial.times < insertion.t_end)
        assert np.argmin(fz) in np.flatnonzero(inside)


class TestReactionArm:
    def test_response_inverts_sign(self):
        clean = np.column_stack([np.linspace(0.0, 1.0, 400)] * len(AXES))
        response = reaction_response(clean, 200.0, gain=0.8, tau=0.05)
        assert np.all(response[-1] < 0)
        assert response[-1, 0] == pytest.approx(-0.8, abs=0.05)

    def test_two_arm_records(self):
        trials = generate_dataset(default_profile(), n_trials=2, base_seed=0, arms=2)
        assert [t.trial_id for t in trials] == [
            "trial_000_right",
            "trial_000_left",
            "trial_001_right",
            "trial_001_left",
        ]
        right, left = trials[0], trials[1]
        assert left.arm is Arm.LEFT
        np.testing.assert_array_equal(right.times, left.times)
        fz = AXES.index(Axis.FZ)
        assert np.corrcoef(right.wrench[:, fz], left.wrench[:, fz])[0, 1] < -0.5


class TestDataset:
    def test_ids_and_seeds(self):
        trials = generate_dataset(default_profile(), n_trials=3, base_seed=42)
        assert [t.trial_id for t in trials] == ["trial_000", "trial_001", "trial_002"]
        assert len(set(trial_seeds(42, 3))) == 3

    def test_prefix_stable(self):
        short = generate_dataset(default_profile(), n_trials=2, base_seed=42)
        longer = generate_dataset(default_profile(), n_trials=4, base_seed=42)
        for a, b in zip(short, longer, strict=False):
            np.testing.assert_array_equal(a.wrench, b.wrench)

    @pytest.mark.parametrize("n_trials, arms", [(0, 1), (2, 3)])
    def test_invalid_request(self, n_trials, arms):
        with pytest.raises(InvalidProfile):
            generate_dataset(default_profile(), n_trials=n_trials, base_seed=0, arms=arms)

    def test_write_and_reload(self, tmp_path):
        trials = generate_dataset(default_profile(), n_trials=2, base_seed=1)
        paths = write_dataset(trials, tmp_path)
        assert [p.name for p in paths] == ["trial_000.csv", "trial_001.csv"]
        reloaded = load_trials(tmp_path)
        np.testing.assert_array_equal(reloaded[1].wrench, trials[1].wrench)


class TestProfiles:
    def test_save_and_load(self, tmp_path):
        path = save_profile(default_profile(), tmp_path / "profile.json")
        loaded = load_profile(path)
        assert loaded == default_profile()

    def test_invalid_profile_file(self, tmp_path):
        data = json.loads(json.dumps(DEFAULT_PROFILE))
        data["phases"][2]["axes"]["Fz"] = [{"kind": "constant"}]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(InvalidProfile, match="impulse"):
            load_profile(path)

    def test_unreadable_profile(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(InvalidProfile):
            load_profile(path)
