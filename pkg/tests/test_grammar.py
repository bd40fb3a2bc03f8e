"""Tests for wrench_grammar.grammar module."""

import numpy as np
import pytest

from tests.helpers import fixed_calibration, make_trial
from wrench_grammar.config import EncodingConfig
from wrench_grammar.errors import DataError, EncodingError, NothingEncoded
from wrench_grammar.grammar import (
    LEVELS,
    GrammarMatrix,
    Level,
    PhaseDataset,
    compression_report,
    encode_series,
    encode_trial,
    encode_trials,
    fit_layout,
    group_matrices,
    load_grammar,
    load_grammars,
    resample_words,
    save_grammar,
    stretch,
    vectorize,
    vectorize_with,
)
from wrench_grammar.signal_io import AXES, PHASES, Arm, Axis, PhaseId, slice_phase
from wrench_grammar.synth import default_profile, generate_trial

FZ = AXES.index(Axis.FZ)


def _hinge_trial():
    """Fz flat for one second, then a ramp of -4 over one second, then flat."""

    def wrench(times):
        w = np.zeros((len(times), len(AXES)))
        w[:, FZ] = np.where(times < 1.0, 0.0, -4.0 * (np.minimum(times, 2.0) - 1.0))
        return w

    return make_trial(phase_seconds=2.0, wrench_fn=wrench)


def _matrix(trial_id: str, arm: Arm = Arm.RIGHT, word: str = "const", n: int = 1) -> GrammarMatrix:
    words = {}
    for level in LEVELS:
        w = {Level.PRIMITIVE: word, Level.MC: "k", Level.LLB: "FX"}[level]
        for axis in AXES:
            for phase in PHASES:
                words[(level, axis, phase)] = (w,) * n
    return GrammarMatrix(trial_id=trial_id, arm=arm, words=words)


# ─── Stretching ──────────────────────────────────────────────────


class TestStretch:
    def test_same_width_is_identity(self):
        assert stretch(("a", "b", "c"), 3) == ("a", "b", "c")

    def test_width_one_keeps_first(self):
        assert stretch(("a", "b", "c"), 1) == ("a",)

    def test_upsample_keeps_ends_and_order(self):
        out = stretch(("a", "b", "c"), 7)
        assert len(out) == 7
        assert out[0] == "a"
        assert out[-1] == "c"
        assert "".join(dict.fromkeys(out)) == "abc"

    def test_downsample(self):
        out = stretch(tuple("abcdefgh"), 3)
        assert out == ("a", "e", "h")

    @pytest.mark.parametrize("words, width", [((), 4), (("a",), 0)])
    def test_empty(self, words, width):
        assert stretch(words, width) == ()


class TestResampleWords:
    def _matrix(self):
        matrix = _matrix("trial_000")
        matrix.words[(Level.MC, Axis.FZ, PhaseId.INSERTION)] = ("i", "d", "i")
        return matrix

    def test_stretches_to_longest_axis(self):
        out = resample_words(self._matrix())
        assert out.sequence(Level.MC, Axis.FX, PhaseId.INSERTION) == ("k", "k", "k")
        assert out.sequence(Level.MC, Axis.FZ, PhaseId.INSERTION) == ("i", "d", "i")
        assert out.sequence(Level.MC, Axis.FX, PhaseId.APPROACH) == ("k",)

    def test_explicit_widths(self):
        widths = {(Arm.RIGHT, level, phase): 5 for level in LEVELS for phase in PHASES}
        out = resample_words(self._matrix(), widths)
        assert out.sequence(Level.MC, Axis.FZ, PhaseId.INSERTION) == ("i", "d", "d", "i", "i")
        assert {len(seq) for seq in out.words.values()} == {5}
        assert out.trial_id == "trial_000"


# ─── Encoding ────────────────────────────────────────────────────


class TestEncodeSeries:
    def test_hinge_segments_then_refines(self, calibration):
        trial = _hinge_trial()
        series = slice_phase(trial, trial.phases[0], Axis.FZ)
        encoded = encode_series(series, calibration.for_axis(Axis.FZ))
        assert encoded.counts["primitives_raw"] == 2
        # The flat piece has no amplitude next to the ramp and is folded into it.
        assert encoded.words(Level.PRIMITIVE) == ("mneg",)
        assert encoded.words(Level.MC) == ("d",)
        assert encoded.words(Level.LLB) == ("PL",)

    def test_counts_never_grow(self):
        trial = generate_trial(default_profile(), seed=3)
        for row in compression_report(trial, fixed_calibration(0.5, 40.0)):
            assert row["primitives"] <= row["primitives_raw"]
            assert row["mcs_raw"] == -(-row["primitives"] // 2)
            assert row["mcs"] <= row["mcs_raw"]
            assert row["llbs_raw"] == -(-row["mcs"] // 2)
            assert row["llbs"] <= row["llbs_raw"]


class TestEncodeTrial:
    def test_every_key_present(self, zero_trial, calibration):
        matrix = encode_trial(zero_trial, calibration)
        assert len(matrix.words) == len(LEVELS) * len(AXES) * len(PHASES)
        assert matrix.sequence(Level.PRIMITIVE, Axis.MX, PhaseId.MATING) == ("const",)
        assert matrix.sequence(Level.MC, Axis.MX, PhaseId.MATING) == ("k",)
        assert matrix.sequence(Level.LLB, Axis.MX, PhaseId.MATING) == ("FX",)

    def test_insertion_contact(self):
        trial = generate_trial(default_profile().without_noise(), seed=11)
        matrix = encode_trial(trial, fixed_calibration(0.5, 40.0))
        assert "nimp" in matrix.sequence(Level.PRIMITIVE, Axis.FZ, PhaseId.INSERTION)
        assert "c" in matrix.sequence(Level.MC, Axis.FZ, PhaseId.INSERTION)

    def test_deterministic(self, calibration):
        trial = generate_trial(default_profile(), seed=5)
        assert encode_trial(trial, calibration).words == encode_trial(trial, calibration).words

    def test_short_phase_reports_location(self, calibration):
        trial = make_trial(rate=4.0)
        with pytest.raises(EncodingError, match="trial_000"):
            encode_trial(trial, calibration, EncodingConfig())

    def test_parallel_matches_serial(self, calibration):
        trials = [generate_trial(default_profile(), seed=s, trial_id=f"t{s}") for s in range(3)]
        serial = encode_trials(trials, calibration, jobs=1)
        parallel = encode_trials(trials, calibration, jobs=2)
        assert [m.words for m in serial] == [m.words for m in parallel]
        assert [m.trial_id for m in parallel] == ["t0", "t1", "t2"]


class TestGrammarFiles:
    def test_save_and_load(self, tmp_path, zero_trial, calibration):
        matrix = encode_trial(zero_trial, calibration)
        path = save_grammar(matrix, tmp_path / "trial_000.json")
        loaded = load_grammar(path)
        assert loaded.trial_id == "trial_000"
        assert loaded.words == matrix.words

    def test_empty_directory(self, tmp_path):
        with pytest.raises(NothingEncoded):
            load_grammars(tmp_path)


# ─── Vectorisation ───────────────────────────────────────────────


class TestVectorize:
    def test_one_sample_per_phase(self):
        ds = vectorize(group_matrices([_matrix("a"), _matrix("b")]))
        assert len(ds) == 2 * len(PHASES)
        assert list(ds.y) == [p.index for p in PHASES] * 2
        assert ds.trial_ids == ("a",) * 4 + ("b",) * 4

    def test_column_order(self):
        ds = vectorize(group_matrices([_matrix("a", n=2)]), levels=["primitive"])
        columns = ds.layout.columns
        assert columns[0] == "right/primitive/Fx/000"
        assert columns[1] == "right/primitive/Fx/001"
        assert columns[2] == "right/primitive/Fy/000"
        assert ds.dimension == len(AXES) * 2

    def test_sequences_stretched_to_common_width(self):
        groups = group_matrices([_matrix("a", n=1), _matrix("b", n=3)])
        ds = vectorize(groups, levels=["mc"])
        assert ds.dimension == len(AXES) * 3
        assert np.all(ds.X > 0)

    def test_unknown_words_map_to_zero(self):
        layout = fit_layout(group_matrices([_matrix("a", word="const")]), levels=["primitive"])
        ds = vectorize_with(group_matrices([_matrix("b", word="spos")]), layout)
        assert np.all(ds.X == 0)
        assert ds.unknown_words > 0

    def test_subset_keeps_unknown_counts(self, tmp_path):
        layout = fit_layout(group_matrices([_matrix("a", word="const")]), levels=["primitive"])
        groups = group_matrices([_matrix("b", word="spos"), _matrix("c", word="const")])
        ds = vectorize_with(groups, layout)
        per_phase = len(AXES)
        assert ds.unknown_words == per_phase * len(PHASES)
        assert ds.subset(["b"]).unknown_words == ds.unknown_words
        assert ds.subset(["c"]).unknown_words == 0
        assert ds.head(1).row_unknown == (per_phase,) * len(PHASES)

        ds.to_csv(tmp_path / "ds.csv", tmp_path / "ds.layout.json")
        loaded = PhaseDataset.from_csv(tmp_path / "ds.csv", tmp_path / "ds.layout.json")
        assert loaded.row_unknown == ds.row_unknown

    def test_one_hot(self):
        ds = vectorize(group_matrices([_matrix("a")]), levels=["llb"], one_hot=True)
        assert ds.dimension == len(AXES) * 7
        assert set(np.unique(ds.X)) <= {0.0, 1.0}
        assert np.all(ds.X.sum(axis=1) == len(AXES))

    def test_two_arms(self):
        matrices = [_matrix("t_right", Arm.RIGHT), _matrix("t_left", Arm.LEFT)]
        ds = vectorize(group_matrices(matrices), levels=["primitive"])
        assert ds.trial_ids == ("t",) * 4
        assert ds.layout.columns[0].startswith("right/")
        assert ds.layout.columns[-1].startswith("left/")

    def test_arm_mismatch(self):
        layout = fit_layout(group_matrices([_matrix("a")]))
        with pytest.raises(DataError, match="arms"):
            vectorize_with(group_matrices([_matrix("b_left", Arm.LEFT)]), layout)

    def test_csv_round_trip(self, tmp_path):
        ds = vectorize(group_matrices([_matrix("a"), _matrix("b", word="mpos", n=2)]))
        ds.to_csv(tmp_path / "d.csv", tmp_path / "d.layout.json")
        loaded = type(ds).from_csv(tmp_path / "d.csv", tmp_path / "d.layout.json")
        np.testing.assert_array_equal(loaded.X, ds.X)
        np.testing.assert_array_equal(loaded.y, ds.y)
        assert loaded.trial_ids == ds.trial_ids
        assert loaded.layout.columns == ds.layout.columns

    def test_head(self):
        ds = vectorize(group_matrices([_matrix(t) for t in "abc"]))
        assert set(ds.head(2).trial_ids) == {"a", "b"}

    def test_nothing_to_fit(self):
        with pytest.raises(NothingEncoded):
            fit_layout([])
