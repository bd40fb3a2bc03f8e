"""Tests for wrench_grammar.compositions and wrench_grammar.behaviors modules."""

import itertools
import math

import numpy as np
import pytest

from tests.helpers import make_mc, make_primitive, mc_chain, primitive_chain
from wrench_grammar.behaviors import LlbLabel, classify_mc_pair, derive_behaviors
from wrench_grammar.compositions import McLabel, classify_pair, compose
from wrench_grammar.errors import EmptySequence
from wrench_grammar.primitives import GradientLabel
from wrench_grammar.signal_io import Axis, AxisSeries

# ─── Motion Compositions ─────────────────────────────────────────


class TestClassifyPair:
    @pytest.mark.parametrize(
        "p1, p2, expected",
        [
            ("spos", "mneg", McLabel.ADJUSTMENT),
            ("bneg", "spos", McLabel.ADJUSTMENT),
            ("pimp", "nimp", McLabel.CONTACT),
            ("const", "pimp", McLabel.CONTACT),
            ("spos", "bpos", McLabel.INCREASE),
            ("sneg", "mneg", McLabel.DECREASE),
            ("const", "const", McLabel.CONSTANT),
            ("const", "bpos", McLabel.UNSTABLE),
            ("mneg", "const", McLabel.UNSTABLE),
        ],
    )
    def test_table(self, p1, p2, expected):
        assert classify_pair(make_primitive(p1), make_primitive(p2)) is expected

    def test_every_cell_assigned(self):
        for a, b in itertools.product(GradientLabel, repeat=2):
            assert isinstance(classify_pair(make_primitive(a.value), make_primitive(b.value)), McLabel)


class TestCompose:
    def test_increase_pair(self):
        [mc] = compose(primitive_chain(["spos", "spos"]))
        assert mc.label is McLabel.INCREASE
        assert mc.p1_label is GradientLabel.SPOS
        assert mc.p2_label is GradientLabel.SPOS
        assert mc.t_start == 0.0
        assert mc.t_end == 2.0

    def test_singleton(self):
        [mc] = compose(primitive_chain(["const"]))
        assert mc.label is McLabel.CONSTANT
        assert mc.is_singleton

    def test_impulse_singleton_is_contact(self):
        [mc] = compose(primitive_chain(["nimp"]))
        assert mc.label is McLabel.CONTACT

    def test_alternating_ramps(self):
        mcs = compose(primitive_chain(["spos", "spos", "sneg", "sneg", "spos", "spos", "sneg", "sneg"]))
        assert "".join(m.label.value for m in mcs) == "idid"

    @pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
    def test_halves_the_count(self, n):
        labels = [GradientLabel.SPOS.value, GradientLabel.MNEG.value] * n
        assert len(compose(primitive_chain(labels[:n]))) == math.ceil(n / 2)

    def test_amplitude_spans_both_members(self):
        [mc] = compose([make_primitive("spos", 0, 1, lo=-1.0, hi=0.5), make_primitive("spos", 1, 2, lo=0.0, hi=3.0)])
        assert mc.amplitude == pytest.approx(4.0)
        assert mc.value_max == 3.0
        assert mc.value_min == -1.0

    def test_rms_from_series(self):
        series = AxisSeries(Axis.FX, np.linspace(0.0, 2.0, 21), np.full(21, 2.0))
        [mc] = compose(primitive_chain(["const", "const"]), series)
        assert mc.rms == pytest.approx(2.0)

    def test_empty(self):
        with pytest.raises(EmptySequence):
            compose([])


# ─── Low-Level Behaviours ────────────────────────────────────────


class TestClassifyMcPair:
    @pytest.mark.parametrize(
        "m1, m2, expected",
        [
            ("i", "i", LlbLabel.PUSH),
            ("d", "d", LlbLabel.PULL),
            ("k", "k", LlbLabel.FIXED),
            ("c", "c", LlbLabel.CONTACT),
            ("i", "k", LlbLabel.NOISE),
            ("u", "a", LlbLabel.NOISE),
        ],
    )
    def test_table(self, m1, m2, expected):
        assert classify_mc_pair(make_mc(m1), make_mc(m2)) is expected

    @pytest.mark.parametrize(
        "amplitudes, expected",
        [((1.0, 2.0), LlbLabel.SHIFT), ((2.0, 1.0), LlbLabel.ALIGNMENT), ((1.0, 1.0), LlbLabel.ALIGNMENT)],
    )
    def test_adjustments_split_by_amplitude(self, amplitudes, expected):
        a1, a2 = amplitudes
        assert classify_mc_pair(make_mc("a", a1), make_mc("a", a2)) is expected

    def test_increase_then_decrease_is_an_adjustment_pair(self):
        assert classify_mc_pair(make_mc("i", 1.0), make_mc("d", 1.0)) is LlbLabel.ALIGNMENT

    def test_every_cell_assigned(self):
        for a, b in itertools.product(McLabel, repeat=2):
            assert isinstance(classify_mc_pair(make_mc(a.value), make_mc(b.value)), LlbLabel)


class TestDeriveBehaviors:
    def test_constant_run(self):
        llbs = derive_behaviors(mc_chain("kkkk"))
        assert [b.label for b in llbs] == [LlbLabel.FIXED, LlbLabel.FIXED]

    @pytest.mark.parametrize("n", [1, 3, 4, 7, 10])
    def test_random_lengths(self, n):
        rng = np.random.default_rng(n)
        labels = [rng.choice([m.value for m in McLabel]) for _ in range(n)]
        assert len(derive_behaviors(mc_chain(labels))) == math.ceil(n / 2)

    def test_singleton_keeps_family(self):
        [llb] = derive_behaviors(mc_chain("i"))
        assert llb.label is LlbLabel.PUSH
        assert llb.m2_label is None

    def test_span_and_max(self):
        [llb] = derive_behaviors([make_mc("i", 1.0, 0.0, 1.0), make_mc("i", 3.0, 1.0, 2.0)])
        assert llb.t_start == 0.0
        assert llb.t_end == 2.0
        assert llb.max_val == 3.0

    def test_empty(self):
        with pytest.raises(EmptySequence):
            derive_behaviors([])
