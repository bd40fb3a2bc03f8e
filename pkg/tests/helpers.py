"""Builders shared by the test modules."""

import numpy as np

from wrench_grammar.compositions import McLabel, MotionComposition
from wrench_grammar.primitives import Calibration, GradientLabel, GradientThresholds, Primitive
from wrench_grammar.signal_io import AXES, PHASES, Arm, PhaseSpec, Trial, quantize


def make_trial(
    trial_id: str = "trial_000",
    arm: Arm = Arm.RIGHT,
    rate: float = 100.0,
    phase_seconds: float = 1.0,
    wrench_fn=None,
) -> Trial:
    """Four equal phases; *wrench_fn(times)* returns an (n, 6) array (zeros by default)."""
    n = int(round(len(PHASES) * phase_seconds * rate))
    times = quantize(np.arange(n) / rate)
    wrench = np.zeros((n, len(AXES))) if wrench_fn is None else wrench_fn(times)
    phases = tuple(
        PhaseSpec(p, i * phase_seconds, (i + 1) * phase_seconds) for i, p in enumerate(PHASES)
    )
    return Trial(trial_id=trial_id, arm=arm, times=times, wrench=wrench, phases=phases)


def fixed_calibration(eps: float = 0.1, g_max: float = 10.0) -> Calibration:
    thresholds = GradientThresholds(eps_const=eps, g_max=g_max)
    return Calibration(scope="global", axes=dict.fromkeys(AXES, thresholds))


def make_primitive(
    label: str, t0: float = 0.0, t1: float = 1.0, lo: float = 0.0, hi: float = 1.0
) -> Primitive:
    return Primitive(
        label=GradientLabel(label),
        avg=(lo + hi) / 2,
        max=hi,
        min=lo,
        t_start=t0,
        t_end=t1,
        gradient=0.0,
    )


def primitive_chain(labels) -> list[Primitive]:
    """One-second primitives back to back, values spanning [0, 1]."""
    return [make_primitive(label, float(i), float(i + 1)) for i, label in enumerate(labels)]


def make_mc(label: str, amplitude: float = 1.0, t0: float = 0.0, t1: float = 1.0) -> MotionComposition:
    mid = (t0 + t1) / 2
    return MotionComposition(
        label=McLabel(label),
        avg=amplitude / 2,
        rms=amplitude / 2,
        amplitude=amplitude,
        p1_label=GradientLabel.CONST,
        p2_label=GradientLabel.CONST,
        t1_start=t0,
        t1_end=mid,
        t2_start=mid,
        t2_end=t1,
        t_avg=mid,
        value_max=amplitude,
        value_min=0.0,
    )


def mc_chain(labels) -> list[MotionComposition]:
    return [make_mc(label, 1.0, float(i), float(i + 1)) for i, label in enumerate(labels)]
