"""
Soft-margin support vector machine trained with SMO, one-vs-one multi-class.

Each pair of classes gets a binary machine solved by sequential minimal
optimisation on the full kernel matrix, with maximal-violating-pair working
set selection (first-order choice of i, second-order choice of j). The
binary decision value is

    f(x) = Σ_t α_t y_t K(x_t, x) − ρ

and a sample's functional margin is y·f(x). Multi-class prediction counts
pairwise votes; ties go to the class with the larger summed decision
value, then to the lowest class id.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any

import numpy as np

from .config import SvmConfig
from .errors import DegenerateFeatures, DimensionMismatch, SingleClass, UntrainedModel
from .grammar import PhaseDataset
from .runtime import read_versioned_json, with_header, write_json_atomic

logger = logging.getLogger(__name__)

_TAU = 1e-12
_SV_EPS = 1e-12


# ─── Kernels ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class Kernel:
    kind: str = "rbf"  # linear | poly | rbf
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 1.0

    def resolve(self, X: np.ndarray) -> Kernel:
        """Fix ``gamma="scale"`` to 1 / (D · var(X))."""
        if self.gamma != "scale":
            return self
        var = float(X.var()) if X.size else 0.0
        gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        return Kernel(kind=self.kind, gamma=gamma, degree=self.degree, coef0=self.coef0)

    def __call__(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return A @ B.T
        gamma = float(self.gamma)  # resolved before use
        if self.kind == "poly":
            return (gamma * (A @ B.T) + self.coef0) ** self.degree
        if self.kind == "rbf":
            sq = (
                np.sum(A * A, axis=1)[:, None]
                + np.sum(B * B, axis=1)[None, :]
                - 2.0 * (A @ B.T)
            )
            return np.exp(-gamma * np.maximum(sq, 0.0))
        raise ValueError(f"Unknown kernel '{self.kind}'")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "gamma": self.gamma, "degree": self.degree, "coef0": self.coef0}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Kernel:
        return cls(
            kind=data["kind"],
            gamma=data["gamma"],
            degree=int(data.get("degree", 3)),
            coef0=float(data.get("coef0", 1.0)),
        )

    @classmethod
    def from_config(cls, config: SvmConfig) -> Kernel:
        return cls(kind=config.kernel, gamma=config.gamma, degree=config.degree, coef0=config.coef0)


# ─── Binary SMO ──────────────────────────────────────────────────


@dataclass
class SmoResult:
    alpha: np.ndarray
    rho: float
    gap: float
    iterations: int
    converged: bool


def _rho(y: np.ndarray, G: np.ndarray, alpha: np.ndarray, C: float) -> float:
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        return float(yG[free].mean())
    ub = math.inf
    lb = -math.inf
    for t in range(len(y)):
        if upper[t]:
            if y[t] < 0:
                ub = min(ub, yG[t])
            else:
                lb = max(lb, yG[t])
        elif lower[t]:
            if y[t] > 0:
                ub = min(ub, yG[t])
            else:
                lb = max(lb, yG[t])
    return (ub + lb) / 2.0


def solve_smo(
    K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int | None = None
) -> SmoResult:
    """Solve the soft-margin dual for labels y ∈ {−1, +1} on kernel matrix K."""
    n = len(y)
    if max_iter is None:
        max_iter = max(10_000, 100 * n)
    y = y.astype(np.float64)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)

    gap = math.inf
    it = 0
    converged = False
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            gap = 0.0
            converged = True
            break

        i = int(np.argmax(np.where(up, score, -np.inf)))
        m_up = score[i]
        gap = float(m_up - np.min(np.where(low, score, np.inf)))
        if gap < tol:
            converged = True
            break

        b = m_up - score
        candidates = low & (b > 0)
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        j = int(np.argmin(np.where(candidates, -(b * b) / a, np.inf)))

        old_ai, old_aj = alpha[i], alpha[j]
        Q_i, Q_j = Q[i], Q[j]
        if y[i] != y[j]:
            quad = Q_i[i] + Q_j[j] + 2.0 * Q_i[j]
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = Q_i[i] + Q_j[j] - 2.0 * Q_i[j]
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total

        G += Q_i * (alpha[i] - old_ai) + Q_j * (alpha[j] - old_aj)
        it += 1

    if not converged:
        logger.warning("SMO stopped at the iteration cap (%d) with gap %.3g", max_iter, gap)
    return SmoResult(alpha=alpha, rho=_rho(y, G, alpha, C), gap=gap, iterations=it, converged=converged)


# ─── Models ──────────────────────────────────────────────────────


@dataclass
class PairwiseMachine:
    """Binary machine separating ``positive`` (+1) from ``negative`` (−1)."""

    positive: int
    negative: int
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # α_t · y_t
    rho: float
    kkt_gap: float = 0.0
    iterations: int = 0

    def decision(self, kernel: Kernel, X: np.ndarray) -> np.ndarray:
        """f(x) = Σ α_t y_t K(x_t, x) − ρ for each row of X."""
        if len(self.support_vectors) == 0:
            return np.full(len(X), -self.rho)
        return kernel(np.atleast_2d(X), self.support_vectors) @ self.dual_coef - self.rho

    def weight_vector(self) -> np.ndarray:
        """ω = Σ α_t y_t x_t (meaningful for the linear kernel only)."""
        return self.dual_coef @ self.support_vectors

    def to_dict(self) -> dict[str, Any]:
        return {
            "positive": self.positive,
            "negative": self.negative,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "rho": self.rho,
            "kkt_gap": self.kkt_gap,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PairwiseMachine:
        return cls(
            positive=int(data["positive"]),
            negative=int(data["negative"]),
            support_vectors=np.array(data["support_vectors"], dtype=np.float64).reshape(
                len(data["dual_coef"]), -1
            ),
            dual_coef=np.array(data["dual_coef"], dtype=np.float64),
            rho=float(data["rho"]),
            kkt_gap=float(data.get("kkt_gap", 0.0)),
            iterations=int(data.get("iterations", 0)),
        )


@dataclass
class SvmModel:
    kernel: Kernel
    C: float
    classes: tuple[int, ...]
    machines: list[PairwiseMachine]
    n_features: int
    keep: np.ndarray  # indices of input dimensions used by the model
    mean: np.ndarray
    scale: np.ndarray
    dropped: int = 0
    extras: dict[str, Any] = field(default_factory=dict)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"model expects {self.n_features} features, got {X.shape[1]}"
            )
        return (X[:, self.keep] - self.mean) / self.scale

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "classes": list(self.classes),
            "n_features": self.n_features,
            "keep": self.keep.tolist(),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "dropped": self.dropped,
            "machines": [m.to_dict() for m in self.machines],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SvmModel:
        return cls(
            kernel=Kernel.from_dict(data["kernel"]),
            C=float(data["C"]),
            classes=tuple(int(c) for c in data["classes"]),
            machines=[PairwiseMachine.from_dict(m) for m in data["machines"]],
            n_features=int(data["n_features"]),
            keep=np.array(data["keep"], dtype=np.int64),
            mean=np.array(data["mean"], dtype=np.float64),
            scale=np.array(data["scale"], dtype=np.float64),
            dropped=int(data.get("dropped", 0)),
        )


def _standardize(X: np.ndarray, enabled: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices kept, their means and their scales."""
    if not enabled:
        d = X.shape[1]
        return np.arange(d), np.zeros(d), np.ones(d)
    std = X.std(axis=0)
    keep = np.flatnonzero(std > 1e-12)
    if keep.size == 0:
        raise DegenerateFeatures("every feature dimension has zero variance")
    return keep, X[:, keep].mean(axis=0), std[keep]


def fit_svm(
    X: np.ndarray,
    y: np.ndarray,
    kernel: Kernel | None = None,
    C: float = 1.0,
    *,
    tol: float = 1e-3,
    standardize: bool = True,
    max_iter: int | None = None,
) -> SvmModel:
    """Train one binary machine per class pair.

    Raises:
        SingleClass: fewer than two distinct labels.
        DegenerateFeatures: no input dimension varies.
    """
    kernel = kernel or Kernel()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise SingleClass(f"training data holds {len(classes)} class(es); need >= 2")

    keep, mean, scale = _standardize(X, standardize)
    dropped = X.shape[1] - keep.size
    if dropped:
        logger.warning("dropped %d zero-variance dimension(s) of %d", dropped, X.shape[1])
    Xs = (X[:, keep] - mean) / scale
    kernel = kernel.resolve(Xs)
    K = kernel(Xs, Xs)

    machines = []
    for pos, neg in combinations(classes, 2):
        idx = np.flatnonzero((y == pos) | (y == neg))
        y_pm = np.where(y[idx] == pos, 1.0, -1.0)
        result = solve_smo(K[np.ix_(idx, idx)], y_pm, C, tol=tol, max_iter=max_iter)
        sv = result.alpha > _SV_EPS
        machines.append(
            PairwiseMachine(
                positive=pos,
                negative=neg,
                support_vectors=Xs[idx[sv]],
                dual_coef=(result.alpha * y_pm)[sv],
                rho=result.rho,
                kkt_gap=result.gap,
                iterations=result.iterations,
            )
        )
    logger.info(
        "trained %d pairwise machine(s) on %d sample(s), %d feature(s)",
        len(machines),
        len(y),
        keep.size,
    )
    return SvmModel(
        kernel=kernel,
        C=C,
        classes=classes,
        machines=machines,
        n_features=X.shape[1],
        keep=keep,
        mean=mean,
        scale=scale,
        dropped=dropped,
    )


def train_svm(ds: PhaseDataset, kernel: Kernel | None = None, C: float = 1.0, **kwargs: Any) -> SvmModel:
    """Train on a phase dataset (see ``fit_svm``)."""
    return fit_svm(ds.X, ds.y, kernel, C, **kwargs)


def train_svm_with(ds: PhaseDataset, config: SvmConfig) -> SvmModel:
    return train_svm(
        ds,
        Kernel.from_config(config),
        config.C,
        tol=config.tol,
        standardize=config.standardize,
    )


# ─── Prediction ──────────────────────────────────────────────────


def decision_function(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Pairwise decision values, shape (N, K(K−1)/2), machines in pair order."""
    if model is None or not model.machines:
        raise UntrainedModel("SVM model has no trained machines")
    Xs = model.transform(X)
    return np.column_stack([m.decision(model.kernel, Xs) for m in model.machines])


def vote(model: SvmModel, decisions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Winning class per row plus the vote counts (N, K)."""
    k = len(model.classes)
    index = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((len(decisions), k), dtype=np.int64)
    strength = np.zeros((len(decisions), k))
    for col, machine in enumerate(model.machines):
        f = decisions[:, col]
        p, q = index[machine.positive], index[machine.negative]
        votes[:, p] += f > 0
        votes[:, q] += f <= 0
        strength[:, p] += f
        strength[:, q] -= f

    winners = np.empty(len(decisions), dtype=np.int64)
    for r in range(len(decisions)):
        tied = np.flatnonzero(votes[r] == votes[r].max())
        if len(tied) > 1:
            best = strength[r, tied].max()
            tied = tied[strength[r, tied] == best]
        winners[r] = model.classes[int(tied[0])]
    return winners, votes


def predict_svm(model: SvmModel, x: np.ndarray) -> tuple[int, np.ndarray]:
    """Predicted class and per-class votes for one feature vector."""
    winners, votes = vote(model, decision_function(model, np.atleast_2d(x)))
    return int(winners[0]), votes[0]


def predict_many(model: SvmModel, X: np.ndarray) -> np.ndarray:
    winners, _ = vote(model, decision_function(model, X))
    return winners


def functional_margin(
    machine: PairwiseMachine | None, kernel: Kernel, x: np.ndarray, y: int
) -> float:
    """y · f(x) for one sample of a binary machine (y ∈ {−1, +1})."""
    if machine is None:
        raise UntrainedModel("no machine to evaluate")
    return float(y * machine.decision(kernel, np.atleast_2d(x))[0])


def geometric_margin(machine: PairwiseMachine) -> float:
    """1 / ‖ω‖ of a linear-kernel machine."""
    norm = float(np.linalg.norm(machine.weight_vector()))
    return math.inf if norm == 0 else 1.0 / norm


def kkt_residuals(model: SvmModel) -> list[float]:
    return [m.kkt_gap for m in model.machines]


# ─── Persistence ─────────────────────────────────────────────────


def save_svm(model: SvmModel, path: str | Path) -> Path:
    return write_json_atomic(path, with_header("svm", model.to_dict()))


def load_svm(path: str | Path) -> SvmModel:
    return SvmModel.from_dict(read_versioned_json(path, "svm"))
