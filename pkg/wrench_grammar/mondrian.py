"""
Online Mondrian forest classifier.

Each tree is a Mondrian process restricted to the bounding boxes of the
data it has seen. Adding a sample x walks down from the root; at every
node the box is extended towards x and, with probability driven by how far
x lies outside the box, a new split is inserted above the node that
separates x from everything the node held before. Otherwise the box grows
to include x, the class count is bumped and the walk continues. Trees are
therefore identical whether the data arrived in one batch or many.

Prediction mixes, along the path of x, the chance that x would have been
split off before reaching each node (smoothed class counts of that node)
with the smoothed counts of the leaf it ends in. The forest averages its
trees' distributions.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .config import MondrianConfig
from .errors import DimensionMismatch, ModelFormatError, UnfittedForest, UnknownClass
from .runtime import read_versioned_json, with_header, write_json_atomic

logger = logging.getLogger(__name__)


@dataclass
class MondrianNode:
    lower: np.ndarray
    upper: np.ndarray
    tau: float
    counts: np.ndarray
    split_dim: int = -1
    split_loc: float = 0.0
    left: MondrianNode | None = None
    right: MondrianNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def child_for(self, x: np.ndarray) -> MondrianNode:
        assert self.left is not None and self.right is not None
        return self.left if x[self.split_dim] <= self.split_loc else self.right


def _laplace(counts: np.ndarray) -> np.ndarray:
    return (counts + 1.0) / (counts.sum() + len(counts))


def _extension(node: MondrianNode, x: np.ndarray) -> np.ndarray:
    return np.maximum(node.lower - x, 0.0) + np.maximum(x - node.upper, 0.0)


class MondrianTree:
    """One tree; the generator is owned by the tree so its state can be saved."""

    def __init__(self, n_features: int, n_classes: int, lifetime: float, rng: np.random.Generator):
        self.n_features = n_features
        self.n_classes = n_classes
        self.lifetime = lifetime
        self.rng = rng
        self.root: MondrianNode | None = None

    def _leaf(self, x: np.ndarray, y: int) -> MondrianNode:
        counts = np.zeros(self.n_classes, dtype=np.int64)
        counts[y] += 1
        return MondrianNode(lower=x.copy(), upper=x.copy(), tau=self.lifetime, counts=counts)

    def extend(self, x: np.ndarray, y: int) -> MondrianTree:
        """Add one sample (class index y) to the tree."""
        if self.root is None:
            self.root = self._leaf(x, y)
            return self

        node = self.root
        parent: MondrianNode | None = None
        parent_tau = 0.0
        while True:
            ext = _extension(node, x)
            rate = float(ext.sum())
            gap = self.rng.exponential(1.0 / rate) if rate > 0 else math.inf
            if parent_tau + gap < node.tau:
                split = self._split_above(node, x, y, ext, rate, parent_tau + gap)
                if parent is None:
                    self.root = split
                elif parent.left is node:
                    parent.left = split
                else:
                    parent.right = split
                return self

            np.minimum(node.lower, x, out=node.lower)
            np.maximum(node.upper, x, out=node.upper)
            node.counts[y] += 1
            if node.is_leaf:
                return self
            parent = node
            parent_tau = node.tau
            node = node.child_for(x)

    def _split_above(
        self, node: MondrianNode, x: np.ndarray, y: int, ext: np.ndarray, rate: float, tau: float
    ) -> MondrianNode:
        dim = int(self.rng.choice(self.n_features, p=ext / rate))
        if x[dim] > node.upper[dim]:
            loc = float(self.rng.uniform(node.upper[dim], x[dim]))
        else:
            loc = float(self.rng.uniform(x[dim], node.lower[dim]))
        leaf = self._leaf(x, y)
        counts = node.counts.copy()
        counts[y] += 1
        split = MondrianNode(
            lower=np.minimum(node.lower, x),
            upper=np.maximum(node.upper, x),
            tau=tau,
            counts=counts,
            split_dim=dim,
            split_loc=loc,
        )
        if x[dim] > loc:
            split.left, split.right = node, leaf
        else:
            split.left, split.right = leaf, node
        return split

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_classes)
        node = self.root
        if node is None:
            return np.full(self.n_classes, 1.0 / self.n_classes)
        parent_tau = 0.0
        p_stay = 1.0
        while True:
            eta = float(_extension(node, x).sum())
            if eta > 0:
                delta = node.tau - parent_tau
                p_split = 1.0 if math.isinf(delta) else -math.expm1(-delta * eta)
                out += p_stay * p_split * _laplace(node.counts)
                p_stay *= 1.0 - p_split
            if node.is_leaf or p_stay == 0.0:
                break
            parent_tau = node.tau
            node = node.child_for(x)
        if p_stay > 0.0:
            out += p_stay * _laplace(node.counts)
        return out

    def nodes(self) -> list[MondrianNode]:
        """Nodes in pre-order."""
        out: list[MondrianNode] = []
        stack = [self.root] if self.root is not None else []
        while stack:
            node = stack.pop()
            out.append(node)
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)
        return out

    @property
    def depth(self) -> int:
        best = 0
        stack = [(self.root, 1)] if self.root is not None else []
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if not node.is_leaf:
                stack.extend([(node.left, d + 1), (node.right, d + 1)])
        return best


def check_tree(tree: MondrianTree) -> list[str]:
    """Invariant violations of a tree: box nesting, split times, count sums."""
    problems: list[str] = []
    stack: list[tuple[MondrianNode, float]] = [(tree.root, 0.0)] if tree.root else []
    while stack:
        node, parent_tau = stack.pop()
        if node.tau <= parent_tau:
            problems.append(f"split time {node.tau} not after parent {parent_tau}")
        if np.any(node.lower > node.upper):
            problems.append("box with lower > upper")
        if node.is_leaf:
            continue
        for child in (node.left, node.right):
            if np.any(child.lower < node.lower) or np.any(child.upper > node.upper):
                problems.append("child box not inside parent box")
            stack.append((child, node.tau))
        if not np.array_equal(node.left.counts + node.right.counts, node.counts):
            problems.append("child counts do not sum to parent counts")
        if not (node.left.upper[node.split_dim] <= node.split_loc < node.right.lower[node.split_dim]):
            problems.append("split location does not separate the children")
    return problems


# ─── Forest ──────────────────────────────────────────────────────


class MondrianForest:
    """Ensemble of online Mondrian trees over a fixed class set."""

    def __init__(
        self,
        classes: Sequence[int],
        n_trees: int = 100,
        lifetime: float = math.inf,
        seed: int = 0,
    ):
        self.classes = tuple(int(c) for c in classes)
        self.n_trees = n_trees
        self.lifetime = lifetime
        self.seed = seed
        self.n_features: int | None = None
        self.trees: list[MondrianTree] = []
        self._n_seen = 0
        self._index = {c: i for i, c in enumerate(self.classes)}
        self._rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trees)]

    @classmethod
    def from_config(cls, classes: Sequence[int], config: MondrianConfig, seed: int) -> MondrianForest:
        return cls(classes, n_trees=config.n_trees, lifetime=config.lifetime_value, seed=seed)

    @property
    def n_samples(self) -> int:
        return self._n_seen

    def _check_dims(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.n_features is not None and X.shape[1] != self.n_features:
            raise DimensionMismatch(f"forest expects {self.n_features} features, got {X.shape[1]}")
        return X

    def partial_fit(self, X: np.ndarray, y: Sequence[int]) -> MondrianForest:
        """Add a mini-batch of samples to every tree, in order."""
        X = self._check_dims(X)
        y = [int(v) for v in np.asarray(y).ravel()]
        if len(y) != len(X):
            raise DimensionMismatch(f"{len(X)} samples but {len(y)} labels")
        unknown = sorted({v for v in y if v not in self._index})
        if unknown:
            raise UnknownClass(f"labels {unknown} are not in the forest classes {list(self.classes)}")
        if len(y) == 0:
            return self

        if self.n_features is None:
            self.n_features = X.shape[1]
            self.trees = [
                MondrianTree(self.n_features, len(self.classes), self.lifetime, rng)
                for rng in self._rngs
            ]
        idx = [self._index[v] for v in y]
        for tree in self.trees:
            for x, k in zip(X, idx, strict=True):
                tree.extend(x, k)
        self._n_seen += len(y)
        logger.debug("forest now holds %d sample(s)", self.n_samples)
        return self

    def fit(
        self,
        X: np.ndarray,
        y: Sequence[int],
        n_batches: int = 12,
        batch_size: int | None = None,
    ) -> MondrianForest:
        """Feed X in mini-batches: *n_batches* equal parts, or chunks of *batch_size*."""
        X = self._check_dims(X)
        y_arr = np.asarray(y)
        if batch_size:
            bounds = list(range(0, len(X), batch_size)) + [len(X)]
            chunks = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
        else:
            parts = np.array_split(np.arange(len(X)), max(1, min(n_batches, len(X))))
            chunks = [(int(p[0]), int(p[-1]) + 1) for p in parts if len(p)]
        for a, b in chunks:
            self.partial_fit(X[a:b], y_arr[a:b])
        logger.info("forest fitted on %d sample(s) in %d batch(es)", len(X), len(chunks))
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class distributions, shape (N, K); rows sum to 1."""
        if self.n_samples == 0:
            raise UnfittedForest("the forest has seen no samples")
        X = self._check_dims(X)
        out = np.zeros((len(X), len(self.classes)))
        for r, x in enumerate(X):
            for tree in self.trees:
                out[r] += tree.predict_proba(x)
        return out / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Most probable class per row (lowest class on ties)."""
        proba = self.predict_proba(X)
        return np.array([self.classes[int(np.argmax(row))] for row in proba], dtype=np.int64)

    # ─── Persistence ─────────────────────────────────────────────

    def to_dict(self) -> dict[str, Any]:
        trees = []
        for tree in self.trees:
            nodes = tree.nodes()
            order = {id(n): i for i, n in enumerate(nodes)}
            trees.append(
                {
                    "rng_state": tree.rng.bit_generator.state,
                    "nodes": [
                        {
                            "tau": None if math.isinf(n.tau) else n.tau,
                            "lower": n.lower.tolist(),
                            "upper": n.upper.tolist(),
                            "counts": n.counts.tolist(),
                            "dim": n.split_dim,
                            "loc": n.split_loc,
                            "left": -1 if n.is_leaf else order[id(n.left)],
                            "right": -1 if n.is_leaf else order[id(n.right)],
                        }
                        for n in nodes
                    ],
                }
            )
        return {
            "classes": list(self.classes),
            "n_trees": self.n_trees,
            "lifetime": None if math.isinf(self.lifetime) else self.lifetime,
            "seed": self.seed,
            "n_features": self.n_features,
            "n_samples": self._n_seen,
            "trees": trees,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MondrianForest:
        lifetime = math.inf if data.get("lifetime") is None else float(data["lifetime"])
        forest = cls(data["classes"], data["n_trees"], lifetime, int(data.get("seed", 0)))
        forest.n_features = data.get("n_features")
        forest._n_seen = int(data.get("n_samples", 0))
        if len(data.get("trees", [])) != forest.n_trees:
            raise ModelFormatError("tree count does not match n_trees")
        forest.trees = []
        for entry, rng in zip(data.get("trees", []), forest._rngs, strict=False):
            rng.bit_generator.state = entry["rng_state"]
            tree = MondrianTree(forest.n_features or 0, len(forest.classes), lifetime, rng)
            tree.root = _rebuild(entry["nodes"], lifetime)
            forest.trees.append(tree)
        return forest


def _rebuild(entries: list[dict[str, Any]], lifetime: float) -> MondrianNode | None:
    if not entries:
        return None
    if any("lower" not in e or "upper" not in e for e in entries):
        raise ModelFormatError("tree node without a bounding box")
    nodes = [
        MondrianNode(
            lower=np.array(e["lower"], dtype=np.float64),
            upper=np.array(e["upper"], dtype=np.float64),
            tau=lifetime if e["tau"] is None else float(e["tau"]),
            counts=np.array(e["counts"], dtype=np.int64),
            split_dim=int(e["dim"]),
            split_loc=float(e["loc"]),
        )
        for e in entries
    ]
    for node, e in zip(nodes, entries, strict=True):
        if e["left"] >= 0:
            node.left = nodes[e["left"]]
            node.right = nodes[e["right"]]
    return nodes[0]


def save_forest(forest: MondrianForest, path: str | Path) -> Path:
    return write_json_atomic(path, with_header("mondrian", forest.to_dict()))


def load_forest(path: str | Path) -> MondrianForest:
    return MondrianForest.from_dict(read_versioned_json(path, "mondrian"))
