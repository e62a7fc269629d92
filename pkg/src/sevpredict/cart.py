"""Binary classification tree (CART) with Gini impurity.

Split selection is exact: candidates are compared through the integer
quantity sum_child(n_other * sum_j c_j^2) so that "lower impurity, then
lower feature index, then lower threshold" never hinges on float rounding.
For a candidate split of n instances into (L, R), minimizing the weighted
child Gini is equivalent to maximizing

    Q = sum_j cL_j^2 / nL + sum_j cR_j^2 / nR

which is the ratio (sum_j cL_j^2 * nR + sum_j cR_j^2 * nL) / (nL * nR) of
two integers; candidates are ranked by cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import LabelledInstance
from .errors import SevpredictError
from .severity import CLASS_INDEX, SEVERITY_ORDER, SeverityClass

N_CLASSES = len(SEVERITY_ORDER)


@dataclass(frozen=True)
class TreeConfig:
    min_samples_split: int = 2
    max_depth: int | None = None  # None grows until pure or unsplittable

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise SevpredictError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.max_depth is not None and self.max_depth < 0:
            raise SevpredictError(f"max_depth must be >= 0, got {self.max_depth}")


@dataclass(frozen=True)
class Leaf:
    counts: tuple[int, ...]  # training class counts, severity order
    nl: int
    majority: SeverityClass  # ties resolve toward the more severe class


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float  # value <= threshold routes left
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Split


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    schema: tuple[str, ...]


def _make_leaf(counts: np.ndarray) -> Leaf:
    majority = SEVERITY_ORDER[int(np.argmax(counts))]  # argmax takes the first = most severe
    return Leaf(tuple(int(c) for c in counts), int(counts.sum()), majority)


def _scan_feature(values: np.ndarray, labels: np.ndarray):
    """Best midpoint threshold on one feature: (threshold, q_num, q_den).

    Sweeps boundaries between consecutive distinct sorted values; within the
    feature the first strictly-better candidate wins, so equal-quality
    thresholds resolve to the lowest one. Returns None for a constant
    feature.
    """
    n = len(values)
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sl = labels[order]
    left = [0] * N_CLASSES
    right = [0] * N_CLASSES
    for c in sl:
        right[int(c)] += 1
    best_num = best_den = 0
    best_thr = None
    for pos in range(n - 1):
        c = int(sl[pos])
        left[c] += 1
        right[c] -= 1
        if sv[pos] == sv[pos + 1]:
            continue
        n_left = pos + 1
        n_right = n - n_left
        s_left = sum(v * v for v in left)
        s_right = sum(v * v for v in right)
        num = s_left * n_right + s_right * n_left
        den = n_left * n_right
        if best_thr is None or num * best_den > best_num * den:
            best_num, best_den = num, den
            best_thr = float((sv[pos] + sv[pos + 1]) / 2.0)
    if best_thr is None:
        return None
    return best_thr, best_num, best_den


def best_split(instances: Sequence[LabelledInstance], feature_index: int):
    """Impurity-minimizing threshold on one feature, with its Gini decrease.

    Returns (threshold, impurity_decrease) or None when the feature is
    constant over the instances. A zero decrease is still reported; the
    caller decides whether it is worth splitting on.
    """
    if len(instances) < 2:
        raise SevpredictError("best_split needs at least 2 instances")
    values = np.asarray([inst.features[feature_index] for inst in instances], dtype=float)
    labels = np.asarray([CLASS_INDEX[inst.label] for inst in instances])
    scan = _scan_feature(values, labels)
    if scan is None:
        return None
    threshold, num, den = scan
    n = len(instances)
    sumsq = sum(int(c) ** 2 for c in np.bincount(labels, minlength=N_CLASSES))
    decrease = num / (den * n) - sumsq / (n * n)
    return threshold, decrease


def _grow(X: np.ndarray, y: np.ndarray, idx: np.ndarray, depth: int, config: TreeConfig) -> TreeNode:
    counts = np.bincount(y[idx], minlength=N_CLASSES)
    n = len(idx)
    if (
        int((counts > 0).sum()) == 1
        or n < config.min_samples_split
        or (config.max_depth is not None and depth >= config.max_depth)
    ):
        return _make_leaf(counts)

    best = None  # (num, den, feature, threshold)
    for feature in range(X.shape[1]):
        scan = _scan_feature(X[idx, feature], y[idx])
        if scan is None:
            continue
        threshold, num, den = scan
        if best is None or num * best[1] > best[0] * den:
            best = (num, den, feature, threshold)
    if best is None:
        return _make_leaf(counts)  # all features constant here
    num, den, feature, threshold = best
    sumsq = sum(int(c) ** 2 for c in counts)
    if num * n <= sumsq * den:
        return _make_leaf(counts)  # best candidate does not reduce impurity

    mask = X[idx, feature] <= threshold
    left = _grow(X, y, idx[mask], depth + 1, config)
    right = _grow(X, y, idx[~mask], depth + 1, config)
    return Split(feature, threshold, left, right)


def fit_tree(
    train: Sequence[LabelledInstance],
    config: TreeConfig = TreeConfig(),
    schema: Sequence[str] | None = None,
) -> DecisionTree:
    """Grow a tree on the training instances.

    Recursion stops at pure nodes, nodes below min_samples_split, nodes
    where no candidate split strictly reduces Gini impurity, and at
    max_depth when one is set.
    """
    instances = list(train)
    if not instances:
        raise SevpredictError("cannot fit a tree on an empty training set")
    X = np.asarray([inst.features for inst in instances], dtype=float)
    if not np.all(np.isfinite(X)):
        raise SevpredictError("features must be finite")
    y = np.asarray([CLASS_INDEX[inst.label] for inst in instances])
    p = X.shape[1]
    if schema is None:
        schema = tuple(f"f{j}" for j in range(p))
    elif len(schema) != p:
        raise SevpredictError(f"schema names {len(schema)} features but instances have {p}")
    root = _grow(X, y, np.arange(len(instances)), 0, config)
    return DecisionTree(root, tuple(schema))


def route_to_leaf(tree: DecisionTree, features: Sequence[float]) -> Leaf:
    if len(features) != len(tree.schema):
        raise SevpredictError(
            f"feature vector has {len(features)} values but the tree expects {len(tree.schema)}"
        )
    node = tree.root
    while isinstance(node, Split):
        node = node.left if features[node.feature_index] <= node.threshold else node.right
    return node


def predict_label(tree: DecisionTree, features: Sequence[float]) -> SeverityClass:
    return route_to_leaf(tree, features).majority


def predict_confidence(tree: DecisionTree, features: Sequence[float]) -> tuple[SeverityClass, float]:
    """Majority class of the landing leaf and its raw training frequency."""
    leaf = route_to_leaf(tree, features)
    return leaf.majority, leaf.counts[CLASS_INDEX[leaf.majority]] / leaf.nl


def iter_leaves(tree: DecisionTree):
    stack: list[TreeNode] = [tree.root]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.append(node.right)
            stack.append(node.left)


def dump_tree(tree: DecisionTree) -> str:
    """Indented text rendering, for eyeballing small trees."""
    lines: list[str] = []

    def walk(node: TreeNode, indent: int) -> None:
        pad = "  " * indent
        if isinstance(node, Leaf):
            freq = ", ".join(
                f"{cls.value}={c}" for cls, c in zip(SEVERITY_ORDER, node.counts) if c
            )
            lines.append(f"{pad}leaf [{freq}] -> {node.majority.value}")
            return
        lines.append(f"{pad}{tree.schema[node.feature_index]} <= {node.threshold!r}")
        walk(node.left, indent + 1)
        lines.append(f"{pad}else")
        walk(node.right, indent + 1)

    walk(tree.root, 0)
    return "\n".join(lines)
