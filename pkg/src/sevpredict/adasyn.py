"""Adaptive synthetic oversampling of minority severity classes.

Each class smaller than the largest one is topped up with synthetic
instances. Generation is density-aware: a minority instance whose
neighborhood is dominated by other classes is harder to learn and receives
proportionally more synthetic offspring. A synthetic point is a convex
combination of its seed and one of the seed's nearest same-class
neighbors, so it never leaves the segment between the two parents.

Neighbor searches run in min-max scaled space (fit on the labelled set
handed in; constant features collapse to 0) so no single metric dominates
the Euclidean distance; interpolation happens in the raw feature space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import PROVENANCE_SYNTHETIC, LabelledInstance
from .errors import SevpredictError
from .severity import SEVERITY_ORDER, SeverityClass


@dataclass(frozen=True)
class SamplerConfig:
    k_neighbors: int = 5
    beta: float = 1.0  # fraction of the class deficit to fill
    d_threshold: float = 1.0  # only classes with size ratio below this are balanced
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise SevpredictError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if not 0.0 <= self.beta <= 1.0:
            raise SevpredictError(f"beta must be in [0, 1], got {self.beta}")
        if not 0.0 < self.d_threshold <= 1.0:
            raise SevpredictError(f"d_threshold must be in (0, 1], got {self.d_threshold}")


def _minmax_params(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mins = matrix.min(axis=0)
    spans = matrix.max(axis=0) - mins
    # constant features scale to 0 rather than dividing by zero
    scales = np.zeros_like(spans)
    np.divide(1.0, spans, out=scales, where=spans > 0)
    return mins, scales


def nearest_neighbors(query: Sequence[float], pool: Sequence[Sequence[float]], k: int) -> list[int]:
    """Indices of the k nearest pool rows to the query, nearest first.

    Distances are Euclidean over a min-max scaled copy of the pool (the
    query is scaled with the pool's parameters). Ties break toward the
    lower index; fewer than k rows returns them all.
    """
    if k < 1:
        raise SevpredictError(f"k must be >= 1, got {k}")
    matrix = np.asarray(pool, dtype=float)
    if matrix.size == 0:
        raise SevpredictError("neighbor pool is empty")
    mins, scales = _minmax_params(matrix)
    scaled = (matrix - mins) * scales
    q = (np.asarray(query, dtype=float) - mins) * scales
    dists = np.sqrt(((scaled - q) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")
    return [int(j) for j in order[: min(k, len(matrix))]]


def _neighbors_of(scaled: np.ndarray, i: int, candidates: Sequence[int], k: int) -> list[int]:
    """k nearest candidate rows to row i, self excluded, stable on ties."""
    cand = np.asarray([j for j in candidates if j != i])
    dists = np.sqrt(((scaled[cand] - scaled[i]) ** 2).sum(axis=1))
    order = np.argsort(dists, kind="stable")
    return [int(cand[j]) for j in order[:k]]


def adasyn_balance(labelled: Sequence[LabelledInstance], config: SamplerConfig) -> list[LabelledInstance]:
    """Oversample every minority class toward the majority count.

    Returns the input instances verbatim (same order) followed by the
    synthetic ones, each tagged with provenance 'synthetic' and carrying
    its seed's label and loc. Deterministic for a fixed config.
    """
    instances = list(labelled)
    if not instances:
        raise SevpredictError("cannot balance an empty labelled set")
    X = np.asarray([inst.features for inst in instances], dtype=float)
    if not np.all(np.isfinite(X)):
        raise SevpredictError("features must be finite")
    labels = [inst.label for inst in instances]
    sizes = {cls: labels.count(cls) for cls in SEVERITY_ORDER}
    if sum(1 for n in sizes.values() if n > 0) < 2:
        raise SevpredictError("balancing requires at least 2 classes present")

    n_majority = max(sizes.values())
    mins, scales = _minmax_params(X)
    scaled = (X - mins) * scales
    everyone = list(range(len(instances)))
    rng = np.random.default_rng(config.seed)

    synthetics: list[LabelledInstance] = []
    for cls in SEVERITY_ORDER:
        m = sizes[cls]
        if m == 0 or m == n_majority:
            continue
        if m / n_majority >= config.d_threshold:
            continue
        target = (n_majority - m) * config.beta
        if target <= 0:
            continue
        seeds = [i for i, lbl in enumerate(labels) if lbl is cls]

        # learning difficulty: out-of-class share of each seed's neighborhood
        difficulty = []
        for i in seeds:
            neigh = _neighbors_of(scaled, i, everyone, config.k_neighbors)
            difficulty.append(sum(labels[j] is not cls for j in neigh) / len(neigh))
        total = sum(difficulty)
        if total > 0:
            shares = [d / total for d in difficulty]
        else:
            shares = [1.0 / m] * m  # interior class: spread evenly

        for i, share in zip(seeds, shares):
            g = int(round(share * target))
            if g == 0:
                continue
            seed_inst = instances[i]
            if m == 1:
                # no same-class neighbor to interpolate toward; replicate
                synthetics.extend(
                    replace(seed_inst, provenance=PROVENANCE_SYNTHETIC, module_id=None)
                    for _ in range(g)
                )
                continue
            partners = _neighbors_of(scaled, i, seeds, config.k_neighbors)
            for _ in range(g):
                z = partners[int(rng.integers(len(partners)))]
                lam = float(rng.random())
                feats = tuple(float(a + lam * (b - a)) for a, b in zip(X[i], X[z]))
                synthetics.append(
                    LabelledInstance(feats, seed_inst.loc, cls, PROVENANCE_SYNTHETIC, None)
                )
    return instances + synthetics
