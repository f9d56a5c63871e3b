"""Minimum-variance hierarchical grouping and group profiles.

Agglomeration follows the Lance-Williams recurrence on squared Euclidean
distances, so each merge picks the pair whose union increases within-group
sum of squares the least.  Recorded heights are the square roots of the
merge costs.  Groups are read off by cutting the tree, and each group is
profiled against the overall mean of every feature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dendrogram",
    "ward_cluster",
    "cut",
    "GroupProfile",
    "profile",
]


@dataclass(eq=False)
class Dendrogram:
    """Merge history over leaves 0..n-1; merge s creates cluster id n+s.

    Each merge is (left id, right id, height, merged size) with left < right.
    """

    n: int
    merges: list[tuple[int, int, float, int]]


def ward_cluster(points: np.ndarray) -> Dendrogram:
    """Agglomerate rows of ``points`` by minimum variance.

    The pairwise table starts at squared Euclidean distance and is updated
    with the Lance-Williams weights for minimum-variance merging, so the
    table entry for clusters A and B is 2*n_A*n_B/(n_A+n_B) times the
    squared distance of their centroids.  Exact cost ties are broken toward
    the smallest (left id, right id) pair.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n = pts.shape[0]
    if n < 2:
        raise ValueError("grouping needs at least 2 points")
    if np.isnan(pts).any():
        raise ValueError("points contain missing values")

    # working matrix over slots 0..n-1; a merged pair collapses into one slot
    sq = np.sum(pts**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=float)
    cluster_id = np.arange(n)

    merges: list[tuple[int, int, float, int]] = []
    for step in range(n - 1):
        masked = np.where(active[:, None] & active[None, :], d2, np.inf)
        cost = float(masked.min())
        si_arr, sj_arr = np.nonzero(masked == cost)
        best = None
        best_slots = None
        for si, sj in zip(si_arr, sj_arr):
            if si >= sj:
                continue
            pair = (
                min(cluster_id[si], cluster_id[sj]),
                max(cluster_id[si], cluster_id[sj]),
            )
            if best is None or pair < best:
                best = pair
                best_slots = (int(si), int(sj))
        si, sj = best_slots
        ni, nj = sizes[si], sizes[sj]

        others = np.nonzero(active)[0]
        others = others[(others != si) & (others != sj)]
        nk = sizes[others]
        new = (
            (ni + nk) * d2[si, others]
            + (nj + nk) * d2[sj, others]
            - nk * cost
        ) / (ni + nj + nk)
        d2[si, others] = new
        d2[others, si] = new
        active[sj] = False
        sizes[si] = ni + nj
        cluster_id[si] = n + step
        merges.append((best[0], best[1], float(np.sqrt(cost)), int(ni + nj)))
    return Dendrogram(n=n, merges=merges)


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Labels 1..k from stopping the agglomeration at k groups.

    The first n-k merges are replayed; groups are numbered by the first
    leaf index at which each one appears.
    """
    n = dendrogram.n
    if not (1 <= k <= n):
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    parent: dict[int, int] = {}
    for s in range(n - k):
        left, right, _, _ = dendrogram.merges[s]
        parent[left] = n + s
        parent[right] = n + s

    def find(i: int) -> int:
        while i in parent:
            i = parent[i]
        return i

    labels = np.zeros(n, dtype=int)
    next_label = 1
    label_of: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        if root not in label_of:
            label_of[root] = next_label
            next_label += 1
        labels[i] = label_of[root]
    return labels


@dataclass(eq=False)
class GroupProfile:
    """One group's size, per-feature means, and qualitative labels."""

    group: int
    count: int
    feature_names: list[str]
    means: np.ndarray
    labels: list[str]


def profile(
    assignments: np.ndarray,
    features: np.ndarray,
    feature_names: list[str],
    thresholds: tuple[float, float] = (0.25, 1.0),
) -> list[GroupProfile]:
    """Describe each group by its mean of every (standardized) feature.

    A mean m maps to "around" when |m| < thresholds[0], "above"/"below" up
    to thresholds[1], and "far above"/"far below" beyond it.
    """
    assignments = np.asarray(assignments)
    feats = np.asarray(features, dtype=float)
    if feats.ndim != 2 or feats.shape[1] != len(feature_names):
        raise ValueError("features must be 2-d with one column per name")
    if assignments.shape != (feats.shape[0],):
        raise ValueError("assignments must align with feature rows")
    near, far = thresholds
    if not (0 < near < far):
        raise ValueError("thresholds must satisfy 0 < near < far")

    out = []
    for g in np.unique(assignments):
        mask = assignments == g
        means = feats[mask].mean(axis=0)
        labels = []
        for m in means:
            if abs(m) < near:
                labels.append("around")
            elif abs(m) < far:
                labels.append("above" if m > 0 else "below")
            else:
                labels.append("far above" if m > 0 else "far below")
        out.append(
            GroupProfile(
                group=int(g),
                count=int(mask.sum()),
                feature_names=list(feature_names),
                means=means,
                labels=labels,
            )
        )
    return out
