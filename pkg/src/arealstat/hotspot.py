"""Local hot- and cold-spot detection.

The local statistic for unit i compares the weighted sum of x over i's
neighborhood (including i itself) against the expectation under a random
spatial arrangement, standardized to a z-score.  Multiple testing across
units is handled by false-discovery-rate adjustment before classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .stats import bh_fdr
from .weights import SpatialWeights

__all__ = ["HotspotResult", "gi_star", "classify"]

CLASS_ORDER = ["cold99", "cold95", "cold90", "none", "hot90", "hot95", "hot99"]


@dataclass(eq=False)
class HotspotResult:
    """Per-unit z-scores, p-values, adjusted p-values, and class labels."""

    z: np.ndarray
    p: np.ndarray
    adjusted_p: np.ndarray
    classes: list[str]

    @property
    def n(self) -> int:
        return len(self.classes)


def gi_star(
    weights: SpatialWeights, x: np.ndarray, fdr_alpha: float = 0.05
) -> HotspotResult:
    """Self-inclusive local concentration z-scores with FDR-adjusted classes.

    Requires binary weights built with a self-link: the statistic's null
    moments assume w_ij in {0, 1} and the unit's own value inside its
    neighborhood sum.
    """
    if weights.mode != "binary":
        raise ValueError("hot-spot statistic requires binary weights")
    if not weights.include_self:
        raise ValueError("hot-spot statistic requires self-inclusive weights")
    x = np.asarray(x, dtype=float)
    n = weights.n
    if x.shape != (n,):
        raise ValueError(f"x must have shape ({n},), got {x.shape}")
    if n < 3:
        raise ValueError("hot-spot statistic needs at least 3 units")
    if np.isnan(x).any():
        raise ValueError("x contains missing values")
    if np.all(x == x[0]):
        raise ValueError("x is constant; z-scores are undefined")

    xbar = float(np.mean(x))
    # population (n-divisor) standard deviation
    s = math.sqrt(float(np.mean(x * x)) - xbar * xbar)

    z = np.empty(n)
    for i in range(n):
        idx = weights.rows[i]
        w = weights.values[i]
        wsum = float(w.sum())
        wsq = float((w * w).sum())
        num = float(w @ x[idx]) - xbar * wsum
        den = s * math.sqrt((n * wsq - wsum * wsum) / (n - 1))
        z[i] = num / den

    p = 2.0 * _scipy_stats.norm.sf(np.abs(z))
    fdr = bh_fdr(p, alpha=fdr_alpha)
    classes = classify(z, fdr.adjusted_p)
    return HotspotResult(z=z, p=p, adjusted_p=fdr.adjusted_p, classes=classes)


def classify(z: np.ndarray, adjusted_p: np.ndarray) -> list[str]:
    """Label each unit by sign of z and tightest adjusted-p tier.

    Tiers are <= 0.01, <= 0.05, <= 0.10 mapping to 99/95/90 percent
    confidence labels; anything looser is "none".  z exactly 0 is "none"
    regardless of p.
    """
    z = np.asarray(z, dtype=float)
    adjusted_p = np.asarray(adjusted_p, dtype=float)
    if z.shape != adjusted_p.shape:
        raise ValueError("z and adjusted_p must have matching shapes")
    out = []
    for zi, pi in zip(z, adjusted_p):
        if zi == 0.0 or pi > 0.10:
            out.append("none")
            continue
        if pi <= 0.01:
            tier = "99"
        elif pi <= 0.05:
            tier = "95"
        else:
            tier = "90"
        out.append(("hot" if zi > 0 else "cold") + tier)
    return out
