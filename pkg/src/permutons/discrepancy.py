"""Normalized interval discrepancy of a permutation.

d(tau) = max over non-empty intervals A, B of [n] of
| |A||B|/n^2 - |tau(A) /\\ B|/n |.  The maximum is n^2 * an integer, so the
exact mode reports an exact rational as (numerator, n^2) alongside the float.

Modes:

* ``exact``: true maximum, O(n^3): for every position interval A the inner
  maximization over B is the spread of the prefix statistic
  P[b] = n*cnt(b) - |A|*b.  Practical into the low thousands.
* ``prefix_bound``: s = max over prefix pairs of |ab/n^2 - N(a,b)/n| in
  O(n^2).  The grid-corner argument gives s <= d <= 4s exactly.
* ``grid``: certified enclosure for large n.  Endpoints restricted to about
  ``resolution`` equally spaced positions/values give a lower bound; moving
  an endpoint to the nearest gridline changes the deviation by at most
  2/resolution per endpoint, so d <= lower + 8/resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DiscrepancyResult:
    """Value plus certified enclosure [lower, upper] for d(tau)."""

    value: float
    lower: float
    upper: float
    mode: str
    numerator: int | None = None  # exact modes: d = numerator / n^2
    n: int = 0

    def __float__(self) -> float:
        return self.value


def _as_values(tau) -> np.ndarray:
    images = getattr(tau, "images", tau)
    return np.asarray(images, dtype=np.int64)


def discrepancy_brute(tau) -> DiscrepancyResult:
    """O(n^4) oracle over all interval pairs, n <= 50."""
    v = _as_values(tau)
    n = len(v)
    if n > 50:
        raise ValueError("brute-force discrepancy limited to n <= 50")
    # N[a][b] = #{i <= a : tau(i) <= b}
    N = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(1, n + 1):
        N[i] = N[i - 1]
        N[i, v[i - 1]:] += 1
    best = 0
    for a1 in range(n + 1):
        for a2 in range(a1 + 1, n + 1):
            row = N[a2] - N[a1]
            for b1 in range(n + 1):
                for b2 in range(b1 + 1, n + 1):
                    dev = abs(n * (row[b2] - row[b1]) - (a2 - a1) * (b2 - b1))
                    if dev > best:
                        best = int(dev)
    return DiscrepancyResult(best / n**2, best / n**2, best / n**2,
                             "brute", best, n)


def _discrepancy_exact(v: np.ndarray) -> DiscrepancyResult:
    n = len(v)
    bgrid = np.arange(n + 1, dtype=np.int64)
    best = 0
    for a1 in range(n):
        cnt = np.zeros(n + 1, dtype=np.int64)
        for a2 in range(a1 + 1, n + 1):
            val = v[a2 - 1]
            cnt[val:] += n            # running n * prefix-count over values
            P = cnt - (a2 - a1) * bgrid
            spread = int(P.max() - P.min())
            if spread > best:
                best = spread
    return DiscrepancyResult(best / n**2, best / n**2, best / n**2,
                             "exact", best, n)


def _prefix_statistic(v: np.ndarray) -> int:
    """max over (a, b) in [0..n]^2 of |n*N(a,b) - a*b| (integer)."""
    n = len(v)
    bgrid = np.arange(n + 1, dtype=np.int64)
    z = np.zeros(n + 1, dtype=np.int64)
    best = 0
    for a in range(1, n + 1):
        z[v[a - 1]:] += n
        dev = np.abs(z - a * bgrid).max()
        if dev > best:
            best = int(dev)
    return best


def _discrepancy_grid(v: np.ndarray, resolution: int) -> DiscrepancyResult:
    n = len(v)
    r = max(2, min(resolution, n))
    # endpoint candidates: 0 and ceil(i*n/r), i = 1..r (always includes n)
    cuts = np.unique(np.ceil(np.arange(r + 1) * n / r).astype(np.int64))
    N = np.zeros((len(cuts), n + 1), dtype=np.int64)
    full = np.zeros(n + 1, dtype=np.int64)
    pos = 0
    for ci, c in enumerate(cuts):
        while pos < c:
            full[v[pos]:] += 1
            pos += 1
        N[ci] = full
    Nc = N[:, cuts]                    # prefix counts at grid corners
    best = 0
    for i1 in range(len(cuts) - 1):
        lens = (cuts[i1 + 1:] - cuts[i1])[:, None]
        P = n * (Nc[i1 + 1:] - Nc[i1]) - lens * cuts[None, :]
        spread = (P.max(axis=1) - P.min(axis=1)).max()
        if spread > best:
            best = int(spread)
    lower = best / n**2
    step = math.ceil(n / r)
    slack = 8.0 * step / n
    return DiscrepancyResult(lower, lower, min(lower + slack, 1.0),
                             "grid", best, n)


def discrepancy(tau, mode: str = "exact", resolution: int = 1000) -> DiscrepancyResult:
    """Interval discrepancy of a permutation, by mode (see module docs)."""
    v = _as_values(tau)
    n = len(v)
    if n == 1:
        return DiscrepancyResult(0.0, 0.0, 0.0, mode, 0, 1)
    if mode == "exact":
        return _discrepancy_exact(v)
    if mode == "prefix_bound":
        s = _prefix_statistic(v)
        val = s / n**2
        return DiscrepancyResult(val, val, min(4.0 * val, 1.0), mode, s, n)
    if mode == "grid":
        return _discrepancy_grid(v, resolution)
    raise ValueError(f"unknown discrepancy mode {mode!r}")
