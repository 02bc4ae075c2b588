"""Exact pattern-occurrence counting.

``profile(tau, k)`` returns occurrence counts of every length-k pattern:
k <= 2 and k = 3 run in O(n log n) from per-position quadrant statistics,
k = 4 in O(n^2) via two vectorized sweeps over middle pairs.  k = 5, 6 fall
back to chunked subset enumeration (|tau| <= 60).  ``profile_naive`` is the
independent oracle used by the test suite; the fast paths must agree with it
exactly.

All counts are Python ints (the numpy accumulators stay below 2^63 for
n <= 10^4: the largest intermediate is bounded by n * C(n, 3) < 2^61).
"""

from __future__ import annotations

import math
from itertools import combinations, permutations
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

Pattern = Tuple[int, ...]


def pattern_of(values: Sequence[int]) -> Pattern:
    """Order-isomorphism pattern (ranks, 1-based) of a value sequence."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    out = [0] * len(values)
    for rank, i in enumerate(order):
        out[i] = rank + 1
    return tuple(out)


def all_patterns(k: int) -> list[Pattern]:
    return sorted(permutations(range(1, k + 1)))


def occurrences_naive(pattern: Pattern, tau: Sequence[int]) -> int:
    """Subset-enumeration oracle, Theta(n^k)."""
    k = len(pattern)
    count = 0
    for idx in combinations(range(len(tau)), k):
        if pattern_of([tau[i] for i in idx]) == pattern:
            count += 1
    return count


def profile_naive(tau: Sequence[int], k: int) -> Dict[Pattern, int]:
    """Full pattern table by subset enumeration."""
    table: Dict[Pattern, int] = {p: 0 for p in all_patterns(k)}
    for idx in combinations(range(len(tau)), k):
        table[pattern_of([tau[i] for i in idx])] += 1
    return table


class _Fenwick:
    """Binary indexed tree over values 1..n (prefix counts)."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.tree = [0] * (n + 1)

    def add(self, v: int) -> None:
        while v <= self.n:
            self.tree[v] += 1
            v += v & (-v)

    def count_le(self, v: int) -> int:
        s = 0
        while v > 0:
            s += self.tree[v]
            v -= v & (-v)
        return s


def left_smaller_counts(values: Sequence[int]) -> np.ndarray:
    """c[j] = #{i < j : values[i] < values[j]}, O(n log n)."""
    n = len(values)
    fen = _Fenwick(n)
    out = np.zeros(n, dtype=np.int64)
    for j, v in enumerate(values):
        out[j] = fen.count_le(v - 1)
        fen.add(v)
    return out


def inversions(tau: Sequence[int]) -> int:
    n = len(tau)
    return n * (n - 1) // 2 - int(left_smaller_counts(tau).sum())


def _profile1(tau: Sequence[int]) -> Dict[Pattern, int]:
    return {(1,): len(tau)}


def _profile2(tau: Sequence[int]) -> Dict[Pattern, int]:
    n = len(tau)
    asc = int(left_smaller_counts(tau).sum())
    return {(1, 2): asc, (2, 1): n * (n - 1) // 2 - asc}


def _profile3(tau: Sequence[int]) -> Dict[Pattern, int]:
    """Quadrant statistics: every triple is classified by its extreme
    element relative to one of its positions."""
    n = len(tau)
    v = np.asarray(tau, dtype=np.int64)
    a = left_smaller_counts(tau)          # smaller, left
    j_idx = np.arange(n, dtype=np.int64)
    b = j_idx - a                         # larger, left
    c = (v - 1) - a                       # smaller, right
    d = (n - v) - b                       # larger, right
    c123 = int((a * d).sum())
    c321 = int((b * c).sum())
    sa = int((a * (a - 1) // 2).sum())    # both left, both smaller
    sb = int((b * (b - 1) // 2).sum())    # both left, both larger
    sc = int((c * (c - 1) // 2).sum())    # both right, both smaller
    c213 = sa - c123
    c231 = sb - c321
    c312 = sc - c321
    total = math.comb(n, 3)
    c132 = total - (c123 + c213 + c231 + c312 + c321)
    return {
        (1, 2, 3): c123,
        (1, 3, 2): c132,
        (2, 1, 3): c213,
        (2, 3, 1): c231,
        (3, 1, 2): c312,
        (3, 2, 1): c321,
    }


def _zone_signature_map() -> Dict[Tuple[bool, int, int], Pattern]:
    """Pattern keyed by (middle pair ascending?, zone of first point, zone of
    last point) for the twelve signatures whose zones differ.  Zones are
    relative to the middle-pair values: 0 below both, 1 between, 2 above."""
    reps = {0: 1.0, 1: 2.5, 2: 4.0}
    out: Dict[Tuple[bool, int, int], Pattern] = {}
    for asc in (True, False):
        vj, vk = (2.0, 3.0) if asc else (3.0, 2.0)
        for zi in range(3):
            for zl in range(3):
                if zi == zl:
                    continue
                quad = [reps[zi], vj, vk, reps[zl]]
                out[(asc, zi, zl)] = pattern_of(quad)
    return out


_SIG_MAP = _zone_signature_map()


def _ambiguous_pair(asc: bool, z: int) -> Tuple[Pattern, Pattern]:
    """(pattern with first point below last, pattern with first above) for
    the two points sharing zone z around the middle pair."""
    reps = {0: 1.0, 1: 2.5, 2: 4.0}
    vj, vk = (2.0, 3.0) if asc else (3.0, 2.0)
    lo = pattern_of([reps[z] - 0.1, vj, vk, reps[z] + 0.1])
    hi = pattern_of([reps[z] + 0.1, vj, vk, reps[z] - 0.1])
    return lo, hi


def _profile4(tau: Sequence[int]) -> Dict[Pattern, int]:
    """O(n^2) 4-pattern table.

    Sweep A classifies each quadruple (i < j < k < l) by the middle pair
    (j, k): whether v_j < v_k, and the value zones of v_i and v_l relative to
    (min, max) of the pair.  Twelve signatures determine the pattern
    outright; the six with equal zones cover two patterns each.  Sweep B
    counts one pattern of each ambiguous pair directly (three folded into
    the same j-loop, three into an i-loop); the partner follows by
    subtraction.  All arithmetic is int64-exact.
    """
    n = len(tau)
    table: Dict[Pattern, int] = {p: 0 for p in all_patterns(4)}
    if n < 4:
        return table
    v = np.asarray(tau, dtype=np.int64)
    c_self = left_smaller_counts(tau)     # c_self[p] = #{q < p: v_q < v_p}
    pos = np.arange(n, dtype=np.int64)

    acc = {True: np.zeros((3, 3), dtype=np.int64),
           False: np.zeros((3, 3), dtype=np.int64)}
    d1342 = d2143 = d3412 = d3214 = 0

    # one prefix-count array over values, rebuilt incrementally:
    # cnt_lt[x] = #{i < j : v_i < x}
    cnt_lt = np.zeros(n + 2, dtype=np.int64)
    for j in range(n - 1):
        vj = int(v[j])
        later = v[j + 1:]
        kk = pos[j + 1:]
        asc = later > vj
        m = np.where(asc, vj, later)
        M = np.where(asc, later, vj)

        # left zone counts over i < j
        L_low = cnt_lt[m]
        L_mid = cnt_lt[M] - cnt_lt[m]
        L_high = j - cnt_lt[M]

        # suffix zone counts over l > position of the later element
        cum_vj = np.cumsum(v < vj)        # inclusive prefix of values < v_j
        C_m = np.where(asc, cum_vj[j + 1:], c_self[j + 1:])
        C_M = np.where(asc, c_self[j + 1:], cum_vj[j + 1:])
        S_low = (m - 1) - C_m
        S_mid = (M - m) - (C_M - C_m)
        S_high = n - M - kk + C_M

        Lmat = np.stack((L_low, L_mid, L_high))
        Smat = np.stack((S_low, S_mid, S_high))
        for flag in (True, False):
            mask = asc if flag else ~asc
            if mask.any():
                acc[flag] += Lmat[:, mask] @ Smat[:, mask].T

        # disambiguators with j as the second position of the quadruple
        vl = later
        G = np.cumsum(v > vj)
        W = cum_vj
        below = ~asc                      # v_l < v_j
        if below.any():
            lpos = kk[below]
            vlb = vl[below]
            # 1342: i below l, k above j, i<j<k<l
            d1342 += int((cnt_lt[vlb] * (G[lpos - 1] - G[j])).sum())
            # 3412: i strictly between l and j in value, k below l
            d3412 += int(((cnt_lt[vj] - cnt_lt[vlb])
                          * (c_self[lpos] - cnt_lt[vlb])).sum())
        above = asc                       # v_l > v_j
        if above.any():
            lpos = kk[above]
            vla = vl[above]
            mid_i = cnt_lt[vla] - cnt_lt[vj]
            # 2143: k above l
            d2143 += int((mid_i * (lpos - j - c_self[lpos] + cnt_lt[vla])).sum())
            # 3214: k below j
            d3214 += int((mid_i * (W[lpos - 1] - W[j])).sum())

        cnt_lt[vj + 1:] += 1

    # sweep B: remaining two disambiguators, i as the first position
    d3124 = d1432 = 0
    cnt_lt_incl = np.zeros(n + 2, dtype=np.int64)
    for i in range(n - 3):
        vi = int(v[i])
        cnt_lt_incl[vi + 1:] += 1         # include position i itself
        later = v[i + 1:]
        kk = pos[i + 1:]
        H = np.cumsum(v > vi)
        J = np.cumsum(v < vi)
        below = later < vi                # v_k < v_i
        if below.any():
            kpos = kk[below]
            vkb = later[below]
            d3124 += int(((c_self[kpos] - cnt_lt_incl[vkb])
                          * ((n - vi) - H[kpos])).sum())
        above = later > vi                # v_k > v_i
        if above.any():
            kpos = kk[above]
            vka = later[above]
            nj = (kpos - c_self[kpos]) - ((i + 1) - cnt_lt_incl[vka])
            nl = (vka - vi) - c_self[kpos] + J[kpos]
            d1432 += int((nj * nl).sum())

    for (flag, zi, zl), pat in _SIG_MAP.items():
        table[pat] = int(acc[flag][zi, zl])

    # ambiguous classes: direct count and partner by subtraction
    def split(flag: bool, z: int, direct: int, direct_is_lo: bool) -> None:
        lo, hi = _ambiguous_pair(flag, z)
        cls = int(acc[flag][z, z])
        if direct_is_lo:
            table[lo] = direct
            table[hi] = cls - direct
        else:
            table[hi] = direct
            table[lo] = cls - direct

    split(True, 0, d1342, True)    # (asc, low):  1342 / 2341
    split(True, 1, d2143, True)    # (asc, mid):  2143 / 3142
    split(True, 2, d3124, True)    # (asc, high): 3124 / 4123
    split(False, 0, d1432, True)   # (desc, low): 1432 / 2431
    split(False, 1, d3412, False)  # (desc, mid): 2413 / 3412
    split(False, 2, d3214, True)   # (desc, high): 3214 / 4213

    assert sum(table.values()) == math.comb(n, 4), "4-profile lost mass"
    return table


_CHUNK = 1 << 19


def _profile_enum(tau: Sequence[int], k: int) -> Dict[Pattern, int]:
    """Chunked subset enumeration for k = 5, 6."""
    n = len(tau)
    pats = all_patterns(k)
    code_of = {}
    base = k + 1
    for t, p in enumerate(pats):
        code = 0
        for r in p:
            code = code * base + r
        code_of[code] = t
    codes = np.zeros(base ** (k + 1), dtype=np.int64) - 1
    for code, t in code_of.items():
        codes[code] = t
    tau_arr = np.asarray(tau, dtype=np.int64)
    counts = np.zeros(len(pats), dtype=np.int64)
    buf: list[tuple[int, ...]] = []
    powers = np.array([base ** (k - 1 - i) for i in range(k)], dtype=np.int64)

    def flush() -> None:
        if not buf:
            return
        idx = np.array(buf, dtype=np.int64)
        vals = tau_arr[idx]
        ranks = np.argsort(np.argsort(vals, axis=1), axis=1) + 1
        code = ranks @ powers
        t = codes[code]
        counts[:] += np.bincount(t, minlength=len(pats))
        buf.clear()

    for comb in combinations(range(n), k):
        buf.append(comb)
        if len(buf) >= _CHUNK:
            flush()
    flush()
    return {p: int(c) for p, c in zip(pats, counts)}


def profile(tau: Sequence[int], k: int) -> Dict[Pattern, int]:
    """Occurrence count of every length-k pattern in tau."""
    n = len(tau)
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range 1..{n}")
    if k == 1:
        return _profile1(tau)
    if k == 2:
        return _profile2(tau)
    if k == 3:
        return _profile3(tau)
    if k == 4:
        return _profile4(tau)
    if k in (5, 6):
        if n > 60:
            raise ValueError("k = 5, 6 exact profiles limited to |tau| <= 60")
        return _profile_enum(tau, k)
    raise ValueError("exact profiles support k <= 6")


def occurrences(pattern: Pattern, tau: Sequence[int]) -> int:
    """#occurrences of the pattern in tau (fast path, exact)."""
    k = len(pattern)
    if sorted(pattern) != list(range(1, k + 1)):
        raise ValueError(f"not a pattern in one-line notation: {pattern}")
    if k > len(tau):
        raise ValueError("pattern longer than host permutation")
    return profile(tau, k)[tuple(pattern)]
