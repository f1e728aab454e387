"""Independent slow-path oracles used to freeze expected values."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np


def ml_bits_per_position(x, m, k):
    """k log2 m plus the per-position log-loss under the ML fit (dict based)."""
    x = [int(v) for v in x]
    pair = Counter()
    ctx = Counter()
    for t in range(k, len(x)):
        c = tuple(x[t - k : t])
        pair[c, x[t]] += 1
        ctx[c] += 1
    bits = min(k, len(x)) * math.log2(m)
    for t in range(k, len(x)):
        c = tuple(x[t - k : t])
        bits -= math.log2(pair[c, x[t]] / ctx[c])
    return bits


def adaptive_probability(x, m, k):
    """Exact product of the add-one predictions, recounting from scratch each step."""
    x = [int(v) for v in x]
    prob = Fraction(1)
    for t in range(len(x)):
        if t < k:
            prob *= Fraction(1, m)
            continue
        c = tuple(x[t - k : t])
        seen = [x[u] for u in range(k, t) if tuple(x[u - k : u]) == c]
        prob *= Fraction(seen.count(x[t]) + 1, len(seen) + m)
    return prob


def ceil_neg_log2(p: Fraction) -> int:
    L = 0
    while Fraction(1, 2**L) > p:
        L += 1
    return L


def histogram_crit_naive(sample, a, b, R, cuts):
    """Bin every point by scanning the interval list."""
    n = len(sample)
    width = (b - a) / R
    counts = [0] * (len(cuts) - 1)
    for v in sample:
        cell = min(int(math.floor((v - a) / (b - a) * R)), R - 1)
        for j in range(len(cuts) - 1):
            if cuts[j] <= cell < cuts[j + 1]:
                counts[j] += 1
                break
    total = 0.0
    for j, nj in enumerate(counts):
        if nj:
            L = (cuts[j + 1] - cuts[j]) * width
            total -= nj * math.log2(nj / (n * L))
    return total + 0.5 * (len(counts) - 1) * math.log2(n)


def brute_force_partitions(grid, crit, rtol):
    """Enumerate all 2^(R-1) cut sets; ties -> fewer intervals -> lexicographic."""
    R = grid.R
    scored = []
    for mask in range(1 << (R - 1)):
        cuts = (0, *[t for t in range(1, R) if mask >> (t - 1) & 1], R)
        scored.append((crit(grid, cuts), cuts))
    lowest = min(c for c, _ in scored)
    tol = rtol * max(1.0, abs(lowest))
    ties = [cuts for c, cuts in scored if c <= lowest + tol]
    best = min(ties, key=lambda cs: (len(cs), cs))
    return best, crit(grid, best)


def zigzag_walk(rows, cols):
    """Walk the JPEG-style diagonal path cell by cell."""
    out = []
    for d in range(rows + cols - 1):
        cells = [(i, d - i) for i in range(rows) if 0 <= d - i < cols]
        if d % 2 == 0:
            cells.sort(key=lambda ij: ij[1])
        else:
            cells.sort(key=lambda ij: ij[0])
        out.extend(cells)
    return out
