"""MDL histogram selection on a regular grid of R elementary cells.

For a partition of [a, b] into intervals of lengths L_j holding n_j points,

    CRIT = -sum_j n_j log2(n_j / (n L_j)) + (m - 1)/2 log2 n,

and the minimizer over all 2^(R-1) grid-aligned partitions is found by a
shortest-path DP in R(R+1)/2 interval evaluations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from ._accel import resolve
from .mmc import fmt

# Relative tolerance under which two criterion values count as tied.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class HistogramGrid:
    a: float
    b: float
    R: int
    sample: np.ndarray

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be at least 1")
        if not self.a < self.b:
            raise ValueError("need a < b")
        x = np.asarray(self.sample, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("sample must be non-empty")
        if np.any(x < self.a) or np.any(x > self.b):
            raise ValueError("sample points must lie in [a, b]")
        x.setflags(write=False)
        object.__setattr__(self, "sample", x)
        cells = np.floor((x - self.a) / (self.b - self.a) * self.R).astype(np.int64)
        cells = np.clip(cells, 0, self.R - 1)
        prefix = np.r_[0, np.cumsum(np.bincount(cells, minlength=self.R))].astype(np.int64)
        prefix.setflags(write=False)
        object.__setattr__(self, "prefix", prefix)

    @property
    def n(self) -> int:
        return int(self.sample.size)

    @property
    def cell_width(self) -> float:
        return (self.b - self.a) / self.R

    def position(self, t: int) -> float:
        return self.a + t * self.cell_width

    def interval_cost(self, lo: int, hi: int) -> float:
        """DP cost of interval (lo, hi]: likelihood term plus 1/2 log2 n."""
        nj = int(self.prefix[hi] - self.prefix[lo])
        cost = 0.5 * math.log2(self.n)
        if nj:
            cost -= nj * math.log2(nj / (self.n * ((hi - lo) * self.cell_width)))
        return cost


def _check_cuts(grid: HistogramGrid, cuts: Sequence[int]) -> tuple[int, ...]:
    cuts = tuple(int(c) for c in cuts)
    if len(cuts) < 2 or cuts[0] != 0 or cuts[-1] != grid.R:
        raise ValueError(f"cuts must run from 0 to R={grid.R}")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cuts must be strictly increasing")
    return cuts


def crit_histogram(grid: HistogramGrid, cuts: Sequence[int]) -> float:
    cuts = _check_cuts(grid, cuts)
    n = grid.n
    counts = np.diff(grid.prefix[list(cuts)]).astype(float)
    lengths = np.diff(np.array(cuts, dtype=float)) * grid.cell_width
    nz = counts > 0
    like = -float((counts[nz] * np.log2(counts[nz] / (n * lengths[nz]))).sum())
    return like + 0.5 * (len(cuts) - 2) * math.log2(n)


@dataclass(frozen=True)
class HistogramPartition:
    grid: HistogramGrid
    cuts: tuple[int, ...]
    criterion: float
    evaluations: int = 0

    @property
    def m(self) -> int:
        return len(self.cuts) - 1

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.grid.prefix[list(self.cuts)])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(np.array(self.cuts, dtype=float)) * self.grid.cell_width

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.grid.n * self.lengths)

    @property
    def edges(self) -> np.ndarray:
        return np.array([self.grid.position(t) for t in self.cuts])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["left", "right", "n_j", "L_j", "density", "criterion_bits"])
        edges = self.edges
        for j in range(self.m):
            w.writerow(
                [fmt(float(edges[j])), fmt(float(edges[j + 1])), int(self.counts[j]),
                 fmt(float(self.lengths[j])), fmt(float(self.density[j])), fmt(self.criterion)]
            )
        return buf.getvalue()


def dp_select(grid: HistogramGrid, backend: str | None = None) -> HistogramPartition:
    """Exact minimizer of the criterion over grid-aligned partitions.

    Ties (within a relative 1e-12) go to fewer intervals, then to the
    lexicographically smallest cut sequence.
    """
    prefix = np.ascontiguousarray(grid.prefix)
    args = (prefix, float(grid.n), grid.cell_width, TIE_RTOL)
    if resolve(backend) == "numba":
        _, _, prev, evals = _kernels.histogram_dp_numba(*args)
    else:
        _, _, prev, evals = _kernels.histogram_dp_numpy(*args)
    cuts = [grid.R]
    while cuts[-1] > 0:
        cuts.append(int(prev[cuts[-1]]))
    cuts = tuple(reversed(cuts))
    return HistogramPartition(grid, cuts, crit_histogram(grid, cuts), int(evals))


def sample_laplace(
    scale: float, n: int, seed: int | None = 0, a: float = -5.0, b: float = 5.0
) -> np.ndarray:
    """Inverse-CDF Laplace(0, scale) draws, redrawing points outside [a, b]."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    out = np.empty(0)
    while out.size < n:
        u = rng.random(max(n - out.size, 16)) - 0.5
        x = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
        out = np.r_[out, x[(x >= a) & (x <= b)]]
    return out[:n]


def load_sample(path) -> np.ndarray:
    """Plain text, one real per line."""
    return np.loadtxt(path, dtype=float, ndmin=1)
