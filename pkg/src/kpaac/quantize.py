"""Two-part lossless image coding and barycenter-quantized lossy coding.

A partition of the grey levels [0, 255] into m intervals turns a pixel chain
x into a cell chain y. The lossless code is the k-PAAC of y plus a
fixed-length index of each pixel inside its cell; its cost is estimated by

    CRIT(x | k, P) = BIC(y | k) + sum_j n_j * ceil(log2 A_j).

The lossy code keeps only y and reconstructs every cell at the rounded mean
of its members.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadContainer, CorruptPayload
from .imageio import SCANS, GrayImage, delinearize, linearize
from .mmc import ALPHA_MIN, SymbolChain, alpha_ratio, as_chain, bic_from_counts, count_transitions, fmt
from .paac import CodedBlob, decode_fast, encode_fast

LEVELS = 256


@dataclass(frozen=True)
class Partition:
    """Intervals [edges[j], edges[j+1]) of the integers 0..255."""

    edges: tuple[int, ...]

    def __post_init__(self):
        e = tuple(int(v) for v in self.edges)
        if len(e) < 2 or e[0] != 0 or e[-1] != LEVELS:
            raise ValueError("edges must start at 0 and end at 256")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("edges must be strictly increasing")
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_lower_bounds(cls, lows: Sequence[int]) -> "Partition":
        return cls(tuple(lows) + (LEVELS,))

    @property
    def m(self) -> int:
        return len(self.edges) - 1

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.edges[:-1], dtype=np.int64)

    @property
    def sizes(self) -> np.ndarray:
        """A_j, the number of grey levels in each interval."""
        return np.diff(np.array(self.edges, dtype=np.int64))

    @property
    def index_bits(self) -> np.ndarray:
        """ceil(log2 A_j) per interval (0 for singletons)."""
        return np.array([(int(a) - 1).bit_length() for a in self.sizes], dtype=np.int64)


def regular_partition(m: int) -> Partition:
    if not 1 <= m <= LEVELS:
        raise ValueError("m must lie in 1..256")
    return Partition(tuple((j * LEVELS) // m for j in range(m + 1)))


def _pixels(x) -> np.ndarray:
    if isinstance(x, SymbolChain):
        return x.symbols
    arr = np.asarray(x, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("pixel values must lie in [0, 255]")
    return arr.ravel()


def cell_chain(x, partition: Partition) -> SymbolChain:
    y = np.searchsorted(np.array(partition.edges[1:]), _pixels(x), side="right")
    return SymbolChain(y.astype(np.int64), partition.m)


def residual_bits(x, y, partition: Partition) -> int:
    """L(x | y) = sum_j n_j ceil(log2 A_j)."""
    y = as_chain(y, partition.m)
    if y.n != _pixels(x).size:
        raise ValueError("x and y differ in length")
    occupancy = np.bincount(y.symbols, minlength=partition.m)
    return int((occupancy * partition.index_bits).sum())


def crit_lossless(x, k: int, partition: Partition, penalty_mode: str = "full") -> float:
    y = cell_chain(x, partition)
    res = residual_bits(x, y, partition)
    if partition.m == 1 or y.n == 0:
        return float(res)
    return bic_from_counts(count_transitions(y, k), y.n, penalty_mode) + res


def _write_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


@dataclass(frozen=True)
class LosslessRow:
    k: int
    m: int
    crit_bits: float
    rate_bpp: float
    alpha_ok: bool


@dataclass(frozen=True)
class LosslessSweep:
    n: int
    rows: tuple[LosslessRow, ...]

    def best(self, k: int) -> LosslessRow:
        """Minimum-criterion row for order k (smallest m on ties)."""
        rows = [r for r in self.rows if r.k == k]
        if not rows:
            raise KeyError(k)
        return min(rows, key=lambda r: (r.crit_bits, r.m))

    @property
    def orders(self) -> list[int]:
        return sorted({r.k for r in self.rows})

    def to_csv(self) -> str:
        return _write_csv(
            ["k", "m", "crit_bits", "rate_bpp", "alpha_ok"],
            ((r.k, r.m, r.crit_bits, r.rate_bpp, int(r.alpha_ok)) for r in self.rows),
        )


def lossless_sweep(x, orders: Iterable[int], m_values: Iterable[int], penalty_mode: str = "full") -> LosslessSweep:
    """CRIT over regular partitions; rows in (k, m) grid order."""
    px = _pixels(x)
    n = px.size
    orders = list(orders)
    m_values = list(m_values)
    rows = []
    for k in orders:
        for m in m_values:
            crit = crit_lossless(px, k, regular_partition(m), penalty_mode)
            rows.append(LosslessRow(k, m, crit, crit / n, alpha_ratio(n, m, k) >= ALPHA_MIN))
    return LosslessSweep(n, tuple(rows))


def best_regular_partition(x, k: int, m_values: Iterable[int] = range(1, LEVELS + 1)) -> Partition:
    return regular_partition(lossless_sweep(x, [k], m_values).best(k).m)


# --- lossless container -----------------------------------------------------

IMAGE_MAGIC = b"PAI1"
_IMAGE_HEAD = struct.Struct(">4sBIIBBH")


def _pack_residual(offsets: np.ndarray, widths: np.ndarray) -> tuple[int, bytes]:
    """Each offset in ``width`` bits, MSB first, concatenated in chain order."""
    as_bits = np.unpackbits(offsets.astype(np.uint8)[:, None], axis=1)
    keep = np.arange(8)[None, :] >= (8 - widths)[:, None]
    flat = as_bits[keep]
    return int(flat.size), np.packbits(flat).tobytes()


def _unpack_residual(payload: bytes, nbits: int, widths: np.ndarray) -> np.ndarray:
    flat = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[:nbits].astype(np.int64)
    starts = np.r_[0, np.cumsum(widths)[:-1]]
    out = np.zeros(widths.size, dtype=np.int64)
    for b in range(int(widths.max(initial=0))):
        active = widths > b
        out[active] = 2 * out[active] + flat[starts[active] + b]
    return out


def encode_lossless(
    image: GrayImage,
    k: int = 1,
    partition: Partition | None = None,
    scan: str = "zigzag",
    backend: str | None = None,
) -> bytes:
    """Two-part container: header, PAC1 blob of y, fixed-length residuals.

    ``partition`` defaults to the regular P(m) minimizing the criterion.
    """
    if scan not in SCANS:
        raise ValueError(f"scan must be one of {SCANS}")
    x = linearize(image, scan).symbols
    if partition is None:
        partition = best_regular_partition(x, k)
    y = cell_chain(x, partition)
    blob = encode_fast(y, k, backend=backend)
    widths = partition.index_bits[y.symbols]
    offsets = x - partition.lower[y.symbols]
    nres, res = _pack_residual(offsets, widths)
    head = _IMAGE_HEAD.pack(
        IMAGE_MAGIC, 1, image.rows, image.cols, SCANS.index(scan), image.maxval, partition.m
    )
    lows = bytes(int(v) for v in partition.lower)
    return head + lows + blob.to_bytes() + struct.pack(">Q", nres) + res


def decode_lossless(data: bytes, backend: str | None = None) -> GrayImage:
    if len(data) < _IMAGE_HEAD.size:
        raise BadContainer("truncated image header")
    magic, version, rows, cols, scan_id, maxval, m = _IMAGE_HEAD.unpack_from(data)
    if magic != IMAGE_MAGIC or version != 1:
        raise BadContainer("not a PAI1 image container")
    if scan_id >= len(SCANS) or not 1 <= m <= LEVELS or rows < 1 or cols < 1:
        raise BadContainer("invalid image header fields")
    pos = _IMAGE_HEAD.size
    if len(data) < pos + m:
        raise BadContainer("truncated partition table")
    try:
        partition = Partition.from_lower_bounds(list(data[pos : pos + m]))
    except ValueError as exc:
        raise BadContainer(str(exc)) from exc
    pos += m
    blob, pos = CodedBlob.read(data, pos)
    if blob.alphabet_size != m or blob.length != rows * cols:
        raise BadContainer("cell chain does not match the image header")
    if len(data) < pos + 8:
        raise CorruptPayload("missing residual section")
    (nres,) = struct.unpack_from(">Q", data, pos)
    pos += 8
    res = data[pos:]
    if len(res) != (nres + 7) // 8:
        raise CorruptPayload("residual section length mismatch")
    y = decode_fast(blob, backend=backend).symbols
    widths = partition.index_bits[y]
    if int(widths.sum()) != nres:
        raise CorruptPayload("residual bit count does not match the cell chain")
    x = partition.lower[y] + _unpack_residual(res, nres, widths)
    if np.any(x >= np.array(partition.edges[1:])[y]):
        raise CorruptPayload("residual index outside its cell")
    return delinearize(x, rows, cols, SCANS[scan_id], maxval)


# --- lossy path -------------------------------------------------------------


def barycenter_levels(x, partition: Partition) -> np.ndarray:
    """B_j: rounded mean of the members of each cell (half rounds up).

    Empty cells reconstruct at the integer midpoint of their interval.
    """
    px = _pixels(x)
    y = cell_chain(px, partition).symbols
    sums = np.rint(np.bincount(y, weights=px, minlength=partition.m)).astype(np.int64)
    counts = np.bincount(y, minlength=partition.m).astype(np.int64)
    lo = partition.lower
    hi = np.array(partition.edges[1:], dtype=np.int64) - 1
    mid = (lo + hi) // 2
    safe = np.maximum(counts, 1)
    levels = (2 * sums + safe) // (2 * safe)
    return np.where(counts > 0, levels, mid)


@dataclass(frozen=True)
class QuantizedImage:
    cells: SymbolChain
    levels: np.ndarray
    rows: int
    cols: int
    scan: str = "zigzag"

    def reconstruct(self) -> GrayImage:
        return delinearize(self.levels[self.cells.symbols], self.rows, self.cols, self.scan)


def barycenter_quantize(image: GrayImage, partition: Partition, scan: str = "zigzag") -> QuantizedImage:
    x = linearize(image, scan).symbols
    y = cell_chain(x, partition)
    return QuantizedImage(y, barycenter_levels(x, partition), image.rows, image.cols, scan)


def psnr(original, quantized) -> float:
    """10 log10(255^2 / MSE) in dB; +inf for identical images."""
    a = original.pixels if isinstance(original, GrayImage) else np.asarray(original)
    b = quantized.pixels if isinstance(quantized, GrayImage) else np.asarray(quantized)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


@dataclass(frozen=True)
class RateDistortionRow:
    m: int
    k: int
    bic_bits: float
    rate_bpp: float
    psnr_db: float


@dataclass(frozen=True)
class RateDistortionSweep:
    n: int
    rows: tuple[RateDistortionRow, ...]

    def row(self, m: int, k: int) -> RateDistortionRow:
        for r in self.rows:
            if r.m == m and r.k == k:
                return r
        raise KeyError((m, k))

    def to_csv(self) -> str:
        return _write_csv(
            ["m", "k", "bic_bits", "rate_bpp", "psnr_db"],
            ((r.m, r.k, r.bic_bits, r.rate_bpp, r.psnr_db) for r in self.rows),
        )


def rate_distortion_sweep(
    image: GrayImage,
    orders: Iterable[int],
    m_values: Iterable[int],
    scan: str = "zigzag",
    penalty_mode: str = "full",
) -> RateDistortionSweep:
    orders = list(orders)
    rows = []
    for m in m_values:
        q = barycenter_quantize(image, regular_partition(m), scan)
        quality = psnr(image, q.reconstruct())
        y = q.cells
        for k in orders:
            bits = 0.0 if m == 1 else bic_from_counts(count_transitions(y, k), y.n, penalty_mode)
            rows.append(RateDistortionRow(m, k, bits, bits / y.n, quality))
    return RateDistortionSweep(image.n, tuple(rows))
