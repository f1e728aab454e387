"""PGM (P2/P5) reading and writing, and image <-> chain scans."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PGMError, UnsupportedDepth
from .mmc import SymbolChain

SCANS = ("zigzag", "raster")


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array")
        if px.size and (px.min() < 0 or px.max() > 255):
            raise ValueError("pixels must lie in [0, 255]")
        if not 1 <= self.maxval <= 255:
            raise UnsupportedDepth(f"maxval {self.maxval} outside 1..255")
        px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def n(self) -> int:
        return self.pixels.size

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.maxval == other.maxval and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    out = []
    for _ in range(count):
        mt = _TOKEN.match(data, pos)
        if mt is None:
            raise PGMError("truncated PGM header")
        out.append(mt.group(1))
        pos = mt.end()
    return out, pos


def read_pgm(data: bytes) -> GrayImage:
    if len(data) < 2 or data[:1] != b"P" or data[1:2] not in (b"2", b"5"):
        raise PGMError("not a P2/P5 PGM file")
    binary = data[1:2] == b"5"
    fields, pos = _tokens(data, 3, 2)
    try:
        cols, rows, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise PGMError("non-numeric PGM header field") from exc
    if cols < 1 or rows < 1:
        raise PGMError("image dimensions must be positive")
    if maxval > 255:
        raise UnsupportedDepth(f"unsupported depth: maxval {maxval} > 255")
    if maxval < 1:
        raise PGMError("maxval must be positive")
    n = rows * cols
    if binary:
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PGMError("missing whitespace after PGM header")
        raster = data[pos + 1 : pos + 1 + n]
        if len(raster) < n:
            raise PGMError("truncated pixel data")
        px = np.frombuffer(raster, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) < n:
            raise PGMError("truncated pixel data")
        try:
            px = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError as exc:
            raise PGMError("non-numeric pixel value") from exc
    if px.size and px.max() > maxval:
        raise PGMError("pixel value exceeds maxval")
    return GrayImage(px.reshape(rows, cols), maxval)


def write_pgm(image: GrayImage, ascii: bool = False) -> bytes:
    head = f"P{2 if ascii else 5}\n{image.cols} {image.rows}\n{image.maxval}\n".encode()
    if not ascii:
        return head + image.pixels.tobytes()
    lines = (" ".join(str(int(v)) for v in row) for row in image.pixels)
    return head + ("\n".join(lines) + "\n").encode()


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(image: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(image))


@lru_cache(maxsize=32)
def scan_order(rows: int, cols: int, order: str = "zigzag") -> np.ndarray:
    """Flat (row-major) pixel indices in visiting order.

    zigzag walks anti-diagonals d = i + j; even d upward (column increasing),
    odd d downward (row increasing).
    """
    if order not in SCANS:
        raise ValueError(f"scan must be one of {SCANS}")
    idx = np.arange(rows * cols)
    if order == "raster":
        idx.setflags(write=False)
        return idx
    i, j = np.divmod(idx, cols)
    d = i + j
    along = np.where(d % 2 == 0, j, i)
    perm = np.lexsort((along, d))
    perm.setflags(write=False)
    return perm


def linearize(image: GrayImage, order: str = "zigzag") -> SymbolChain:
    perm = scan_order(image.rows, image.cols, order)
    return SymbolChain(image.pixels.ravel()[perm].astype(np.int64), 256)


def delinearize(chain, rows: int, cols: int, order: str = "zigzag", maxval: int = 255) -> GrayImage:
    symbols = chain.symbols if isinstance(chain, SymbolChain) else np.asarray(chain)
    if symbols.shape[0] != rows * cols:
        raise ValueError(f"chain length {symbols.shape[0]} != {rows}x{cols}")
    flat = np.empty(rows * cols, dtype=np.int64)
    flat[scan_order(rows, cols, order)] = symbols
    return GrayImage(flat.reshape(rows, cols), maxval)
