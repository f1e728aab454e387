"""k-predictive adaptive arithmetic coding.

Two coders share one adaptive model, the add-one estimate
``(n(i|j) + 1) / (n(j) + m)`` over the last k symbols, with uniform
predictions for the first k symbols:

* ``encode_reference`` / ``decode_reference`` track the coding interval with
  exact rationals and emit the largest length-L dyadic of the final interval,
  L = ceil(-log2 width). Intervals are left-open, right-closed, so
  ``abaa`` (k=1) codes to 01001 and ``abab`` to 0110.
* ``encode_fast`` / ``decode_fast`` run a 62-bit renormalizing integer coder
  and stay within a couple of bits of the reference length.

Both write a ``CodedBlob``; the blob does not record which coder produced it.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from ._accel import resolve
from .errors import BadContainer, CorruptPayload, ModelTooLarge
from .mmc import MAX_DENSE_ENTRIES, SymbolChain, as_chain, check_model_size, context_codes

MAGIC = b"PAC1"
VERSION = 1
_HEADER = struct.Struct(">4sBBHQQ")
HEADER_SIZE = _HEADER.size  # 24 bytes


class AdaptiveModel:
    """Running order-k counts and the add-one predictive distribution."""

    def __init__(self, m: int, k: int):
        if m < 1 or k < 0:
            raise ValueError("need m >= 1 and k >= 0")
        self.m = m
        self.k = k
        self.t = 0
        self.history: tuple[int, ...] = ()
        self.counts: dict[tuple[int, ...], list[int]] = {}

    @property
    def warming_up(self) -> bool:
        return self.t < self.k

    @property
    def context(self) -> tuple[int, ...]:
        return self.history

    def predict(self) -> list[Fraction]:
        m = self.m
        if self.warming_up:
            return [Fraction(1, m)] * m
        row = self.counts.get(self.history)
        if row is None:
            return [Fraction(1, m)] * m
        total = sum(row) + m
        return [Fraction(c + 1, total) for c in row]

    def update(self, symbol: int) -> None:
        if not 0 <= symbol < self.m:
            raise ValueError(f"symbol {symbol} outside alphabet of size {self.m}")
        if not self.warming_up:
            row = self.counts.setdefault(self.history, [0] * self.m)
            row[symbol] += 1
        if self.k:
            self.history = (self.history + (symbol,))[-self.k :]
        self.t += 1


def predict(model: AdaptiveModel) -> list[Fraction]:
    return model.predict()


@dataclass(frozen=True)
class CodedBlob:
    order: int
    alphabet_size: int
    length: int
    nbits: int
    payload: bytes

    @classmethod
    def from_bits(cls, bits, order: int, alphabet_size: int, length: int) -> "CodedBlob":
        arr = np.asarray(bits, dtype=np.uint8)
        return cls(order, alphabet_size, length, int(arr.size), np.packbits(arr).tobytes())

    @property
    def bit_array(self) -> np.ndarray:
        raw = np.frombuffer(self.payload, dtype=np.uint8)
        return np.unpackbits(raw)[: self.nbits]

    @property
    def bits(self) -> str:
        return "".join("1" if b else "0" for b in self.bit_array)

    def to_bytes(self) -> bytes:
        if not 0 <= self.order < 256:
            raise BadContainer("order does not fit the 1-byte header field")
        if not 1 <= self.alphabet_size < 65536:
            raise BadContainer("alphabet size does not fit the 2-byte header field")
        head = _HEADER.pack(MAGIC, VERSION, self.order, self.alphabet_size, self.length, self.nbits)
        return head + self.payload

    @classmethod
    def read(cls, data: bytes, offset: int = 0) -> tuple["CodedBlob", int]:
        """Parse one blob starting at ``offset``; return it and the end offset."""
        if len(data) - offset < HEADER_SIZE:
            raise BadContainer("truncated PAC1 header")
        magic, version, k, m, n, nbits = _HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise BadContainer(f"bad magic {magic!r}")
        if version != VERSION:
            raise BadContainer(f"unsupported version {version}")
        if m < 1:
            raise BadContainer("alphabet size must be positive")
        start = offset + HEADER_SIZE
        end = start + (nbits + 7) // 8
        if end > len(data):
            raise CorruptPayload("payload shorter than its declared bit count")
        payload = bytes(data[start:end])
        if nbits % 8 and payload[-1] & ((1 << (8 - nbits % 8)) - 1):
            raise CorruptPayload("non-zero padding bits")
        return cls(k, m, n, nbits, payload), end

    @classmethod
    def from_bytes(cls, data: bytes) -> "CodedBlob":
        blob, end = cls.read(data)
        if end != len(data):
            raise CorruptPayload("trailing bytes after payload")
        return blob


def _check_encodable(chain: SymbolChain) -> None:
    if chain.n < 1:
        raise ValueError("cannot encode an empty chain")


def _ceil_neg_log2(width: Fraction) -> int:
    """Smallest L >= 0 with 2**-L <= width."""
    p, q = width.numerator, width.denominator
    L = max(0, q.bit_length() - p.bit_length())
    while (p << L) < q:
        L += 1
    while L > 0 and (p << (L - 1)) >= q:
        L -= 1
    return L


def _final_code(low: Fraction, width: Fraction) -> tuple[int, int]:
    """Largest dyadic of length L in (low, low + width], as (numerator, L)."""
    L = _ceil_neg_log2(width)
    high = low + width
    num = (high.numerator << L) // high.denominator
    return num, L


def _reference_interval(symbols: Sequence[int], m: int, k: int) -> tuple[Fraction, Fraction]:
    model = AdaptiveModel(m, k)
    low, width = Fraction(0), Fraction(1)
    for s in symbols:
        probs = model.predict()
        low += width * sum(probs[:s], Fraction(0))
        width *= probs[s]
        model.update(int(s))
    return low, width


def encode_reference(chain, k: int, m: int | None = None) -> CodedBlob:
    """Exact-rational k-PAAC."""
    chain = as_chain(chain, m)
    _check_encodable(chain)
    low, width = _reference_interval(chain.symbols.tolist(), chain.m, k)
    num, L = _final_code(low, width)
    bits = [0] * L if num == 1 << L else [(num >> (L - 1 - i)) & 1 for i in range(L)]
    return CodedBlob.from_bits(bits, k, chain.m, chain.n)


def decode_reference(blob: CodedBlob) -> SymbolChain:
    m, k, n, L = blob.alphabet_size, blob.order, blob.length, blob.nbits
    if n < 1:
        raise BadContainer("empty chains are never encoded")
    num = 0
    for b in blob.bit_array:
        num = 2 * num + int(b)
    # The code is never 0; an all-zero pattern is the fractional part of 1.
    value = Fraction(1) if num == 0 else Fraction(num, 1 << L)
    model = AdaptiveModel(m, k)
    low, width = Fraction(0), Fraction(1)
    out = []
    for _ in range(n):
        pos = (value - low) / width
        if not 0 < pos <= 1:
            raise CorruptPayload("code value left the coding interval")
        probs = model.predict()
        acc = Fraction(0)
        for s, p in enumerate(probs):
            if pos <= acc + p:
                break
            acc += p
        low += width * acc
        width *= p
        model.update(s)
        out.append(s)
    expected, expected_len = _final_code(low, width)
    if expected_len != L or expected % (1 << L) != num:
        raise CorruptPayload("payload is not the code of any chain of this length")
    return SymbolChain(np.array(out, dtype=np.int64), m)


def _coder_tables_ok(m: int, k: int) -> None:
    nctx = check_model_size(m, k)
    if nctx * m > MAX_DENSE_ENTRIES:
        raise ModelTooLarge(f"coder tables for m={m}, k={k} exceed {MAX_DENSE_ENTRIES} entries")


def encode_fast(chain, k: int, m: int | None = None, backend: str | None = None) -> CodedBlob:
    """Renormalizing 62-bit integer k-PAAC."""
    chain = as_chain(chain, m)
    _check_encodable(chain)
    _coder_tables_ok(chain.m, k)
    max_bits = _kernels.max_code_bits(chain.n, chain.m)
    if resolve(backend) == "numba":
        bits = _kernels.encode_numba(chain.symbols, chain.m, k, max_bits)
    else:
        bits = _kernels.encode_numpy(chain.symbols, chain.m, k, max_bits)
    return CodedBlob.from_bits(bits, k, chain.m, chain.n)


def decode_fast(blob: CodedBlob, backend: str | None = None, verify: bool = False) -> SymbolChain:
    """Invert :func:`encode_fast`; ``verify`` re-encodes and compares bits."""
    m, k, n = blob.alphabet_size, blob.order, blob.length
    if n < 1:
        raise BadContainer("empty chains are never encoded")
    _coder_tables_ok(m, k)
    bits = np.ascontiguousarray(blob.bit_array)
    backend = resolve(backend)
    if backend == "numba":
        symbols, status = _kernels.decode_numba(bits, n, m, k)
    else:
        symbols, status = _kernels.decode_numpy(bits, n, m, k)
    if status:
        raise CorruptPayload("code value left the coding interval")
    chain = SymbolChain(symbols, m)
    if verify:
        again = encode_fast(chain, k, backend=backend)
        if again.nbits != blob.nbits or again.payload != blob.payload:
            raise CorruptPayload("payload does not re-encode to itself")
    return chain


def codelength(chain, k: int, m: int | None = None, backend: str | None = None) -> int:
    """L(x^n | k): payload bits of the integer coder, header excluded."""
    return encode_fast(chain, k, m=m, backend=backend).nbits


def adaptive_information(chain, k: int, m: int | None = None) -> float:
    """-log2 of the probability the adaptive model assigns to the chain.

    Vectorized: the count seen at step t is the rank of (context, symbol)
    among its earlier occurrences.
    """
    chain = as_chain(chain, m)
    x, m = chain.symbols, chain.m
    n = x.shape[0]
    bits = min(k, n) * math.log2(m)
    if n <= k:
        return bits
    ctx = context_codes(x, m, k)
    sym = x[k:]
    prior_ctx = _prior_occurrences(ctx)
    _, pair = np.unique(np.stack([ctx, sym]), axis=1, return_inverse=True)
    prior_pair = _prior_occurrences(pair.ravel())
    bits += float(np.log2(prior_ctx + m).sum() - np.log2(prior_pair + 1.0).sum())
    return bits


def _prior_occurrences(keys: np.ndarray) -> np.ndarray:
    """For each position, how many earlier positions share its key."""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    starts = np.r_[0, np.flatnonzero(np.diff(sorted_keys)) + 1]
    group_start = np.repeat(starts, np.diff(np.r_[starts, keys.size]))
    rank = np.empty(keys.size, dtype=np.int64)
    rank[order] = np.arange(keys.size) - group_start
    return rank.astype(float)
