"""Multiple Markov chains over a finite alphabet {0, ..., m-1}.

Transition counting, maximum-likelihood fits, BIC order selection and
seeded simulation. All codelengths are in bits (base-2 logs) with the
convention 0 * log 0 = 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from ._accel import resolve
from .errors import ModelTooLarge

# Context codes are int64; m**k must stay below this.
MAX_CONTEXT_CODE = 1 << 62
# Largest dense (m**k, m) table we are willing to allocate.
MAX_DENSE_ENTRIES = 1 << 24
ALPHA_MIN = 20.0

PENALTY_MODES = ("full", "effective")


@dataclass(frozen=True)
class SymbolChain:
    """A finite sequence of symbols in ``[0, alphabet_size)``."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        arr = np.asarray(self.symbols)
        if arr.ndim != 1:
            raise ValueError("symbols must be one-dimensional")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("symbols must be integers")
        arr = np.array(arr, dtype=np.int64)
        arr.setflags(write=False)
        m = int(self.alphabet_size)
        if m < 1:
            raise ValueError("alphabet_size must be positive")
        if arr.size and (arr.min() < 0 or arr.max() >= m):
            raise ValueError(f"symbols must lie in [0, {m - 1}]")
        object.__setattr__(self, "symbols", arr)
        object.__setattr__(self, "alphabet_size", m)

    @classmethod
    def of(cls, symbols: Iterable[int], m: int | None = None) -> "SymbolChain":
        """Build a chain, inferring ``m = max(symbol) + 1`` (at least 2) if omitted."""
        arr = np.fromiter((int(s) for s in symbols), dtype=np.int64)
        if m is None:
            m = max(2, int(arr.max()) + 1) if arr.size else 2
        return cls(arr, m)

    def __len__(self) -> int:
        return int(self.symbols.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    @property
    def m(self) -> int:
        return self.alphabet_size


def as_chain(chain, m: int | None = None) -> SymbolChain:
    if isinstance(chain, SymbolChain):
        if m is not None and m != chain.m:
            return SymbolChain(chain.symbols, m)
        return chain
    return SymbolChain.of(chain, m)


def check_model_size(m: int, k: int) -> int:
    """Return ``m**k`` or raise :class:`ModelTooLarge`."""
    if k < 0:
        raise ValueError("order k must be non-negative")
    if m >= 2 and k * math.log2(m) >= 62:
        raise ModelTooLarge(f"m**k = {m}**{k} exceeds the 2**62 context bound")
    return m**k


def context_codes(symbols: np.ndarray, m: int, k: int) -> np.ndarray:
    """Integer code of the length-k context preceding each position t >= k.

    The most recent symbol is the least significant digit.
    """
    check_model_size(m, k)
    n = symbols.shape[0]
    if n <= k:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros(n - k, dtype=np.int64)
    for i in range(k):
        codes = codes * m + symbols[i : n - k + i]
    return codes


def encode_context(context: Sequence[int], m: int) -> int:
    code = 0
    for s in context:
        code = code * m + int(s)
    return code


@dataclass(frozen=True)
class TransitionCounts:
    """Sparse order-k transition counts.

    ``contexts`` holds the sorted codes of observed contexts and ``table`` the
    per-context symbol counts n(i|j). For k = 0 there is always exactly one
    (empty) context.
    """

    order: int
    alphabet_size: int
    contexts: np.ndarray
    table: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def n_transitions(self) -> int:
        return int(self.table.sum())

    def _row(self, context: Sequence[int]) -> int | None:
        if len(context) != self.order:
            raise ValueError(f"context must have length {self.order}")
        code = encode_context(context, self.alphabet_size)
        pos = int(np.searchsorted(self.contexts, code))
        if pos < self.contexts.size and self.contexts[pos] == code:
            return pos
        return None

    def count(self, symbol: int, context: Sequence[int] = ()) -> int:
        """n(symbol | context)."""
        row = self._row(context)
        return 0 if row is None else int(self.table[row, symbol])

    def context_total(self, context: Sequence[int] = ()) -> int:
        """n(context), counting only occurrences that have a successor."""
        row = self._row(context)
        return 0 if row is None else int(self.table[row].sum())

    def dense(self) -> np.ndarray:
        m, k = self.alphabet_size, self.order
        nctx = check_model_size(m, k)
        if nctx * m > MAX_DENSE_ENTRIES:
            raise ModelTooLarge(f"dense table of {nctx}x{m} entries is too large")
        out = np.zeros((nctx, m), dtype=np.int64)
        out[self.contexts] = self.table
        return out


def count_transitions(chain: SymbolChain, k: int) -> TransitionCounts:
    chain = as_chain(chain)
    m = chain.m
    x = chain.symbols
    if k == 0:
        row = np.bincount(x, minlength=m).astype(np.int64).reshape(1, m)
        return TransitionCounts(0, m, np.zeros(1, dtype=np.int64), row)
    codes = context_codes(x, m, k)
    if codes.size == 0:
        return TransitionCounts(
            k, m, np.zeros(0, dtype=np.int64), np.zeros((0, m), dtype=np.int64)
        )
    contexts, inverse = np.unique(codes, return_inverse=True)
    flat = np.bincount(inverse * m + x[k:], minlength=contexts.size * m)
    return TransitionCounts(k, m, contexts, flat.reshape(contexts.size, m).astype(np.int64))


@dataclass(frozen=True)
class ThetaParam:
    """Dense order-k transition probabilities; undefined rows are NaN."""

    order: int
    alphabet_size: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        nctx = check_model_size(self.alphabet_size, self.order)
        if p.shape != (nctx, self.alphabet_size):
            raise ValueError(f"probs must have shape {(nctx, self.alphabet_size)}")
        object.__setattr__(self, "probs", p)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.probs).any(axis=1)

    def row(self, context: Sequence[int] = ()) -> np.ndarray:
        return self.probs[encode_context(context, self.alphabet_size)]


def ml_estimate(counts: TransitionCounts) -> ThetaParam:
    dense = counts.dense().astype(float)
    totals = dense.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(totals > 0, dense / totals, np.nan)
    return ThetaParam(counts.order, counts.alphabet_size, probs)


def _ml_bits_from_counts(counts: TransitionCounts) -> float:
    table = counts.table
    totals = table.sum(axis=1, keepdims=True)
    nz = table > 0
    if not nz.any():
        return 0.0
    num = table[nz].astype(float)
    den = np.broadcast_to(totals, table.shape)[nz].astype(float)
    return float(-(num * np.log2(num / den)).sum())


def ml_codelength(chain: SymbolChain, k: int) -> float:
    """-log2 P(x^n | ML fit of order k), charging log2 m per warm-up symbol."""
    chain = as_chain(chain)
    if chain.n < 1:
        raise ValueError("ml_codelength needs a non-empty chain")
    counts = count_transitions(chain, k)
    return min(k, chain.n) * math.log2(chain.m) + _ml_bits_from_counts(counts)


def free_parameters(counts: TransitionCounts, penalty_mode: str = "full") -> float:
    m, k = counts.alphabet_size, counts.order
    if penalty_mode == "full":
        return float((m - 1) * check_model_size(m, k))
    if penalty_mode == "effective":
        distinct = (counts.table > 0).sum(axis=1)
        return float(np.maximum(distinct - 1, 0).sum())
    raise ValueError(f"penalty_mode must be one of {PENALTY_MODES}")


def bic_from_counts(counts: TransitionCounts, n: int, penalty_mode: str = "full") -> float:
    """BIC in bits from precomputed counts of a length-n chain."""
    if n < 1:
        raise ValueError("BIC needs n >= 1")
    ml = min(counts.order, n) * math.log2(counts.alphabet_size) + _ml_bits_from_counts(counts)
    return ml + 0.5 * free_parameters(counts, penalty_mode) * math.log2(n)


def bic(chain: SymbolChain, k: int, penalty_mode: str = "full") -> float:
    chain = as_chain(chain)
    if chain.n < 1:
        raise ValueError("BIC needs a non-empty chain")
    return bic_from_counts(count_transitions(chain, k), chain.n, penalty_mode)


def alpha_ratio(n: int, m: int, k: int) -> float:
    """Observations per free parameter, n / ((m-1) m^k)."""
    params = (m - 1) * m**k
    return math.inf if params == 0 else n / params


@dataclass(frozen=True)
class OrderRow:
    k: int
    ml_bits: float
    bic_bits: float
    paac_bits: float | None
    alpha: float

    @property
    def alpha_warning(self) -> bool:
        return self.alpha < ALPHA_MIN


@dataclass(frozen=True)
class OrderSelectionReport:
    n: int
    alphabet_size: int
    penalty_mode: str
    rows: tuple[OrderRow, ...] = field(default_factory=tuple)

    @property
    def chosen_order(self) -> int:
        # min() returns the first minimum, i.e. the smallest k on ties.
        return min(self.rows, key=lambda r: r.bic_bits).k

    @property
    def ml_argmin(self) -> int:
        return min(self.rows, key=lambda r: r.ml_bits).k

    @property
    def paac_argmin(self) -> int | None:
        rows = [r for r in self.rows if r.paac_bits is not None]
        return min(rows, key=lambda r: r.paac_bits).k if rows else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["k", "ml_bits", "bic_bits", "paac_bits", "alpha", "chosen",
             "ml_rate", "bic_rate", "paac_rate"]
        )
        chosen = self.chosen_order
        n = self.n
        for r in self.rows:
            paac = "" if r.paac_bits is None else fmt(r.paac_bits)
            paac_rate = "" if r.paac_bits is None else fmt(r.paac_bits / n)
            w.writerow(
                [r.k, fmt(r.ml_bits), fmt(r.bic_bits), paac, fmt(r.alpha),
                 int(r.k == chosen), fmt(r.ml_bits / n), fmt(r.bic_bits / n), paac_rate]
            )
        return buf.getvalue()


def fmt(value: float) -> str:
    """Six significant digits, the CSV convention used throughout."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6g}"


def select_order(
    chain: SymbolChain,
    k_max: int,
    penalty_mode: str = "full",
    with_paac: bool = False,
    backend: str | None = None,
) -> OrderSelectionReport:
    """Evaluate BIC for k = 0..k_max and pick the minimizer.

    Orders beyond n - 1 are dropped since no transition can be observed.
    ``with_paac`` also runs the adaptive coder at every order.
    """
    from .paac import codelength

    chain = as_chain(chain)
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if chain.n < 1:
        raise ValueError("select_order needs a non-empty chain")
    n, m = chain.n, chain.m
    rows = []
    for k in range(min(k_max, n - 1) + 1):
        counts = count_transitions(chain, k)
        ml = min(k, n) * math.log2(m) + _ml_bits_from_counts(counts)
        b = ml + 0.5 * free_parameters(counts, penalty_mode) * math.log2(n)
        paac = float(codelength(chain, k, backend=backend)) if with_paac else None
        rows.append(OrderRow(k, ml, b, paac, alpha_ratio(n, m, k)))
    return OrderSelectionReport(n, m, penalty_mode, tuple(rows))


def random_theta(m: int, k: int, concentration: float = 1.0, seed: int | None = 0) -> ThetaParam:
    """Rows drawn from a symmetric Dirichlet(concentration)."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    nctx = check_model_size(m, k)
    if nctx * m > MAX_DENSE_ENTRIES:
        raise ModelTooLarge("theta table too large")
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.full(m, float(concentration)), size=nctx)
    probs /= probs.sum(axis=1, keepdims=True)
    return ThetaParam(k, m, probs)


def sample_mmc(theta: ThetaParam, n: int, seed: int | None = 0, backend: str | None = None) -> SymbolChain:
    """Draw a chain: k uniform initial symbols, then theta(. | context) steps."""
    if n < 0:
        raise ValueError("n must be non-negative")
    probs = theta.probs
    if np.isnan(probs).any():
        raise ValueError("theta must be defined for every context")
    if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("theta rows must be non-negative and sum to 1")
    m, k = theta.alphabet_size, theta.order
    rng = np.random.default_rng(seed)
    head = rng.integers(0, m, size=min(k, n)).astype(np.int64)
    u = rng.random(max(n - k, 0))
    cum = np.cumsum(probs, axis=1)
    if resolve(backend) == "numba":
        out = _kernels.sample_chain_numba(cum, head, u, m, k)
    else:
        out = _kernels.sample_chain_numpy(cum, head, u, m, k)
    return SymbolChain(out, m)
