"""Hot inner loops, each in a numba flavour and a numpy flavour.

The two flavours of every kernel must produce identical outputs; the test
suite runs both. The numpy flavours keep the sequential structure (coding is
inherently serial) but push per-step work onto array calls.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

# Finite-precision coder registers: 62-bit window, int64-safe products.
PRECISION = 62
TOP = (1 << PRECISION) - 1
HALF = 1 << (PRECISION - 1)
QUARTER = 1 << (PRECISION - 2)
THREE_QUARTERS = HALF + QUARTER


def max_code_bits(n: int, m: int) -> int:
    """Upper bound on the bits the integer coder can emit for n symbols."""
    per_symbol = math.ceil(math.log2(n + m)) + 1 if n else 0
    return n * per_symbol + PRECISION + 8


# --------------------------------------------------------------------------
# Markov chain sampling


@njit
def sample_chain_numba(cum, head, u, m, k):
    n = head.shape[0] + u.shape[0]
    out = np.empty(n, dtype=np.int64)
    nctx = m**k
    ctx = 0
    for t in range(head.shape[0]):
        out[t] = head[t]
        ctx = (ctx * m + head[t]) % nctx
    for t in range(u.shape[0]):
        row = cum[ctx]
        s = 0
        while s < m - 1 and not (u[t] < row[s]):
            s += 1
        out[head.shape[0] + t] = s
        ctx = (ctx * m + s) % nctx
    return out


def sample_chain_numpy(cum, head, u, m, k):
    n = head.shape[0] + u.shape[0]
    out = np.empty(n, dtype=np.int64)
    out[: head.shape[0]] = head
    nctx = m**k
    ctx = 0
    for s in head:
        ctx = (ctx * m + int(s)) % nctx
    base = head.shape[0]
    for t in range(u.shape[0]):
        s = min(int(np.searchsorted(cum[ctx], u[t], side="right")), m - 1)
        out[base + t] = s
        ctx = (ctx * m + s) % nctx
    return out


# --------------------------------------------------------------------------
# Integer arithmetic coder (carry-free, pending-bit "straddle" counting)


@njit
def encode_numba(symbols, m, k, max_bits):
    n = symbols.shape[0]
    nctx = m**k
    counts = np.zeros((nctx, m), dtype=np.int64)
    totals = np.zeros(nctx, dtype=np.int64)
    out = np.zeros(max_bits, dtype=np.uint8)
    nout = 0
    pending = 0
    low = 0
    high = TOP
    ctx = 0
    for t in range(n):
        s = symbols[t]
        if t < k:
            total = m
            cum_lo = s
            freq = 1
        else:
            cum_lo = s
            for i in range(s):
                cum_lo += counts[ctx, i]
            freq = counts[ctx, s] + 1
            total = totals[ctx] + m
        r = (high - low + 1) // total
        if s != m - 1:
            high = low + r * (cum_lo + freq) - 1
        low = low + r * cum_lo
        if t >= k:
            counts[ctx, s] += 1
            totals[ctx] += 1
        if k > 0:
            ctx = (ctx * m + s) % nctx
        while True:
            if high < HALF:
                out[nout] = 0
                nout += 1
                for _ in range(pending):
                    out[nout] = 1
                    nout += 1
                pending = 0
            elif low >= HALF:
                out[nout] = 1
                nout += 1
                for _ in range(pending):
                    out[nout] = 0
                    nout += 1
                pending = 0
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low = 2 * low
            high = 2 * high + 1
    # Termination: shortest grid point of the current window's scale.
    width = high - low + 1
    f = 0
    while (width >> (f + 1)) > 0:
        f += 1
    nb = PRECISION - f
    if nb == 0 and pending > 0:
        nb = 1
    step = 1 << (PRECISION - nb)
    v = ((low + step - 1) // step) * step
    for i in range(nb):
        b = (v >> (PRECISION - 1 - i)) & 1
        out[nout] = b
        nout += 1
        if i == 0:
            for _ in range(pending):
                out[nout] = 1 - b
                nout += 1
            pending = 0
    return out[:nout].copy()


def encode_numpy(symbols, m, k, max_bits):
    n = int(symbols.shape[0])
    nctx = m**k
    counts = np.zeros((nctx, m), dtype=np.int64)
    totals = np.zeros(nctx, dtype=np.int64)
    out: list[int] = []
    pending = 0
    low, high = 0, TOP
    ctx = 0
    for t in range(n):
        s = int(symbols[t])
        if t < k:
            total, cum_lo, freq = m, s, 1
        else:
            row = counts[ctx]
            cum_lo = int(row[:s].sum()) + s
            freq = int(row[s]) + 1
            total = int(totals[ctx]) + m
            row[s] += 1
            totals[ctx] += 1
        r = (high - low + 1) // total
        if s != m - 1:
            high = low + r * (cum_lo + freq) - 1
        low = low + r * cum_lo
        if k > 0:
            ctx = (ctx * m + s) % nctx
        while True:
            if high < HALF:
                out.append(0)
                out.extend([1] * pending)
                pending = 0
            elif low >= HALF:
                out.append(1)
                out.extend([0] * pending)
                pending = 0
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low = 2 * low
            high = 2 * high + 1
    width = high - low + 1
    nb = PRECISION - (width.bit_length() - 1)
    if nb == 0 and pending > 0:
        nb = 1
    step = 1 << (PRECISION - nb)
    v = -(-low // step) * step
    for i in range(nb):
        b = (v >> (PRECISION - 1 - i)) & 1
        out.append(b)
        if i == 0:
            out.extend([1 - b] * pending)
            pending = 0
    if len(out) > max_bits:
        raise AssertionError("bit bound exceeded")
    return np.array(out, dtype=np.uint8)


@njit
def decode_numba(bits, n, m, k):
    """Returns (symbols, status); status 0 ok, 1 inconsistent payload."""
    nbits = bits.shape[0]
    nctx = m**k
    counts = np.zeros((nctx, m), dtype=np.int64)
    totals = np.zeros(nctx, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    value = 0
    pos = 0
    for _ in range(PRECISION):
        b = 0
        if pos < nbits:
            b = bits[pos]
        value = 2 * value + b
        pos += 1
    low = 0
    high = TOP
    ctx = 0
    for t in range(n):
        if value < low or value > high:
            return out, 1
        if t < k:
            total = m
        else:
            total = totals[ctx] + m
        r = (high - low + 1) // total
        q = (value - low) // r
        if q >= total:
            q = total - 1
        if t < k:
            s = q
            cum_lo = q
            freq = 1
        else:
            s = 0
            cum_lo = 0
            while True:
                c = counts[ctx, s] + 1
                if cum_lo + c > q or s == m - 1:
                    break
                cum_lo += c
                s += 1
            freq = counts[ctx, s] + 1
        out[t] = s
        if s != m - 1:
            high = low + r * (cum_lo + freq) - 1
        low = low + r * cum_lo
        if t >= k:
            counts[ctx, s] += 1
            totals[ctx] += 1
        if k > 0:
            ctx = (ctx * m + s) % nctx
        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                low -= HALF
                high -= HALF
                value -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                low -= QUARTER
                high -= QUARTER
                value -= QUARTER
            else:
                break
            low = 2 * low
            high = 2 * high + 1
            b = 0
            if pos < nbits:
                b = bits[pos]
            value = 2 * value + b
            pos += 1
    return out, 0


def decode_numpy(bits, n, m, k):
    nbits = int(bits.shape[0])
    nctx = m**k
    counts = np.zeros((nctx, m), dtype=np.int64)
    totals = np.zeros(nctx, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    head = bits[:PRECISION].astype(np.int64)
    value = 0
    for b in head:
        value = 2 * value + int(b)
    value <<= PRECISION - head.shape[0]
    pos = PRECISION
    low, high = 0, TOP
    ctx = 0
    for t in range(n):
        if value < low or value > high:
            return out, 1
        total = m if t < k else int(totals[ctx]) + m
        r = (high - low + 1) // total
        q = min((value - low) // r, total - 1)
        if t < k:
            s, cum_lo, freq = q, q, 1
        else:
            row = counts[ctx]
            cum = np.cumsum(row + 1)
            s = min(int(np.searchsorted(cum, q, side="right")), m - 1)
            freq = int(row[s]) + 1
            cum_lo = int(cum[s]) - freq
            row[s] += 1
            totals[ctx] += 1
        out[t] = s
        if s != m - 1:
            high = low + r * (cum_lo + freq) - 1
        low = low + r * cum_lo
        if k > 0:
            ctx = (ctx * m + s) % nctx
        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                low -= HALF
                high -= HALF
                value -= HALF
            elif low >= QUARTER and high < THREE_QUARTERS:
                low -= QUARTER
                high -= QUARTER
                value -= QUARTER
            else:
                break
            low = 2 * low
            high = 2 * high + 1
            value = 2 * value + (int(bits[pos]) if pos < nbits else 0)
            pos += 1
    return out, 0


# --------------------------------------------------------------------------
# Histogram shortest-path DP over grid cuts


@njit
def _path_before(prev, end, buf):
    """Write the cut path from 0 to ``end`` (exclusive of 0) into buf; return its length."""
    length = 0
    node = end
    while node > 0:
        buf[length] = node
        length += 1
        node = prev[node]
    # reverse in place
    for i in range(length // 2):
        tmp = buf[i]
        buf[i] = buf[length - 1 - i]
        buf[length - 1 - i] = tmp
    return length


@njit
def histogram_dp_numba(prefix, n, width, rtol):
    """prefix: cumulative cell counts (length R+1); width: (b-a)/R.

    Returns (best, cnt, prev, evaluations): best[t] is the optimal sum of
    per-interval costs over [0, t], cnt[t] its interval count, prev[t] the
    previous cut.
    """
    R = prefix.shape[0] - 1
    half_log_n = 0.5 * np.log2(n)
    best = np.full(R + 1, np.inf)
    cnt = np.zeros(R + 1, dtype=np.int64)
    prev = np.full(R + 1, -1, dtype=np.int64)
    best[0] = 0.0
    cand = np.empty(R + 1)
    buf1 = np.zeros(R + 1, dtype=np.int64)
    buf2 = np.zeros(R + 1, dtype=np.int64)
    evals = 0
    for b in range(1, R + 1):
        lowest = np.inf
        for a in range(b):
            nj = prefix[b] - prefix[a]
            evals += 1
            like = 0.0
            if nj > 0:
                like = -nj * np.log2(nj / (n * ((b - a) * width)))
            cand[a] = best[a] + (half_log_n + like)
            if cand[a] < lowest:
                lowest = cand[a]
        tol = rtol * max(1.0, abs(lowest))
        pick = -1
        for a in range(b):
            if cand[a] > lowest + tol:
                continue
            if pick < 0 or cnt[a] < cnt[pick]:
                pick = a
            elif cnt[a] == cnt[pick]:
                l1 = _path_before(prev, a, buf1)
                _path_before(prev, pick, buf2)
                for i in range(l1):
                    if buf1[i] != buf2[i]:
                        if buf1[i] < buf2[i]:
                            pick = a
                        break
        best[b] = cand[pick]
        cnt[b] = cnt[pick] + 1
        prev[b] = pick
    return best, cnt, prev, evals


def histogram_dp_numpy(prefix, n, width, rtol):
    R = prefix.shape[0] - 1
    half_log_n = 0.5 * np.log2(n)
    best = np.full(R + 1, np.inf)
    cnt = np.zeros(R + 1, dtype=np.int64)
    prev = np.full(R + 1, -1, dtype=np.int64)
    best[0] = 0.0
    evals = 0

    def path(end):
        out = []
        while end > 0:
            out.append(end)
            end = int(prev[end])
        return out[::-1]

    for b in range(1, R + 1):
        a = np.arange(b)
        nj = prefix[b] - prefix[:b]
        evals += b
        with np.errstate(divide="ignore", invalid="ignore"):
            like = np.where(nj > 0, -nj * np.log2(nj / (n * ((b - a) * width))), 0.0)
        cand = best[:b] + (half_log_n + like)
        lowest = cand.min()
        tol = rtol * max(1.0, abs(lowest))
        ties = np.flatnonzero(cand <= lowest + tol)
        ties = ties[cnt[ties] == cnt[ties].min()]
        pick = int(ties[0])
        if ties.size > 1:
            pick = min((int(t) for t in ties), key=path)
        best[b] = cand[pick]
        cnt[b] = cnt[pick] + 1
        prev[b] = pick
    return best, cnt, prev, evals
