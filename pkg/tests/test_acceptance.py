"""One test per acceptance criterion; each records a PASS/FAIL summary line."""

import math
import time

import numpy as np
import pytest

from kpaac import histogram, mmc, paac, quantize
from kpaac.histogram import HistogramGrid
from kpaac.imageio import GrayImage, linearize
from kpaac.mmc import SymbolChain

from oracles import brute_force_partitions


def test_c1_abaa_abab_bit_exact(acceptance):
    paac.encode_reference([0, 1, 0, 0], 1, 2)  # warm imports
    t0 = time.perf_counter()
    a = paac.encode_reference([0, 1, 0, 0], 1, 2)
    b = paac.encode_reference([0, 1, 0, 1], 1, 2)
    dt = time.perf_counter() - t0
    ok = a.bits == "01001" and b.bits == "0110" and dt / 2 < 1e-3
    acceptance("1 abaa/abab bit-exactness", ok, f"abaa={a.bits} abab={b.bits}, {1e3 * dt / 2:.3f} ms/chain")


def test_c2_round_trip_suite(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    failures, worst = [], 0
    for case in range(1000):
        m = int(rng.integers(2, 17))
        k = int(rng.integers(0, 4))
        n = int(rng.integers(1, 201))
        chain = SymbolChain(rng.integers(0, m, n), m)
        ref = paac.encode_reference(chain, k)
        fast = paac.encode_fast(chain, k)
        ok_ref = np.array_equal(paac.decode_reference(ref).symbols, chain.symbols)
        ok_fast = np.array_equal(paac.decode_fast(fast).symbols, chain.symbols)
        gap = abs(fast.nbits - ref.nbits)
        worst = max(worst, gap)
        if not (ok_ref and ok_fast and gap <= 2):
            failures.append(case)
    dt = time.perf_counter() - t0
    acceptance(
        "2 round-trip property suite",
        not failures and dt < 60,
        f"1000 chains, {len(failures)} failures, max |fast-ref|={worst} bits, {dt:.1f} s",
    )


def test_c3_order_selection_replication(acceptance):
    n, kmax, seeds = 25000, 10, range(20)
    bic_hits = ml_over = 0
    worst_gap = 0.0
    for seed in seeds:
        theta = mmc.random_theta(2, 5, 1.0, seed=1000 + seed)
        chain = mmc.sample_mmc(theta, n, seed=seed)
        report = mmc.select_order(chain, kmax, with_paac=True)
        bic_hits += report.chosen_order == 5
        ml_over += report.ml_argmin > 5
        for row in report.rows:
            if row.k <= 7:
                worst_gap = max(worst_gap, abs(row.paac_bits - row.bic_bits) / n)
    ok = bic_hits >= 18 and ml_over >= 15 and worst_gap <= 0.05
    acceptance(
        "3 order-5 MMC replication",
        ok,
        f"BIC=5 in {bic_hits}/20, ML>5 in {ml_over}/20, max |L-BIC|/n (k<=7) = {worst_gap:.4f}",
    )


def test_c4_lossless_endpoints(acceptance):
    rng = np.random.default_rng(4)
    details, ok = [], True
    for rows, cols in [(1, 1), (13, 29), (64, 48)]:
        px = (np.add.outer(np.arange(rows), np.arange(cols)) * 2 + rng.integers(0, 30, (rows, cols))) % 256
        image = GrayImage(px)
        x = linearize(image).symbols
        n = x.size
        for k in (0, 1, 2):
            ok &= quantize.crit_lossless(x, k, quantize.regular_partition(1)) == 8 * n
        p256 = quantize.regular_partition(256)
        ok &= quantize.residual_bits(x, quantize.cell_chain(x, p256), p256) == 0
        for k in (0, 1):
            data = quantize.encode_lossless(image, k)
            back = quantize.decode_lossless(data)
            ok &= back == image and back.pixels.tobytes() == image.pixels.tobytes()
        details.append(f"{rows}x{cols}")
    acceptance("4 lossless endpoints", ok, "crit(m=1)=8n, residual(m=256)=0, round trip on " + ", ".join(details))


@pytest.fixture(scope="module")
def lena_sweep(lena):
    x = linearize(lena).symbols
    return quantize.lossless_sweep(x, [0, 1], range(1, 257))


def test_c5a_lena_lossless_order1(lena_sweep, acceptance):
    best = lena_sweep.best(1)
    ok = 35 <= best.m <= 70 and abs(best.rate_bpp - 5.4) <= 0.4
    acceptance("5a Lena 1-PAAC lossless minimum", ok, f"m={best.m}, {best.rate_bpp:.3f} bpp (band m in [35,70], 5.4+-0.4)")


def test_c5b_lena_lossless_order0(lena_sweep, acceptance):
    best = lena_sweep.best(0)
    ok = 150 <= best.m <= 256 and abs(best.rate_bpp - 7.0) <= 0.4
    acceptance("5b Lena 0-PAAC lossless minimum", ok, f"m={best.m}, {best.rate_bpp:.3f} bpp (band m in [150,256], 7.0+-0.4)")


@pytest.fixture(scope="module")
def lena_rd(lena):
    return quantize.rate_distortion_sweep(lena, [0, 1], [3, 13])


def test_c5c_lena_lossy_m3(lena_rd, acceptance):
    r1 = lena_rd.row(3, 1)
    ok = abs(r1.psnr_db - 22.11) <= 0.5 and abs(r1.rate_bpp - 0.43) <= 0.15
    acceptance("5c Lena lossy m=3", ok, f"PSNR {r1.psnr_db:.2f} dB, 1-PAAC {r1.rate_bpp:.3f} bpp")


def test_c5d_lena_lossy_m13(lena_rd, acceptance):
    r0, r1 = lena_rd.row(13, 0), lena_rd.row(13, 1)
    ok = (
        abs(r1.psnr_db - 33.15) <= 0.5
        and abs(r1.rate_bpp - 1.39) <= 0.3
        and abs(r0.rate_bpp - 3.18) <= 0.3
    )
    acceptance(
        "5d Lena lossy m=13",
        ok,
        f"PSNR {r1.psnr_db:.2f} dB, 1-PAAC {r1.rate_bpp:.3f} bpp, 0-PAAC {r0.rate_bpp:.3f} bpp",
    )


def test_c6_histogram_dp_vs_brute_force(acceptance):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        R = int(rng.integers(1, 13))
        n = int(rng.integers(1, 101))
        kind = rng.integers(0, 3)
        if kind == 0:
            sample = rng.random(n)
        elif kind == 1:
            sample = rng.beta(0.5, 3.0, n)
        else:
            sample = np.round(rng.random(n) * R) / R  # many points on cut positions
        grid = HistogramGrid(0.0, 1.0, R, sample)
        part = histogram.dp_select(grid)
        cuts, crit = brute_force_partitions(grid, histogram.crit_histogram, histogram.TIE_RTOL)
        mismatches += part.cuts != cuts or part.criterion != crit
    dt = time.perf_counter() - t0
    acceptance("6 histogram DP = exhaustive", mismatches == 0 and dt < 60, f"200 samples, {mismatches} mismatches, {dt:.1f} s")


def test_c7_histogram_complexity(acceptance):
    R, n = 200, 2000
    grid = HistogramGrid(-5.0, 5.0, R, histogram.sample_laplace(1.0, n, seed=7))
    histogram.dp_select(grid)  # JIT warm-up
    t0 = time.perf_counter()
    part = histogram.dp_select(grid)
    dt = time.perf_counter() - t0
    widths = part.lengths
    centre = np.abs((part.edges[:-1] + part.edges[1:]) / 2)
    near_mode = widths[centre <= 1.0].min()
    tail = widths[centre >= 2.5].max()
    ok = part.evaluations <= R * (R + 1) // 2 and dt < 1.0 and near_mode < tail
    acceptance(
        "7 histogram complexity",
        ok,
        f"{part.evaluations} evaluations (<= {R * (R + 1) // 2}), {1e3 * dt:.1f} ms, "
        f"{part.m} intervals, min width near mode {near_mode:.2f} < max tail width {tail:.2f}",
    )


def test_c8_constant_chain_codelength(acceptance):
    bad = [n for n in range(1, 101)
           if paac.encode_reference([0] * n, 0, 2).nbits != math.ceil(math.log2(n + 1))]
    acceptance("8 constant-chain codelength", not bad, f"n=1..100, mismatches at {bad}")
