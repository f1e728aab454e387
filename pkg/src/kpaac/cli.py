"""Command-line front end.

Every sweep writes CSV (to ``--csv`` or stdout); human-readable summaries go
to stderr. Exit status is 0 on success, 1 on any handled error.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import histogram, imageio, mmc, paac, quantize
from .errors import KpaacError
from .mmc import SymbolChain


def parse_int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def parse_range(text: str) -> tuple[int, int]:
    mt = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not mt:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    lo, hi = int(mt.group(1)), int(mt.group(2))
    if lo > hi:
        raise argparse.ArgumentTypeError("range start exceeds its end")
    return lo, hi


def parse_interval(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a,b got {text!r}") from exc
    return a, b


def read_chain(path: Path, m: int | None) -> SymbolChain:
    """Whitespace/comma separated integers, or a single word of letters a, b, ..."""
    text = path.read_text()
    tokens = [t for t in re.split(r"[\s,]+", text) if t]
    if len(tokens) == 1 and tokens[0].isalpha():
        word = tokens[0].lower()
        return SymbolChain.of((ord(ch) - ord("a") for ch in word), m)
    try:
        return SymbolChain.of((int(t) for t in tokens), m)
    except ValueError as exc:
        raise KpaacError(f"{path}: chain files hold integers or a single letter word") from exc


def write_chain(chain: SymbolChain, path: Path) -> None:
    path.write_text(" ".join(str(int(s)) for s in chain.symbols) + "\n")


def emit_csv(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def info(msg: str) -> None:
    print(msg, file=sys.stderr)


def m_values(args, default: tuple[int, int] = (1, 256)) -> list[int]:
    if args.m is not None:
        return parse_int_list(args.m)
    lo, hi = args.m_range or default
    return list(range(lo, hi + 1))


# --------------------------------------------------------------------------


def cmd_encode(args) -> int:
    data = args.input.read_bytes()
    if data[:2] in (b"P5", b"P2"):
        image = imageio.read_pgm(data)
        k = 1 if args.order is None else parse_int_list(args.order)[0]
        partition = None if args.m is None else quantize.regular_partition(parse_int_list(args.m)[0])
        out = quantize.encode_lossless(image, k, partition, args.scan)
        args.output.write_bytes(out)
        info(f"{image.rows}x{image.cols} image -> {len(out)} bytes "
             f"({8 * len(out) / image.n:.4f} bpp including headers)")
        return 0
    m = None if args.m is None else parse_int_list(args.m)[0]
    chain = read_chain(args.input, m)
    k = 0 if args.order is None else parse_int_list(args.order)[0]
    blob = paac.encode_reference(chain, k) if args.reference else paac.encode_fast(chain, k)
    args.output.write_bytes(blob.to_bytes())
    shown = blob.bits if blob.nbits <= 64 else f"{blob.bits[:64]}..."
    info(f"n={chain.n} m={chain.m} k={k}: {blob.nbits} payload bits {shown}")
    return 0


def cmd_decode(args) -> int:
    data = args.input.read_bytes()
    if data[:4] == quantize.IMAGE_MAGIC:
        image = quantize.decode_lossless(data)
        args.output.write_bytes(imageio.write_pgm(image))
        return 0
    blob = paac.CodedBlob.from_bytes(data)
    chain = paac.decode_reference(blob) if args.reference else paac.decode_fast(blob)
    write_chain(chain, args.output)
    return 0


def cmd_gen_mmc(args) -> int:
    k = 5 if args.order is None else parse_int_list(args.order)[0]
    m = 2 if args.m is None else parse_int_list(args.m)[0]
    theta = mmc.random_theta(m, k, args.concentration, seed=args.seed)
    chain = mmc.sample_mmc(theta, args.length, seed=args.seed)
    write_chain(chain, args.output)
    info(f"wrote order-{k} chain, m={m}, n={chain.n}")
    return 0


def cmd_order_select(args) -> int:
    if args.input is not None:
        m = None if args.m is None else parse_int_list(args.m)[0]
        chain = read_chain(args.input, m)
    else:
        k = 5 if args.order is None else parse_int_list(args.order)[0]
        m = 2 if args.m is None else parse_int_list(args.m)[0]
        theta = mmc.random_theta(m, k, args.concentration, seed=args.seed)
        chain = mmc.sample_mmc(theta, args.length, seed=args.seed)
    report = mmc.select_order(chain, args.kmax, args.penalty, with_paac=not args.no_paac)
    emit_csv(report.to_csv(), args.csv)
    weak = [r.k for r in report.rows if r.alpha_warning]
    if weak:
        info(f"warning: alpha < {mmc.ALPHA_MIN:g} for k in {weak}")
    info(f"ML minimum at k={report.ml_argmin}")
    print(f"chosen order: {report.chosen_order}", file=sys.stderr if args.csv is None else sys.stdout)
    return 0


def _orders(args, default: str) -> list[int]:
    return parse_int_list(args.order or default)


def cmd_lossless_sweep(args) -> int:
    image = imageio.load_pgm(args.input)
    x = imageio.linearize(image, args.scan)
    sweep = quantize.lossless_sweep(x, _orders(args, "0,1"), m_values(args), args.penalty)
    emit_csv(sweep.to_csv(), args.csv)
    for k in sweep.orders:
        best = sweep.best(k)
        info(f"k={k}: minimum at m={best.m}, {best.rate_bpp:.4f} bpp")
    return 0


def cmd_lossy_sweep(args) -> int:
    image = imageio.load_pgm(args.input)
    sweep = quantize.rate_distortion_sweep(
        image, _orders(args, "0,1"), m_values(args), args.scan, args.penalty
    )
    emit_csv(sweep.to_csv(), args.csv)
    return 0


def cmd_histogram(args) -> int:
    a, b = args.range
    if args.input is not None:
        sample = histogram.load_sample(args.input)
    else:
        sample = histogram.sample_laplace(args.scale, args.length, seed=args.seed, a=a, b=b)
    grid = histogram.HistogramGrid(a, b, args.grid, sample)
    part = histogram.dp_select(grid)
    emit_csv(part.to_csv(), args.csv)
    info(f"{part.m} intervals, criterion {part.criterion:.6g} bits, "
         f"{part.evaluations} interval evaluations")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kpaac", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        return sp

    def common(sp, *, order=True, m=True, scan=False, penalty=False, csv=False, seed=False):
        if order:
            sp.add_argument("-k", "--order", help="coding order, or a list such as 0,1,2")
        if m:
            sp.add_argument("--m", help="alphabet size / partition size (list allowed in sweeps)")
        if scan:
            sp.add_argument("--scan", choices=imageio.SCANS, default="zigzag")
        if penalty:
            sp.add_argument("--penalty", choices=mmc.PENALTY_MODES, default="full")
        if csv:
            sp.add_argument("--csv", type=Path, help="CSV output path (default stdout)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = add("encode", cmd_encode, "PGM -> lossless container, or chain file -> PAC1 blob")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--output", type=Path, required=True)
    sp.add_argument("--reference", action="store_true", help="exact-rational coder (small chains)")
    common(sp, scan=True)

    sp = add("decode", cmd_decode, "invert encode")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--output", type=Path, required=True)
    sp.add_argument("--reference", action="store_true")

    sp = add("gen-mmc", cmd_gen_mmc, "sample a chain from a random order-k Markov model")
    sp.add_argument("--output", type=Path, required=True)
    sp.add_argument("--length", type=int, default=25000)
    sp.add_argument("--concentration", type=float, default=1.0)
    common(sp, seed=True)

    sp = add("order-select", cmd_order_select, "BIC / ML / PAAC codelengths per order")
    sp.add_argument("--input", type=Path, help="chain file; omitted -> generate one")
    sp.add_argument("--kmax", type=int, default=10)
    sp.add_argument("--length", type=int, default=25000)
    sp.add_argument("--concentration", type=float, default=1.0)
    sp.add_argument("--no-paac", action="store_true", help="skip running the coder")
    common(sp, penalty=True, csv=True, seed=True)

    for name, func, help_ in (
        ("lossless-sweep", cmd_lossless_sweep, "two-part criterion over regular partitions"),
        ("lossy-sweep", cmd_lossy_sweep, "BIC rate and PSNR of barycenter quantization"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--input", type=Path, required=True)
        sp.add_argument("--m-range", type=parse_range, help="A..B (default 1..256)")
        common(sp, scan=True, penalty=True, csv=True)

    sp = add("histogram", cmd_histogram, "MDL histogram by dynamic programming")
    sp.add_argument("--input", type=Path, help="sample file; omitted -> Laplace sample")
    sp.add_argument("--grid", type=int, default=200, help="number R of elementary cells")
    sp.add_argument("--range", type=parse_interval, default=(-5.0, 5.0), help="a,b")
    sp.add_argument("--length", type=int, default=2000)
    sp.add_argument("--scale", type=float, default=1.0)
    common(sp, order=False, m=False, csv=True, seed=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KpaacError, ValueError, OSError) as exc:
        print(f"kpaac {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
