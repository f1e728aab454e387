"""Fetch the classic 512x512 Lena test image into tests/data/lena.pgm.

The image shipped inside SciPy up to 0.16 as ``scipy/misc/lena.dat`` (a
pickled uint8 array). This script downloads one such wheel from the package
index, pulls that member out and writes a binary PGM. The image is not
redistributed with this repository.

    python scripts/fetch_lena.py [--index URL] [--output PATH]
"""

from __future__ import annotations

import argparse
import io
import os
import pickle
import re
import urllib.parse
import urllib.request
import zipfile
from pathlib import Path

import numpy as np

WHEEL = re.compile(r'href="([^"]*scipy-0\.16\.1-cp35-cp35m-manylinux1_x86_64\.whl)[^"]*"')
MEMBER = "scipy/misc/lena.dat"


def find_wheel(index: str) -> str:
    page = urllib.parse.urljoin(index.rstrip("/") + "/", "scipy/")
    with urllib.request.urlopen(page, timeout=60) as resp:
        html = resp.read().decode()
    mt = WHEEL.search(html)
    if mt is None:
        raise SystemExit(f"no scipy 0.16.1 wheel listed at {page}")
    return urllib.parse.urljoin(page, mt.group(1))


def main():
    here = Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--index", default=os.environ.get("PIP_INDEX_URL", "https://pypi.org/simple"))
    ap.add_argument("--output", type=Path, default=here / "tests" / "data" / "lena.pgm")
    args = ap.parse_args()

    url = find_wheel(args.index)
    print(f"downloading {url.split('#')[0]}")
    with urllib.request.urlopen(url, timeout=600) as resp:
        wheel = resp.read()
    with zipfile.ZipFile(io.BytesIO(wheel)) as zf:
        raw = zf.read(MEMBER)
    px = np.asarray(pickle.loads(raw, encoding="latin1"), dtype=np.uint8)
    if px.shape != (512, 512):
        raise SystemExit(f"unexpected image shape {px.shape}")
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_bytes(b"P5\n512 512\n255\n" + px.tobytes())
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
