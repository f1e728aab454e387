from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from kpaac import _accel
from kpaac.imageio import load_pgm

DATA = Path(__file__).parent / "data"

# first calls pay numba JIT / cache load; wall-clock deadlines would be flaky
settings.register_profile("kpaac", deadline=None)
settings.load_profile("kpaac")

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture(params=[b for b in _accel.BACKENDS if b != "numba" or _accel.HAVE_NUMBA])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def lena_path() -> Path | None:
    env = os.environ.get("KPAAC_LENA")
    for candidate in (env, DATA / "lena.pgm"):
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


@pytest.fixture(scope="session")
def lena():
    path = lena_path()
    if path is None:
        pytest.skip("Lena 512x512 not found: set KPAAC_LENA or run scripts/fetch_lena.py")
    image = load_pgm(path)
    if image.pixels.shape != (512, 512):
        pytest.skip(f"{path} is not 512x512")
    return image


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per criterion; printed in the terminal summary."""
    log = request.config.stash[_ACCEPTANCE_KEY]

    def record(name: str, ok: bool, detail: str):
        log.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE_KEY, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in log:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
