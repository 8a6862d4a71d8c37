import os

import numpy as np
import pytest

from star_isac.scenario import load_config

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DESK_CONFIG = os.path.join(ROOT, "configs", "desk.yaml")
TABLE1_CONFIG = os.path.join(ROOT, "configs", "table1.yaml")


@pytest.fixture(scope="session")
def desk_cfg():
    return load_config(DESK_CONFIG)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n, psd=False):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z @ z.conj().T if psd else 0.5 * (z + z.conj().T)


_RUN_CACHE = {}


def desk_run(cfg, scheme, seed):
    """Memoized single run (trace, channels, seconds) shared across test modules."""
    import time

    from star_isac.baselines import SCHEMES
    from star_isac.scenario import scenario

    key = (cfg, scheme, seed)
    if key not in _RUN_CACHE:
        t0 = time.perf_counter()
        channels, rng = scenario(cfg, seed)
        trace = SCHEMES[scheme](channels, cfg, rng)
        _RUN_CACHE[key] = (trace, channels, time.perf_counter() - t0)
    return _RUN_CACHE[key]


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
