import functools

import numpy as np
import pytest

from linepack.frames import Frame, sic_d2
from linepack.solver import SolverConfig, solve


@functools.lru_cache(maxsize=None)
def solved(d, N, restarts=20, seed=0):
    """Solve once per (d, N, restarts, seed) for the whole session."""
    return solve(SolverConfig(d=d, N=N, restarts=restarts, seed=seed, threads=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sic():
    return sic_d2()


def random_complex(rng, d, N):
    return rng.standard_normal((d, N)) + 1j * rng.standard_normal((d, N))


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_complex(rng, d, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_normalized(rng, d, N):
    X = random_complex(rng, d, N)
    return Frame(X / np.linalg.norm(X, axis=0), normalized=True)


def fd_gradient(f, p, h=1e-5):
    """Central differences of a scalar function, one coordinate at a time."""
    g = np.empty_like(p)
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        g[i] = (f(p + e) - f(p - e)) / (2 * h)
    return g


def gradient_relerr(p, obj):
    """Max componentwise deviation from central differences, relative to the gradient's max entry."""
    from linepack.smoothing import eval_objective, objective_value
    g = eval_objective(p, obj).grad
    fd = fd_gradient(lambda q: objective_value(q, obj), p)
    return float(np.max(np.abs(fd - g)) / np.max(np.abs(g)))


ACCEPTANCE_LINES: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str, gating: bool = True):
    tag = ("PASS" if ok else "FAIL") if gating else "REPORT"
    ACCEPTANCE_LINES[criterion] = f"[{tag}] criterion {criterion:2d}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
