import math

import numpy as np
import pytest

from conftest import solved
from linepack import solver
from linepack.analysis import welch_bound
from linepack.frames import ZeroColumnError, coherence, matrix_to_vector
from linepack.solver import (SolverConfig, anneal, child_seed, default_delta_schedule, random_frame,
                             solve)


def test_schedule_terminal_level():
    sched = default_delta_schedule(100, 1e-6)
    assert sched[-1] == pytest.approx(1e-6 / (2 * math.log(100)))
    assert sched[-1] == pytest.approx(1.086e-7, rel=1e-3)
    assert default_delta_schedule(2, 1e-3)[-1] == pytest.approx(1e-3 / (2 * math.log(2)))


@pytest.mark.parametrize("N", [2, 5, 10, 50, 100])
def test_schedule_terminal_in_figure_range(N):
    assert 1e-8 <= default_delta_schedule(N, 1e-7)[-1] <= 1e-7


@pytest.mark.parametrize("N,eps", [(2, 1.0), (3, 1e-7), (40, 1e-3), (1000, 1e-9)])
def test_schedule_shape(N, eps):
    sched = default_delta_schedule(N, eps)
    assert len(sched) >= 2
    assert all(b < a for a, b in zip(sched, sched[1:]))
    for a, b in zip(sched[:-2], sched[1:-1]):
        assert a / b == pytest.approx(10.0)


def test_schedule_rejects_bad_args():
    with pytest.raises(ValueError):
        default_delta_schedule(1, 1e-3)
    with pytest.raises(ValueError):
        default_delta_schedule(5, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(d=2, N=3, delta_schedule=[1e-2, 1e-2])
    with pytest.raises(ValueError):
        SolverConfig(d=2, N=3, restarts=0)
    cfg = SolverConfig(d=2, N=3, delta_schedule=[1e-1, 1e-3])
    assert SolverConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_stage_iteration_cap_grows():
    cfg = SolverConfig(d=2, N=3)
    assert [cfg.stage_tr(k).max_outer for k in range(3)] == [200, 250, 300]


def test_child_seed_is_splitmix64():
    # first two SplitMix64 outputs for state 0
    assert child_seed(0, 0) == 0xE220A8397B1DCDAF
    assert child_seed(0, 1) == 0x6E789E6AA1B965F4
    assert len({child_seed(7, i) for i in range(1000)}) == 1000


def test_random_frame_deterministic():
    a = random_frame(3, 7, np.random.default_rng(5))
    b = random_frame(3, 7, np.random.default_rng(5))
    assert a == b and a.normalized


def test_random_frame_norms():
    f = random_frame(2, 1000, np.random.default_rng(1))
    np.testing.assert_allclose(np.linalg.norm(f.entries, axis=0), 1, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_random_frame_overlap_mean(d):
    f = random_frame(d, 4000, np.random.default_rng(d))
    ip = np.abs(np.sum(f.entries[:, ::2].conj() * f.entries[:, 1::2], axis=0)) ** 2
    se = ip.std(ddof=1) / math.sqrt(ip.size)
    assert abs(ip.mean() - 1 / d) <= 3 * se


def test_anneal_orthogonal_pair():
    cfg = SolverConfig(d=2, N=2)
    frame, stages = anneal(random_frame(2, 2, np.random.default_rng(0)), cfg)
    assert coherence(frame) <= 1e-6
    assert len(stages) == len(cfg.schedule())


def test_anneal_shape_mismatch():
    with pytest.raises(ValueError):
        anneal(random_frame(2, 3, np.random.default_rng(0)), SolverConfig(d=2, N=4))


def test_sic_d2_reached():
    res = solved(2, 4)
    assert res.best_coherence <= 0.5774 + 1e-3


def test_stagewise_coherence_mostly_nonincreasing():
    stages_ok = total = 0
    for d, N in [(2, 4), (3, 8), (2, 5)]:
        for r in solved(d, N).per_restart:
            for a, b in zip(r.stages, r.stages[1:]):
                total += 1
                stages_ok += b.coherence <= a.coherence + 1e-6
    assert stages_ok >= 0.95 * total


def test_single_restart_equals_anneal():
    cfg = SolverConfig(d=2, N=3, restarts=1, seed=11)
    res = solve(cfg)
    rng = np.random.default_rng(child_seed(11, 0))
    frame, _ = anneal(random_frame(2, 3, rng), cfg, rng)
    assert res.best_frame == frame
    assert res.per_restart[0].seed == child_seed(11, 0)


def test_solve_deterministic():
    cfg = SolverConfig(d=3, N=5, restarts=3, seed=99)
    a, b = solve(cfg), solve(cfg)
    assert a.best_frame == b.best_frame
    assert a.best_coherence == b.best_coherence
    assert [r.to_dict() for r in a.per_restart] == [r.to_dict() for r in b.per_restart]


def test_solve_parallel_matches_serial():
    serial = solve(SolverConfig(d=2, N=5, restarts=3, seed=4, threads=1))
    parallel = solve(SolverConfig(d=2, N=5, restarts=3, seed=4, threads=3))
    assert parallel.best_coherence == serial.best_coherence
    assert parallel.best_frame == serial.best_frame
    assert [r.index for r in parallel.per_restart] == [0, 1, 2]


@pytest.mark.parametrize("dN", [(2, 4), (3, 8), (2, 5), (2, 6), (4, 8), (4, 9)])
def test_result_invariants(dN):
    res = solved(*dN)
    f = res.best_frame
    assert f.normalized
    assert res.best_coherence == pytest.approx(coherence(f), abs=1e-12)
    assert res.best_coherence == min(r.coherence for r in res.per_restart if r.coherence is not None)
    assert res.best_coherence >= welch_bound(*dN) - 1e-9
    for j in range(f.N):
        assert coherence(f.drop_column(j)) <= res.best_coherence + 1e-12


@pytest.mark.parametrize("d", range(2, 9))
def test_orthonormal_basis_found(d):
    assert solve(SolverConfig(d=d, N=d, restarts=5, seed=d)).best_coherence <= 1e-6


def test_single_vector_is_trivial():
    res = solve(SolverConfig(d=3, N=1, restarts=2))
    assert res.best_coherence == 0.0 and res.best_frame.N == 1


def test_rescue_redraws_collapsed_column():
    X = np.ones((2, 3), dtype=complex)
    X[:, 1] = 0
    out = solver._rescue_columns(matrix_to_vector(X), 2, 3, np.random.default_rng(0))
    Y = out.view(np.complex128).reshape(3, 2).T
    assert np.linalg.norm(Y[:, 1]) > 1e-12
    np.testing.assert_array_equal(Y[:, [0, 2]], X[:, [0, 2]])


def test_failed_restart_recorded(monkeypatch):
    real = solver.anneal

    def flaky(start, cfg, rng=None):
        if rng is not None and flaky.calls == 0:
            flaky.calls += 1
            raise ZeroColumnError(0, 0.0)
        return real(start, cfg, rng)

    flaky.calls = 0
    monkeypatch.setattr(solver, "anneal", flaky)
    res = solve(SolverConfig(d=2, N=3, restarts=2, seed=1))
    assert res.per_restart[0].coherence is None and "ZeroColumnError" in res.per_restart[0].error
    assert res.best_coherence == res.per_restart[1].coherence


def test_all_restarts_failing_raises(monkeypatch):
    def broken(start, cfg, rng=None):
        raise ZeroColumnError(0, 0.0)

    monkeypatch.setattr(solver, "anneal", broken)
    with pytest.raises(RuntimeError):
        solve(SolverConfig(d=2, N=3, restarts=2))
