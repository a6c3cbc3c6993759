"""Annealed log-sum-exp minimization with seeded multistart.

Each restart draws a Gaussian random frame, then minimizes the smooth
objective for a decreasing sequence of smoothing levels, warm-starting each
stage from the raw parameter vector left by the previous one.  The best final
coherence over all restarts wins.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .frames import (ZERO_COLUMN_TOL, Frame, ZeroColumnError, coherence, column_norms,
                     matrix_to_vector, normalize_matrix, vector_to_matrix)
from .smoothing import SmoothObjective, eval_objective, hessian_vector_product
from .trustregion import TrustRegionConfig, trust_region_minimize

DEFAULT_DELTA_START = 1e-2
DEFAULT_EPS_TARGET = 1e-7
STAGE_OUTER_INCREMENT = 50
MAX_RESCUES = 3

_MASK64 = (1 << 64) - 1


def default_delta_schedule(N: int, eps_target: float = DEFAULT_EPS_TARGET,
                           start: float = DEFAULT_DELTA_START) -> list[float]:
    """Geometric schedule with ratio 10 from ``start`` down to ``eps_target / (2 log N)``.

    The terminal level keeps the smooth maximum over ``N(N-1)/2`` pairs within
    ``eps_target`` of the true maximum.  At least two stages are returned.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if not eps_target > 0:
        raise ValueError("eps_target must be positive")
    terminal = eps_target / (2.0 * math.log(N))
    if terminal >= start:
        return [10.0 * terminal, terminal]
    sched = []
    level = start
    while level > terminal * (1 + 1e-9):
        sched.append(level)
        level /= 10.0
    sched.append(terminal)
    return sched


def child_seed(seed: int, index: int) -> int:
    """SplitMix64 finalizer applied to ``seed + (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64)."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def random_frame(d: int, N: int, rng: np.random.Generator) -> Frame:
    """Normalized frame with i.i.d. standard complex Gaussian columns."""
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    X = rng.standard_normal((d, N)) + 1j * rng.standard_normal((d, N))
    for _ in range(100):
        bad = np.flatnonzero(column_norms(X) < ZERO_COLUMN_TOL)
        if not bad.size:
            break
        X[:, bad] = rng.standard_normal((d, bad.size)) + 1j * rng.standard_normal((d, bad.size))
    P, _ = normalize_matrix(X)
    return Frame(P, normalized=True)


@dataclass
class SolverConfig:
    d: int
    N: int
    delta_schedule: list[float] | None = None
    restarts: int = 20
    seed: int = 0
    tr: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    eps_target: float = DEFAULT_EPS_TARGET
    threads: int = 1

    def __post_init__(self):
        if self.d < 1 or self.N < 1:
            raise ValueError("d and N must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.eps_target > 0:
            raise ValueError("eps_target must be positive")
        if self.delta_schedule is not None:
            sched = [float(x) for x in self.delta_schedule]
            if not sched or any(x <= 0 for x in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
                raise ValueError("delta_schedule must be strictly decreasing and positive")
            self.delta_schedule = sched
        self.seed = int(self.seed) & _MASK64

    def schedule(self) -> list[float]:
        if self.delta_schedule is not None:
            return list(self.delta_schedule)
        return default_delta_schedule(max(self.N, 2), self.eps_target)

    def stage_tr(self, stage: int) -> TrustRegionConfig:
        return replace(self.tr, max_outer=self.tr.max_outer + STAGE_OUTER_INCREMENT * stage)

    def to_dict(self) -> dict:
        """Echo of everything that determines the result (``threads`` excluded)."""
        return {
            "d": self.d, "N": self.N, "delta_schedule": self.schedule(),
            "restarts": self.restarts, "seed": self.seed, "eps_target": self.eps_target,
            "tr": asdict(self.tr),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        return cls(d=data["d"], N=data["N"], delta_schedule=data.get("delta_schedule"),
                   restarts=data["restarts"], seed=data["seed"], eps_target=data["eps_target"],
                   tr=TrustRegionConfig(**data["tr"]))


@dataclass
class StageRecord:
    delta: float
    objective: float
    coherence: float
    iterations: int
    status: str


@dataclass
class RestartSummary:
    index: int
    seed: int
    coherence: float | None
    stages: list[StageRecord] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RestartSummary":
        return cls(index=data["index"], seed=data["seed"], coherence=data["coherence"],
                   stages=[StageRecord(**s) for s in data["stages"]], error=data.get("error"))


@dataclass
class SolveResult:
    best_frame: Frame
    best_coherence: float
    per_restart: list[RestartSummary]
    config_echo: dict
    wall_time: float
    method: str = "trstmi"


def _rescue_columns(x: np.ndarray, d: int, N: int, rng: np.random.Generator) -> np.ndarray:
    X = vector_to_matrix(x, d, N)
    for _ in range(MAX_RESCUES):
        bad = np.flatnonzero(column_norms(X) < ZERO_COLUMN_TOL)
        if not bad.size:
            return matrix_to_vector(X)
        X[:, bad] = rng.standard_normal((d, bad.size)) + 1j * rng.standard_normal((d, bad.size))
    bad = np.flatnonzero(column_norms(X) < ZERO_COLUMN_TOL)
    if bad.size:
        raise ZeroColumnError(int(bad[0]), float(column_norms(X)[bad[0]]))
    return matrix_to_vector(X)


def anneal(start: Frame, cfg: SolverConfig, rng: np.random.Generator | None = None
           ) -> tuple[Frame, list[StageRecord]]:
    """Run every smoothing stage from ``start``; return the normalized result and stage log."""
    d, N = start.d, start.N
    if (d, N) != (cfg.d, cfg.N):
        raise ValueError(f"start frame is {d}x{N}, config expects {cfg.d}x{cfg.N}")
    if N < 2:
        P, _ = normalize_matrix(np.array(start.entries))
        return Frame(P, normalized=True), []
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    x = start.to_vector()
    stages: list[StageRecord] = []
    for k, delta in enumerate(cfg.schedule()):
        x = _rescue_columns(x, d, N, rng)
        obj = SmoothObjective(delta, d, N)

        def f_and_grad(p, obj=obj):
            ev = eval_objective(p, obj)
            return ev.value, ev.grad

        def hvp_factory(p, g, obj=obj):
            return lambda v: hessian_vector_product(p, v, obj, grad_at_point=g)

        res = trust_region_minimize(f_and_grad, hvp_factory, x, cfg.stage_tr(k))
        x = res.x
        P, _ = normalize_matrix(vector_to_matrix(x, d, N))
        stages.append(StageRecord(delta=delta, objective=float(res.f),
                                  coherence=coherence(Frame(P)),
                                  iterations=res.iterations, status=res.status))
    P, _ = normalize_matrix(vector_to_matrix(x, d, N))
    return Frame(P, normalized=True), stages


def _run_restart(cfg: SolverConfig, index: int):
    seed = child_seed(cfg.seed, index)
    rng = np.random.default_rng(seed)
    try:
        start = random_frame(cfg.d, cfg.N, rng)
        frame, stages = anneal(start, cfg, rng)
        return RestartSummary(index, seed, coherence(frame), stages), frame
    except (ValueError, ArithmeticError) as exc:
        return RestartSummary(index, seed, None, [], error=f"{type(exc).__name__}: {exc}"), None


def solve(cfg: SolverConfig) -> SolveResult:
    """Multistart annealed minimization; deterministic in ``cfg`` regardless of ``threads``."""
    t0 = time.perf_counter()
    threads = max(1, min(cfg.threads, cfg.restarts))
    if threads == 1:
        outcomes = [_run_restart(cfg, i) for i in range(cfg.restarts)]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_restart, [cfg] * cfg.restarts, range(cfg.restarts)))

    best_frame, best_coh = None, math.inf
    for summary, frame in outcomes:
        if frame is not None and summary.coherence < best_coh:
            best_frame, best_coh = frame, summary.coherence
    if best_frame is None:
        raise RuntimeError(f"all {cfg.restarts} restarts failed")
    return SolveResult(best_frame=best_frame, best_coherence=best_coh,
                       per_restart=[s for s, _ in outcomes], config_echo=cfg.to_dict(),
                       wall_time=time.perf_counter() - t0)


def default_threads() -> int:
    return os.cpu_count() or 1

