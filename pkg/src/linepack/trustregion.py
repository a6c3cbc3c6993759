"""Trust-region minimization with a Steihaug-Toint conjugate gradient inner solver.

The module is generic: it works with any evaluator returning ``(f, grad)``
and any Hessian-vector product, which keeps it testable on quadratics and
Rosenbrock independently of the frame objective.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

EXIT_REASONS = ("small_residual", "negative_curvature", "boundary_hit", "zero_gradient", "max_cg")
MIN_RADIUS = 1e-16


@dataclass
class TrustRegionConfig:
    """Outer-loop parameters.  ``delta0=None`` means ``0.1 * sqrt(dim)``; ``max_cg=None`` means ``2 * dim``."""

    delta0: float | None = None
    delta_max: float = 1e3
    eta: float = 0.05
    shrink: float = 0.25
    grow: float = 2.0
    grad_tol: float = 1e-10
    max_outer: int = 200
    cg_force_c: float = 0.5
    max_cg: int | None = None

    def __post_init__(self):
        if self.delta0 is not None and not 0 < self.delta0 <= self.delta_max:
            raise ValueError("need 0 < delta0 <= delta_max")
        if not 0 <= self.eta < 0.25:
            raise ValueError("need 0 <= eta < 1/4")
        if not 0 < self.shrink < 1 < self.grow:
            raise ValueError("need 0 < shrink < 1 < grow")
        if self.max_outer < 0:
            raise ValueError("max_outer must be non-negative")

    def initial_radius(self, dim: int) -> float:
        r = 0.1 * math.sqrt(dim) if self.delta0 is None else self.delta0
        return min(r, self.delta_max)

    def cg_limit(self, dim: int) -> int:
        return 2 * dim if self.max_cg is None else self.max_cg


@dataclass
class CgTrace:
    iterations: int
    exit_reason: str
    step_norm: float
    model_change: float  # m(p) - m(0); non-positive for a proper inner solve

    @property
    def converged(self) -> bool:
        return self.exit_reason != "max_cg"

    @property
    def on_boundary(self) -> bool:
        return self.exit_reason in ("boundary_hit", "negative_curvature")


def _boundary_roots(z, d, radius):
    """Both roots of ``|z + tau d| = radius`` (``tau_neg <= 0 <= tau_pos`` when ``|z| < radius``)."""
    a = float(d @ d)
    b = 2.0 * float(z @ d)
    c = float(z @ z) - radius * radius
    disc = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
    q = -0.5 * (b + math.copysign(disc, b))
    if q == 0.0:
        return 0.0, 0.0
    r1, r2 = q / a, c / q
    return min(r1, r2), max(r1, r2)


def steihaug_cg(grad, hvp: Callable[[np.ndarray], np.ndarray], radius: float, eps_k: float,
                max_cg: int | None = None) -> tuple[np.ndarray, CgTrace]:
    """Approximately minimize ``g.p + 0.5 p.B.p`` subject to ``|p| <= radius``.

    ``hvp(v)`` returns ``B v``.  The model change ``m(p) - m(0)`` is tracked
    along the CG recurrences and reported in the trace, so callers need no
    extra Hessian product to compute the predicted reduction.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if not eps_k > 0:
        raise ValueError("eps_k must be positive")
    g = np.asarray(grad, dtype=float)
    if max_cg is None:
        max_cg = 2 * g.size
    z = np.zeros_like(g)
    r = g.copy()
    rr = float(r @ r)
    if math.sqrt(rr) < eps_k:
        return z, CgTrace(0, "zero_gradient", 0.0, 0.0)
    d = -r
    model = 0.0
    for j in range(max_cg):
        Bd = hvp(d)
        dBd = float(d @ Bd)
        if dBd <= 0:
            rd = float(r @ d)
            lo, hi = _boundary_roots(z, d, radius)
            m_lo = lo * rd + 0.5 * lo * lo * dBd
            m_hi = hi * rd + 0.5 * hi * hi * dBd
            tau, dm = (lo, m_lo) if m_lo < m_hi else (hi, m_hi)
            p = z + tau * d
            return p, CgTrace(j + 1, "negative_curvature", float(np.linalg.norm(p)), model + dm)
        alpha = rr / dBd
        z_next = z + alpha * d
        if np.linalg.norm(z_next) >= radius:
            rd = float(r @ d)
            _, tau = _boundary_roots(z, d, radius)
            p = z + tau * d
            dm = tau * rd + 0.5 * tau * tau * dBd
            return p, CgTrace(j + 1, "boundary_hit", float(np.linalg.norm(p)), model + dm)
        model -= 0.5 * alpha * rr
        z = z_next
        r = r + alpha * Bd
        rr_next = float(r @ r)
        if math.sqrt(rr_next) < eps_k:
            return z, CgTrace(j + 1, "small_residual", float(np.linalg.norm(z)), model)
        d = -r + (rr_next / rr) * d
        rr = rr_next
    return z, CgTrace(max_cg, "max_cg", float(np.linalg.norm(z)), model)


@dataclass
class OuterRecord:
    iteration: int
    f: float
    grad_norm: float
    radius: float
    rho: float
    accepted: bool
    cg_iterations: int
    cg_exit: str

    def to_dict(self):
        return asdict(self)


@dataclass
class TrustRegionResult:
    x: np.ndarray
    f: float
    grad: np.ndarray
    status: str  # "converged", "max_outer", "radius_underflow"
    history: list[OuterRecord] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.history)


def trust_region_minimize(f_and_grad: Callable, hvp_factory: Callable, x0,
                          cfg: TrustRegionConfig | None = None) -> TrustRegionResult:
    """Minimize ``f`` from ``x0`` with a Steihaug-CG trust-region method.

    Parameters
    ----------
    f_and_grad : callable
        ``x -> (f, grad)``.  May raise ``ValueError`` (e.g. a zero column)
        at trial points; such steps are rejected.
    hvp_factory : callable
        ``(x, grad) -> (v -> H(x) v)``.
    x0 : array_like
        Starting point; ``f_and_grad(x0)`` must be finite.
    cfg : TrustRegionConfig, optional
    """
    cfg = cfg or TrustRegionConfig()
    x = np.array(x0, dtype=float, copy=True)
    f, g = f_and_grad(x)
    g = np.asarray(g, dtype=float)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise ValueError("objective or gradient is not finite at the starting point")
    dim = x.size
    radius = cfg.initial_radius(dim)
    max_cg = cfg.cg_limit(dim)
    history: list[OuterRecord] = []
    status = "max_outer"

    for k in range(cfg.max_outer):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= cfg.grad_tol:
            status = "converged"
            break
        eps_k = min(cfg.cg_force_c, math.sqrt(gnorm)) * gnorm
        step, trace = steihaug_cg(g, hvp_factory(x, g), radius, eps_k, max_cg)
        predicted = -trace.model_change

        rho = -math.inf
        f_new = g_new = None
        if predicted > 0:
            try:
                f_new, g_new = f_and_grad(x + step)
                g_new = np.asarray(g_new, dtype=float)
                if math.isfinite(f_new) and np.all(np.isfinite(g_new)):
                    rho = (f - f_new) / predicted
            except (ValueError, FloatingPointError, ArithmeticError):
                pass

        accepted = rho > cfg.eta
        history.append(OuterRecord(k, f, gnorm, radius, rho if math.isfinite(rho) else float("nan"),
                                   accepted, trace.iterations, trace.exit_reason))
        if rho < 0.25:
            radius *= cfg.shrink
        elif rho > 0.75 and trace.on_boundary:
            radius = min(cfg.grow * radius, cfg.delta_max)
        if accepted:
            x = x + step
            f, g = f_new, g_new
        if radius < MIN_RADIUS:
            status = "radius_underflow"
            break
    else:
        if float(np.linalg.norm(g)) <= cfg.grad_tol:
            status = "converged"

    return TrustRegionResult(x=x, f=f, grad=g, status=status, history=history)
