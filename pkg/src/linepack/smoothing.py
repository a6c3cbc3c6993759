"""Log-sum-exp smooth maximum of squared off-diagonal Gram magnitudes.

For a raw (unnormalized) frame ``X`` with unit columns ``P = X / |X|`` the
objective is

    F(X) = s + delta * log(sum_i exp((x_i - s) / delta)),   x_i = |<p_j, p_k>|^2,

over pairs ``j < k`` with ``s = max_i x_i``.  ``s`` is recomputed on every
evaluation, so the shift never goes stale and ``F`` is exactly the smooth
function it claims to be.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import ZeroColumnError, normalize_matrix, vector_to_matrix

FD_BASE_STEP = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class SmoothObjective:
    delta: float
    d: int
    N: int
    squared_mode: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.N < 2:
            raise ValueError("objective needs at least two vectors (N >= 2)")
        if not self.squared_mode:
            raise NotImplementedError("only the squared-magnitude objective is supported")

    @property
    def n_pairs(self) -> int:
        return self.N * (self.N - 1) // 2

    @property
    def dim(self) -> int:
        return 2 * self.d * self.N


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    s: float
    grad: np.ndarray
    softmax_weights: np.ndarray


def lse_partials(x, delta: float) -> np.ndarray:
    """Softmax weights ``exp((x_j - s)/delta) / sum_i exp((x_i - s)/delta)``.

    These are the exact partial derivatives of the smooth maximum with
    respect to ``x``; they lie in ``[0, 1]`` and sum to one.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    e = np.exp((x - x.max()) / delta)
    return e / e.sum()


def smooth_max(x, delta: float) -> tuple[float, float]:
    """Return ``(F, s)`` for the shift-stabilized log-sum-exp."""
    x = np.asarray(x, dtype=float)
    s = float(x.max())
    total = float(np.sum(np.exp((x - s) / delta)))
    return s + delta * float(np.log(total)), s


class _PairIndex:
    # Cached upper-triangular index arrays keyed by N.
    _cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @classmethod
    def get(cls, N: int):
        idx = cls._cache.get(N)
        if idx is None:
            idx = np.triu_indices(N, 1)
            cls._cache[N] = idx
        return idx


def eval_objective(point: np.ndarray, obj: SmoothObjective) -> ObjectiveEval:
    """Value, shift and exact gradient of the smooth objective at ``point``.

    The gradient is taken with respect to the ``2dN`` raw real coordinates,
    through column normalization, the Gram entries and their squared moduli.
    """
    X = vector_to_matrix(point, obj.d, obj.N)
    P, norms = normalize_matrix(X)
    G = P.conj().T @ P
    iu, ju = _PairIndex.get(obj.N)
    g = G[iu, ju]
    x = g.real**2 + g.imag**2

    s = float(x.max())
    e = np.exp((x - s) / obj.delta)
    total = float(np.sum(e))
    value = s + obj.delta * float(np.log(total))
    w = e / total

    # dF/dP = 2 P (W o G) with W the symmetric weight matrix (zero diagonal).
    WG = np.zeros((obj.N, obj.N), dtype=np.complex128)
    WG[iu, ju] = w * g
    WG[ju, iu] = w * g.conj()
    gP = 2.0 * (P @ WG)
    # Pull back through p = x / |x|: remove the radial component, divide by |x|.
    radial = np.sum((P.conj() * gP).real, axis=0)
    gX = (gP - P * radial) / norms
    grad = np.ascontiguousarray(gX.T).view(np.float64).ravel()
    return ObjectiveEval(value=value, s=s, grad=grad, softmax_weights=w)


def objective_value(point: np.ndarray, obj: SmoothObjective) -> float:
    X = vector_to_matrix(point, obj.d, obj.N)
    P, _ = normalize_matrix(X)
    G = P.conj().T @ P
    iu, ju = _PairIndex.get(obj.N)
    g = G[iu, ju]
    return smooth_max(g.real**2 + g.imag**2, obj.delta)[0]


def fd_step(point: np.ndarray, direction: np.ndarray, base: float = FD_BASE_STEP) -> float:
    return base * (1.0 + float(np.linalg.norm(point))) / max(float(np.linalg.norm(direction)), 1e-300)


def hessian_vector_product(point, direction, obj: SmoothObjective | None = None,
                           step: float = FD_BASE_STEP, grad_fn=None, grad_at_point=None):
    """Central finite difference of the gradient along ``direction``.

    ``grad_fn`` substitutes an arbitrary gradient (used for testing on
    quadratics); otherwise the smooth objective's gradient is used.  ``step``
    is the base step, scaled by ``(1 + |point|) / |direction|``.  If a
    perturbed point hits a zero column the one-sided difference is used
    instead, which needs the gradient at ``point`` (computed if not given).
    """
    point = np.asarray(point, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if direction.shape != point.shape:
        raise ValueError("direction and point must have the same shape")
    if not np.any(direction):
        return np.zeros_like(point)
    if grad_fn is None:
        if obj is None:
            raise ValueError("need either obj or grad_fn")
        grad_fn = lambda p: eval_objective(p, obj).grad  # noqa: E731
    if not step > 0:
        raise ValueError("step must be positive")
    h = fd_step(point, direction, step)
    try:
        return (grad_fn(point + h * direction) - grad_fn(point - h * direction)) / (2.0 * h)
    except ZeroColumnError:
        g0 = grad_fn(point) if grad_at_point is None else grad_at_point
        try:
            return (grad_fn(point + h * direction) - g0) / h
        except ZeroColumnError:
            return (g0 - grad_fn(point - h * direction)) / h
