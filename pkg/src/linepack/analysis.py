"""Coherence lower bounds, structural certificates and the Naimark complement."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .frames import Frame, angle_spectrum, coherence, offdiag_magnitudes

DEFAULT_CERT_TOL = 1e-4

CERTIFICATE_KINDS = ("welch_equality", "orthoplex_equality", "levenshtein_equality",
                     "one_distance", "tight_frame", "etf", "none")


class NotTightError(ValueError):
    pass


def welch_bound(d: int, N: int) -> float:
    if N <= d:
        return 0.0
    return math.sqrt((N - d) / (d * (N - 1)))


def orthoplex_bound(d: int, N: int) -> float | None:
    """``1/sqrt(d)``, valid only when ``N > d^2``."""
    return 1.0 / math.sqrt(d) if N > d * d else None


def levenshtein_bound(d: int, N: int) -> float | None:
    if N <= d * d:
        return None
    return math.sqrt((2 * N - d * (d + 1)) / ((N - d) * (d + 1)))


def gerzon_max(d: int, field_: str = "complex") -> int:
    """Largest possible equiangular set in ``F^d``."""
    return {"real": d * (d + 1) // 2, "complex": d * d, "quaternionic": 2 * d * d - d}[field_]


@dataclass(frozen=True)
class BoundsReport:
    d: int
    N: int
    welch: float
    orthoplex: float | None
    levenshtein: float | None
    gerzon_max: int
    best_applicable: float

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_report(d: int, N: int) -> BoundsReport:
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    w = welch_bound(d, N)
    o = orthoplex_bound(d, N)
    lev = levenshtein_bound(d, N)
    best = max(b for b in (w, o, lev) if b is not None)
    return BoundsReport(d, N, w, o, lev, gerzon_max(d), best)


@dataclass
class Certificate:
    kind: str
    tolerance: float
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.kind != "none"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "tolerance": self.tolerance, "witness": self.witness}


def check_tight(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> tuple[bool, float]:
    """Compare the frame operator with ``(N/d) I``; return ``(is_tight, max-entry deviation)``."""
    X = frame.entries
    S = X @ X.conj().T
    dev = float(np.max(np.abs(S - (frame.N / frame.d) * np.eye(frame.d))))
    return dev <= tol, dev


def one_distance_report(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> Certificate:
    mags = offdiag_magnitudes(frame)
    spec = angle_spectrum(frame, tol)
    spread = float(mags.max() - mags.min()) if mags.size else 0.0
    witness = {"clusters": spec, "spread": spread, "value": spec[0] if len(spec) == 1 else None}
    return Certificate("one_distance" if len(spec) == 1 else "none", tol, witness)


def check_etf(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> Certificate:
    """ETF iff one angle, tight, and the angle sits on the Welch bound (all within ``tol``)."""
    one = one_distance_report(frame, tol)
    tight, dev = check_tight(frame, tol)
    welch = welch_bound(frame.d, frame.N)
    angle = one.witness["value"]
    on_welch = angle is not None and abs(angle - welch) <= tol
    witness = {"angle": angle, "welch": welch, "tight_deviation": dev,
               "n_clusters": len(one.witness["clusters"])}
    return Certificate("etf" if (one.passed and tight and on_welch) else "none", tol, witness)


def levenshtein_structure(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> Certificate:
    """Detect the structure Levenshtein equality needs: tight with angle set ``{0, mu}``.

    Necessary, not sufficient; the witness flags it as structural only.
    """
    tight, dev = check_tight(frame, tol)
    spec = angle_spectrum(frame, tol)
    mu = coherence(frame)
    two = len(spec) == 2 and abs(spec[0]) <= tol and abs(spec[1] - mu) <= tol
    witness = {"tight_deviation": dev, "clusters": spec, "structural_only": True}
    return Certificate("levenshtein_equality" if (tight and two) else "none", tol, witness)


def bound_equalities(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> list[Certificate]:
    """Certificates for every lower bound the frame's coherence meets within ``tol``."""
    d, N = frame.d, frame.N
    mu = coherence(frame)
    certs = []
    w = welch_bound(d, N)
    if abs(mu - w) <= tol:
        certs.append(Certificate("welch_equality", tol, {"coherence": mu, "bound": w}))
    o = orthoplex_bound(d, N)
    if o is not None and abs(mu - o) <= tol:
        certs.append(Certificate("orthoplex_equality", tol, {
            "coherence": mu, "bound": o, "count_condition_met": N <= 2 * d * d - 1}))
    lev = levenshtein_bound(d, N)
    if lev is not None and abs(mu - lev) <= tol:
        structure = levenshtein_structure(frame, tol)
        certs.append(Certificate("levenshtein_equality", tol, {
            "coherence": mu, "bound": lev, "structure_detected": structure.passed}))
    return certs


def naimark_complement(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> Frame:
    """Unit-norm ``(N-d) x N`` frame completing ``sqrt(d/N) Phi`` to a unitary.

    The complement's off-diagonal Gram entries are ``-d/(N-d)`` times the
    original ones, so ETFs map to ETFs.
    """
    d, N = frame.d, frame.N
    if N <= d:
        raise ValueError(f"Naimark complement needs N > d (got d={d}, N={N})")
    tight, dev = check_tight(frame, tol)
    if not tight:
        raise NotTightError(f"frame is not tight: deviation {dev:.3e} > {tol:g}")
    # Rows of Vh beyond the first d span the orthogonal complement of the row space.
    _, _, Vh = np.linalg.svd(frame.entries, full_matrices=True)
    B = Vh[d:, :] * math.sqrt(N / (N - d))
    return Frame(B / np.linalg.norm(B, axis=0), normalized=True)


def is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
        p += 1
    return True


def conjecture1_target(d: int, N: int) -> float | None:
    """``1/sqrt(d+1)`` for ``N = d^2 - j`` with ``0 <= j <= d-2`` (SIC with points removed)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if d * d - d + 2 <= N <= d * d:
        return 1.0 / math.sqrt(d + 1)
    return None


def mub_removal_target(d: int, N: int) -> float | None:
    """``1/sqrt(d)`` for prime-power ``d`` and ``d^2 + 1 <= N <= d(d+1)`` (full MUB minus points)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if is_prime_power(d) and d * d + 1 <= N <= d * (d + 1):
        return 1.0 / math.sqrt(d)
    return None


def certify(frame: Frame, tol: float = DEFAULT_CERT_TOL) -> dict:
    """Everything known about a frame: bounds, certificates, targets and gaps."""
    d, N = frame.d, frame.N
    mu = coherence(frame)
    bounds = bounds_report(d, N)
    tight, dev = check_tight(frame, tol)
    targets = {}
    if d >= 2:
        targets = {"conjecture1": conjecture1_target(d, N), "mub_removal": mub_removal_target(d, N)}
    return {
        "d": d,
        "N": N,
        "coherence": mu,
        "bounds": bounds.to_dict(),
        "bound_gap": mu - bounds.best_applicable,
        "tight_frame": Certificate("tight_frame" if tight else "none", tol, {"deviation": dev}).to_dict(),
        "etf": check_etf(frame, tol).to_dict(),
        "one_distance": one_distance_report(frame, tol).to_dict(),
        "bound_equalities": [c.to_dict() for c in bound_equalities(frame, tol)],
        "angle_spectrum": angle_spectrum(frame, tol),
        "targets": targets,
        "target_gaps": {k: (mu - v if v is not None else None) for k, v in targets.items()},
    }

