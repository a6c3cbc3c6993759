"""Alternating-projection baseline on the Gram matrix.

Alternates between the set of Hermitian matrices with unit diagonal and
off-diagonal magnitudes at most ``mu_target`` and the set of PSD matrices of
rank at most ``d``.  Every spectral iterate is factored into a frame and the
lowest-coherence one is kept.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import welch_bound
from .frames import Frame, coherence, normalize_matrix
from .solver import RestartSummary, SolveResult, random_frame


@dataclass
class AltProjConfig:
    max_iters: int = 5000
    mu_target: float | None = None  # None means the Welch bound of (d, N)
    tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.mu_target is not None and not 0 < self.mu_target < 1:
            raise ValueError("mu_target must lie in (0, 1)")

    def target(self, d: int, N: int) -> float:
        return welch_bound(d, N) if self.mu_target is None else self.mu_target


def structural_projection(G: np.ndarray, mu_target: float) -> np.ndarray:
    """Unit diagonal; off-diagonal entries clipped to modulus ``mu_target``, phases kept."""
    mags = np.abs(G)
    scale = np.minimum(1.0, mu_target / np.maximum(mags, 1e-300))
    H = G * scale
    np.fill_diagonal(H, 1.0)
    return H


def _top_eigenpairs(G: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh((G + G.conj().T) / 2)
    vals = vals[::-1][:d]
    vecs = vecs[:, ::-1][:, :d]
    # Fix each eigenvector's phase so its largest-modulus entry is real positive.
    pivots = np.argmax(np.abs(vecs), axis=0)
    phase = vecs[pivots, np.arange(vecs.shape[1])]
    vecs = vecs * (np.abs(phase) / phase)
    return np.clip(vals, 0.0, None), vecs


def spectral_projection(G: np.ndarray, d: int) -> np.ndarray:
    """Nearest PSD matrix of rank at most ``d`` (keep the top ``d`` eigenvalues, clipped at 0)."""
    vals, vecs = _top_eigenpairs(G, d)
    return (vecs * vals) @ vecs.conj().T


def factor_gram(G: np.ndarray, d: int) -> Frame:
    """``d x N`` frame whose Gram matrix is the rank-``d`` part of ``G``, columns normalized."""
    vals, vecs = _top_eigenpairs(G, d)
    X = np.sqrt(vals)[:, None] * vecs.conj().T
    P, _ = normalize_matrix(X)
    return Frame(P, normalized=True)


def alternating_projection(d: int, N: int, cfg: AltProjConfig | None = None,
                           rng: np.random.Generator | int | None = None) -> SolveResult:
    if d > N:
        raise ValueError("alternating projection needs d <= N")
    cfg = cfg or AltProjConfig()
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    t0 = time.perf_counter()
    mu = cfg.target(d, N)

    start = random_frame(d, N, rng)
    G = start.entries.conj().T @ start.entries
    best, best_coh = start, coherence(start)
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        H = structural_projection(G, mu)
        vals, vecs = _top_eigenpairs(H, d)
        G_next = (vecs * vals) @ vecs.conj().T
        try:
            P, _ = normalize_matrix(np.sqrt(vals)[:, None] * vecs.conj().T)
            cand = Frame(P, normalized=True)
            c = coherence(cand)
            if c < best_coh:
                best, best_coh = cand, c
        except ValueError:
            pass
        change = float(np.linalg.norm(G_next - G))
        G = G_next
        if change < cfg.tol:
            break

    summary = RestartSummary(index=0, seed=seed if seed is not None else -1, coherence=best_coh)
    echo = {"d": d, "N": N, "seed": seed, **asdict(cfg), "mu_target": mu, "iterations": iters}
    return SolveResult(best_frame=best, best_coherence=best_coh, per_restart=[summary],
                       config_echo=echo, wall_time=time.perf_counter() - t0, method="altproj")
