"""Complex unit-norm configurations (frames) and their Gram geometry.

A frame is a ``d x N`` complex matrix whose columns represent lines in
``C^d``.  The optimizer sees a frame as a flat real vector of length ``2dN``
laid out column by column with real and imaginary parts interleaved, which is
the same ordering used by the JSON frame file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZERO_COLUMN_TOL = 1e-12
DEFAULT_CLUSTER_TOL = 1e-4


class ZeroColumnError(ValueError):
    """Raised when a column is too short to be normalized."""

    def __init__(self, index: int, norm: float):
        super().__init__(f"column {index} has norm {norm:.3e} < {ZERO_COLUMN_TOL:g}")
        self.index = index
        self.norm = norm


@dataclass(frozen=True, eq=False)
class Frame:
    """An ordered collection of ``N`` vectors in ``C^d`` stored as a ``d x N`` array."""

    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"frame entries must be a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        if self.normalized:
            norms = np.linalg.norm(arr, axis=0)
            if np.any(np.abs(norms - 1.0) > 1e-12):
                raise ValueError("frame marked normalized has a column norm off 1 by more than 1e-12")

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def to_vector(self) -> np.ndarray:
        """Flatten to the real optimizer vector (column-major, re/im interleaved)."""
        return np.ascontiguousarray(self.entries.T).view(np.float64).ravel().copy()

    @classmethod
    def from_vector(cls, vec: np.ndarray, d: int, N: int, normalized: bool = False) -> "Frame":
        return cls(vector_to_matrix(vec, d, N), normalized=normalized)

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def drop_column(self, j: int) -> "Frame":
        return Frame(np.delete(self.entries, j, axis=1), normalized=self.normalized)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.entries.shape == other.entries.shape and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"Frame(d={self.d}, N={self.N}, normalized={self.normalized})"


def vector_to_matrix(vec: np.ndarray, d: int, N: int) -> np.ndarray:
    """Inverse of :meth:`Frame.to_vector`; returns a fresh ``d x N`` complex array."""
    vec = np.ascontiguousarray(vec, dtype=np.float64)
    if vec.size != 2 * d * N:
        raise ValueError(f"expected vector of length {2 * d * N}, got {vec.size}")
    return vec.view(np.complex128).reshape(N, d).T.copy()


def matrix_to_vector(mat: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(mat.T, dtype=np.complex128).view(np.float64).ravel().copy()


def column_norms(mat: np.ndarray) -> np.ndarray:
    """Column norms with a fixed summation order (no BLAS dispatch)."""
    return np.sqrt(np.sum(mat.real**2 + mat.imag**2, axis=0))


def normalize_matrix(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(unit-column matrix, norms)``; raises :class:`ZeroColumnError`."""
    norms = column_norms(mat)
    bad = np.flatnonzero(norms < ZERO_COLUMN_TOL)
    if bad.size:
        raise ZeroColumnError(int(bad[0]), float(norms[bad[0]]))
    return mat / norms, norms


def normalize_columns(frame: Frame) -> Frame:
    """Scale each column to unit Euclidean norm."""
    unit, _ = normalize_matrix(frame.entries)
    return Frame(unit, normalized=True)


@dataclass(frozen=True)
class GramSummary:
    offdiag_mags: np.ndarray
    coherence: float
    angle_spectrum: list[float] = field(default_factory=list)


def gram_matrix(frame: Frame) -> np.ndarray:
    X = frame.entries
    return X.conj().T @ X


def offdiag_magnitudes(frame: Frame) -> np.ndarray:
    """``|<phi_j, phi_k>|`` for ``j < k`` in row-major upper-triangular order."""
    G = gram_matrix(frame)
    iu = np.triu_indices(frame.N, 1)
    return np.abs(G[iu])


def cluster_values(values, cluster_tol: float) -> list[float]:
    """Single-linkage clustering of a sorted list; returns each cluster's mean."""
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(vals) > cluster_tol) + 1
    return [float(np.mean(chunk)) for chunk in np.split(vals, breaks)]


def angle_spectrum(frame: Frame, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[float]:
    """Distinct off-diagonal Gram magnitudes after clustering within ``cluster_tol``.

    A frame with a single vector has no pairs; its spectrum is ``[0.0]`` by
    convention so that it reads as a (trivial) one-distance set.
    """
    mags = offdiag_magnitudes(frame)
    if mags.size == 0:
        return [0.0]
    return cluster_values(mags, cluster_tol)


def gram_summary(frame: Frame, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> GramSummary:
    mags = offdiag_magnitudes(frame)
    coh = float(mags.max()) if mags.size else 0.0
    spec = cluster_values(mags, cluster_tol) if mags.size else [0.0]
    return GramSummary(offdiag_mags=mags, coherence=coh, angle_spectrum=spec)


def coherence(frame: Frame) -> float:
    """Largest off-diagonal Gram magnitude of a normalized frame."""
    mags = offdiag_magnitudes(frame)
    return float(mags.max()) if mags.size else 0.0


def chordal_distance(x, y) -> float:
    """``sqrt(1 - |<x, y>|^2)`` between unit representatives of two lines."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    y = np.asarray(y, dtype=np.complex128).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    ip = abs(np.vdot(x, y)) ** 2
    return float(np.sqrt(min(1.0, max(0.0, 1.0 - ip))))


def identity_frame(d: int) -> Frame:
    return Frame(np.eye(d, dtype=np.complex128), normalized=True)


def sic_d2() -> Frame:
    """The four-element SIC in ``C^2`` built from a regular tetrahedron on the Bloch sphere."""
    # Bloch vectors of a regular tetrahedron; |psi> = (cos(t/2), e^{i p} sin(t/2)).
    verts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / np.sqrt(3)
    cols = []
    for x, y, z in verts:
        theta = np.arccos(z)
        phi = np.arctan2(y, x)
        cols.append([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return normalize_columns(Frame(np.array(cols).T))
