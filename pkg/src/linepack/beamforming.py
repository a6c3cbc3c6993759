"""MISO beamforming with a codebook: channel quantization, SNR and distortion.

Channels are ``h ~ CN(0, I_d)``; the receiver picks the codeword maximizing
``|<phi_i, h>|^2``, i.e. the one closest to ``h`` in chordal distance.
Distortion is the mean squared chordal distance between the channel's line
and its quantized codeword, estimated by Monte Carlo.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .frames import ZERO_COLUMN_TOL, Frame

BLOCK_SIZE = 1 << 15


class ZeroChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelModel:
    d: int
    noise_var: float = 1.0
    symbol_energy: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if not (self.noise_var > 0 and self.symbol_energy > 0):
            raise ValueError("noise_var and symbol_energy must be positive")

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` channels as columns of a ``d x count`` array."""
        scale = np.sqrt(0.5)
        return scale * (rng.standard_normal((self.d, count)) + 1j * rng.standard_normal((self.d, count)))


def quantize(codebook: Frame, h) -> int:
    """Index (0-based) of the codeword with the largest ``|<phi_i, h>|^2``; ties go to the smaller index."""
    h = np.asarray(h, dtype=np.complex128).ravel()
    if h.size != codebook.d:
        raise ValueError(f"channel has {h.size} entries, codebook dimension is {codebook.d}")
    if np.linalg.norm(h) < ZERO_COLUMN_TOL:
        raise ZeroChannelError("channel vector is (numerically) zero")
    gains = np.abs(codebook.entries.conj().T @ h) ** 2
    return int(np.argmax(gains))


def snr(beam, h, model: ChannelModel) -> float:
    """Received SNR ``|<beam, h>|^2 E_s / sigma``."""
    return float(abs(np.vdot(beam, h)) ** 2 * model.symbol_energy / model.noise_var)


def quantization_errors(codebook: Frame, H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel squared chordal error and selected index for channels in the columns of ``H``."""
    Hn = H / np.linalg.norm(H, axis=0)
    gains = np.abs(codebook.entries.conj().T @ Hn) ** 2
    idx = np.argmax(gains, axis=0)
    best = gains[idx, np.arange(H.shape[1])]
    return np.clip(1.0 - best, 0.0, 1.0), idx


def _block_sums(codebook_entries: np.ndarray, seed: int, block: int, count: int):
    codebook = Frame(codebook_entries)
    rng = np.random.default_rng([seed, block])
    H = ChannelModel(codebook.d).draw(rng, count)
    err, _ = quantization_errors(codebook, H)
    return float(np.sum(err)), float(np.sum(err * err))


def distortion_mc(codebook: Frame, samples: int, seed: int = 0, workers: int = 1
                  ) -> tuple[float, float]:
    """Monte-Carlo estimate of the mean squared chordal quantization error.

    Samples are drawn in fixed blocks of ``BLOCK_SIZE`` with block ``b``
    using the RNG stream ``[seed, b]``, so the estimate does not depend on
    ``workers``.  Returns ``(estimate, standard error)``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    counts = [BLOCK_SIZE] * (samples // BLOCK_SIZE)
    if samples % BLOCK_SIZE:
        counts.append(samples % BLOCK_SIZE)
    args = ([codebook.entries] * len(counts), [seed] * len(counts), range(len(counts)), counts)
    if workers > 1 and len(counts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(_block_sums, *args))
    else:
        sums = list(map(_block_sums, *args))
    total = sum(s for s, _ in sums)
    total_sq = sum(q for _, q in sums)
    mean = total / samples
    if samples == 1:
        return mean, float("nan")
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, float(np.sqrt(var / samples))


def mean_selected_snr(codebook: Frame, samples: int, model: ChannelModel, seed: int = 0) -> float:
    """Average SNR achieved by the quantized beam over random channels."""
    rng = np.random.default_rng([seed, 1 << 32])
    H = model.draw(rng, samples)
    gains = np.abs(codebook.entries.conj().T @ H) ** 2
    return float(np.mean(gains.max(axis=0)) * model.symbol_energy / model.noise_var)
