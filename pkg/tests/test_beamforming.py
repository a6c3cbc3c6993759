import math

import numpy as np
import pytest

from conftest import random_normalized, solved
from linepack.beamforming import (ChannelModel, ZeroChannelError, distortion_mc, quantization_errors,
                                  quantize, snr)
from linepack.frames import Frame, chordal_distance, identity_frame


def test_quantize_examples(sic):
    assert quantize(identity_frame(3), [0, 1, 0]) == 1
    for i in range(4):
        assert quantize(sic, sic.column(i) * 2.5j) == i
    s = 1 / math.sqrt(2)
    assert quantize(identity_frame(2), [s, s]) == 0


def test_quantize_errors():
    with pytest.raises(ZeroChannelError):
        quantize(identity_frame(2), [0, 0])
    with pytest.raises(ValueError):
        quantize(identity_frame(2), [1, 0, 0])


def test_quantize_matches_min_chordal(rng):
    book = random_normalized(rng, 3, 8)
    model = ChannelModel(3)
    H = model.draw(rng, 500)
    for h in H.T:
        by_gain = quantize(book, h)
        hn = h / np.linalg.norm(h)
        dists = [chordal_distance(book.column(i), hn) for i in range(8)]
        assert dists[by_gain] <= min(dists) + 1e-12


def test_snr_examples(rng):
    h = np.array([1 + 1j, 2.0])
    model = ChannelModel(2, noise_var=0.5, symbol_energy=2.0)
    assert snr(np.array([2.0, -1 + 1j]) / math.sqrt(6), h, model) == pytest.approx(
        abs(np.vdot([2.0, -1 + 1j], h)) ** 2 / 6 * 4)
    assert snr(np.array([1, -1j]) / math.sqrt(2), np.array([1, 1j]), model) == pytest.approx(0, abs=1e-15)
    assert snr(h / np.linalg.norm(h), h, model) == pytest.approx(np.linalg.norm(h) ** 2 * 4)
    unit = ChannelModel(2, 1.3, 1.3)
    assert snr(np.array([1, 0]), h, unit) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        ChannelModel(2, noise_var=0)


def test_channel_statistics():
    H = ChannelModel(4).draw(np.random.default_rng(0), 200_000)
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, abs=0.01)


def test_per_sample_identity(rng):
    book = solved(2, 4).best_frame
    H = ChannelModel(2).draw(rng, 2000)
    err, idx = quantization_errors(book, H)
    for k in range(0, 2000, 7):
        hn = H[:, k] / np.linalg.norm(H[:, k])
        assert abs(err[k] - chordal_distance(hn, book.column(idx[k])) ** 2) <= 1e-12


def test_single_codeword_distortion_half():
    # Oracle: on the Bloch sphere |<phi, psi>|^2 = (1 + n.m)/2, so d_c^2 = (1 - n.m)/2
    # averaged over uniform m on S^2.
    oracle_rng = np.random.default_rng(2024)
    m = oracle_rng.standard_normal((200_000, 3))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    oracle = np.mean((1 - m[:, 2]) / 2)
    est, se = distortion_mc(Frame(np.array([[1.0], [0.0]]), normalized=True), 200_000, seed=1)
    assert abs(est - oracle) <= 4 * math.hypot(se, np.std((1 - m[:, 2]) / 2) / math.sqrt(m.shape[0]))
    assert est == pytest.approx(0.5, abs=0.005)


def test_dense_codebook_small_distortion():
    sparse_est, _ = distortion_mc(random_normalized(np.random.default_rng(1), 2, 10), 20_000, seed=3)
    dense_est, _ = distortion_mc(random_normalized(np.random.default_rng(1), 2, 1000), 20_000, seed=3)
    assert dense_est < 0.1 * sparse_est
    assert dense_est < 0.01


def test_nested_codebooks(rng):
    big = random_normalized(rng, 3, 12)
    small = Frame(big.entries[:, :5], normalized=True)
    e_big, se_big = distortion_mc(big, 50_000, seed=9)
    e_small, se_small = distortion_mc(small, 50_000, seed=9)
    assert e_big <= e_small + 2 * se_big


def test_estimator_properties():
    book = solved(2, 4).best_frame
    e1, s1 = distortion_mc(book, 40_000, seed=2)
    e2, s2 = distortion_mc(book, 160_000, seed=2)
    assert 0 <= e1 <= 1 and 0 <= e2 <= 1
    assert s1 / s2 == pytest.approx(2.0, rel=0.3)
    assert distortion_mc(book, 40_000, seed=2) == (e1, s1)


def test_shard_count_independence():
    book = identity_frame(2)
    n = 3 * (1 << 15) + 17
    assert distortion_mc(book, n, seed=4, workers=1) == distortion_mc(book, n, seed=4, workers=2)


def test_rejects_zero_samples():
    with pytest.raises(ValueError):
        distortion_mc(identity_frame(2), 0)
