import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosynth.fth import FTHSetup, extract_sideband, fov_check, fth_reconstruct, fth_record, transmission


def autocorrelation(u):
    """Circular autocorrelation c(d) = sum_x u(x + d) conj(u(x)) by direct summation."""
    m, n = u.shape
    out = np.zeros((m, n), complex)
    for dy in range(m):
        for dx in range(n):
            acc = 0j
            for y in range(m):
                for x in range(n):
                    acc += u[(y + dy) % m, (x + dx) % n] * np.conj(u[y, x])
            out[dy, dx] = acc
    return out


def test_transmission_examples():
    np.testing.assert_array_equal(transmission(np.zeros((2, 2)), np.zeros((2, 2))), np.ones((2, 2)))
    a = np.zeros((2, 2))
    a[1, 0] = math.log(2)
    assert abs(transmission(a, np.zeros((2, 2)))[1, 0]) == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(transmission(np.zeros((2, 2)), np.full((2, 2), math.pi / 2)), 1j, atol=1e-15)


def test_transmission_errors():
    with pytest.raises(ValueError):
        transmission(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        transmission(-np.ones((2, 2)), np.zeros((2, 2)))


def test_record_impulse_is_flat():
    n = 8
    u = np.zeros((n, n), complex)
    u[0, 0] = 1
    np.testing.assert_allclose(fth_record(u), 1 / n**2, atol=1e-15)


def test_record_shift_invariance_and_parseval():
    rng = np.random.default_rng(0)
    u = rng.normal(size=(12, 10)) + 1j * rng.normal(size=(12, 10))
    rec = fth_record(u)
    np.testing.assert_allclose(fth_record(np.roll(u, (3, -2), axis=(0, 1))), rec, atol=1e-12)
    assert rec.min() >= 0
    assert rec.sum() == pytest.approx(np.sum(np.abs(u) ** 2), rel=1e-10)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_parseval_property(seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(9, 7)) + 1j * rng.normal(size=(9, 7))
    assert fth_record(u).sum() == pytest.approx(np.sum(np.abs(u) ** 2), rel=1e-10)


def test_reconstruct_constant_is_impulse():
    rec = fth_reconstruct(np.full((6, 6), 2.0))
    expected = np.zeros((6, 6))
    expected[0, 0] = 2.0 * 6
    np.testing.assert_allclose(rec, expected, atol=1e-12)


def test_reconstruct_impulse_pair_peaks():
    n, d = 16, 5
    u = np.zeros((n, n), complex)
    u[4, 3] = 1
    u[4, 3 + d] = 1
    mag = np.abs(fth_reconstruct(fth_record(u)))
    peaks = {tuple(p) for p in np.argwhere(mag > 1e-9)}
    assert peaks == {(0, 0), (0, d), (0, n - d)}


def test_reconstruction_is_autocorrelation_and_hermitian():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(6, 6))
    rec = fth_reconstruct(fth_record(u))
    np.testing.assert_allclose(rec * 6, autocorrelation(u.astype(complex)), atol=1e-12)
    flipped = np.roll(np.flip(rec, axis=(0, 1)), 1, axis=(0, 1))
    np.testing.assert_allclose(rec, np.conj(flipped), atol=1e-10)


def test_sideband_recovers_object():
    # object D = 3 px, reference 6 px away (L = 2 D > 1.5 D); 16x16 keeps all terms disjoint
    n = 16
    rng = np.random.default_rng(2)
    obj = rng.uniform(0.2, 1, (3, 3)) * np.exp(1j * rng.uniform(0, 2 * np.pi, (3, 3)))
    u = np.zeros((n, n), complex)
    u[3:6, 8:11] = obj
    u[4, 3] = 1.0
    rec = fth_reconstruct(fth_record(u))
    oracle = autocorrelation(u) / n
    np.testing.assert_allclose(rec, oracle, atol=1e-12)
    side = extract_sideband(rec, (0, 6), (3, 3))
    np.testing.assert_allclose(side, obj, atol=1e-8)


@pytest.mark.parametrize(
    "wl, z, dX, s0",
    [(532e-6, 1000.0, 3.74e-3, 142.246), (633e-6, 500.0, 5e-3, 63.3), (1e-3, 200.0, 2e-2, 10.0)],
)
def test_fov_s0(wl, z, dX, s0):
    rep = fov_check(FTHSetup(1.0, 2.0, dX, 1e-3, z, 64), wl)
    assert rep.fov_s0 == pytest.approx(s0, abs=5e-4)


def test_fov_boundaries_are_strict():
    s0 = 532e-6 * 1000 / 3.74e-3
    d = s0 / 4
    at = fov_check(FTHSetup(d, 1.5 * d, 3.74e-3, 1e-3, 1000, 64), 532e-6)
    assert not at.sampling_ok and not at.separation_ok
    inside = fov_check(FTHSetup(d * 0.999, 1.6 * d * 0.999, 3.74e-3, 1e-3, 1000, 64), 532e-6)
    assert inside.sampling_ok and inside.separation_ok


def test_fov_sampling_residual():
    wl, z, dX, n = 532e-6, 1000.0, 3.74e-3, 512
    dx = wl * z / (n * dX)
    assert fov_check(FTHSetup(1, 2, dX, dx, z, n), wl).sampling_residual == pytest.approx(0, abs=1e-15)


def test_setup_validation():
    with pytest.raises(ValueError):
        FTHSetup(0, 1, 1, 1, 1, 4)
    with pytest.raises(ValueError):
        FTHSetup(1, 1, 1, 1, 1, 1)
