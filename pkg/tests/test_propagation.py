import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosynth import Model, OpticalConfig, PropagationModel, propagate
from holosynth.propagation import (
    asm_transfer,
    band_limit,
    crop,
    fft2,
    fresnel_psf,
    lens_focal_phase,
    pad,
    propagate_adjoint,
)

WL, PITCH = 532e-6, 3.74e-3


def cfg(n=16, pad_factor=2):
    return OpticalConfig(WL, PITCH, n, n, pad_factor)


def rand_field(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def band_limited_field(rng, config, z):
    """Random field whose spectrum lies inside the ASM passband for distance ``z``."""
    spectrum = rand_field(rng, config.shape)
    fy = np.fft.fftfreq(config.ny, PITCH)[:, None]
    fx = np.fft.fftfreq(config.nx, PITCH)[None, :]
    fly, flx = band_limit(config, z)
    spectrum[(np.abs(fx) > flx) | (np.abs(fy) > fly)] = 0
    return np.fft.ifft2(spectrum)


# --- unitary FFT ---------------------------------------------------------------

def test_fft_of_impulse_is_flat():
    d = np.zeros((4, 4), complex)
    d[0, 0] = 1
    np.testing.assert_allclose(np.abs(fft2(d)), 0.25, atol=1e-15)


def test_fft_of_constant_is_scaled_impulse():
    c, n = 0.7 - 0.2j, 6
    out = fft2(np.full((n, n), c))
    expected = np.zeros((n, n), complex)
    expected[0, 0] = c * n
    np.testing.assert_allclose(out, expected, atol=1e-13)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(2, 12))
def test_fft_is_unitary(seed, m, n):
    f = rand_field(np.random.default_rng(seed), (m, n))
    g = fft2(f)
    assert np.linalg.norm(g) == pytest.approx(np.linalg.norm(f), rel=1e-12)
    np.testing.assert_allclose(fft2(g, "inverse"), f, atol=1e-12)


def test_fft_rejects_tiny_grid_and_bad_direction():
    with pytest.raises(ValueError):
        fft2(np.ones((1, 4)))
    with pytest.raises(ValueError):
        fft2(np.ones((4, 4)), "sideways")


def test_pad_crop_inverse():
    f = np.arange(12.0).reshape(3, 4)
    p = pad(f, (7, 8))
    assert p.shape == (7, 8) and p.sum() == f.sum()
    np.testing.assert_array_equal(crop(p, (3, 4)), f)


# --- ASM transfer --------------------------------------------------------------

def test_asm_transfer_identity_at_zero():
    np.testing.assert_array_equal(asm_transfer(cfg(), 0.0), np.ones(cfg().padded_shape))


@pytest.mark.parametrize("z", [0.3, 1.0, 4.0])
def test_asm_transfer_inverse_and_modulus(z):
    h, hm = asm_transfer(cfg(), z), asm_transfer(cfg(), -z)
    passing = h != 0
    np.testing.assert_allclose((h * hm)[passing], 1.0, atol=1e-12)
    np.testing.assert_array_equal(passing, hm != 0)
    mod = np.abs(h)
    assert np.all((np.abs(mod - 1) < 1e-12) | (mod == 0))


def test_asm_band_limit_shrinks_with_distance():
    near, far = band_limit(cfg(), 0.5), band_limit(cfg(), 5.0)
    assert far[0] < near[0] < 1 / WL
    assert np.count_nonzero(asm_transfer(cfg(), 5.0)) < np.count_nonzero(asm_transfer(cfg(), 0.5))


def test_asm_transfer_is_read_only():
    with pytest.raises(ValueError):
        asm_transfer(cfg(), 1.0)[0, 0] = 0


# --- Fresnel PSF ---------------------------------------------------------------

def test_fresnel_psf_centre_and_modulus():
    c, z = cfg(8), 2.0
    h = fresnel_psf(c, z)
    centre = tuple(n // 2 for n in c.padded_shape)
    assert h[centre] == pytest.approx(-1j / (WL * z), rel=1e-14)
    np.testing.assert_allclose(np.abs(h), 1 / (WL * z), rtol=1e-12)


def test_fresnel_psf_negative_distance_is_conjugate():
    # h(-z) = conj(h(z)): the prefactor and the chirp both flip sign under conjugation
    c = cfg(4)
    np.testing.assert_allclose(fresnel_psf(c, -1.5), np.conj(fresnel_psf(c, 1.5)), rtol=1e-13)


def test_fresnel_rejects_zero_distance():
    with pytest.raises(ValueError, match="undefined at z=0; use ASM"):
        fresnel_psf(cfg(), 0.0)
    with pytest.raises(ValueError, match="use ASM"):
        propagate(np.ones(cfg().shape), cfg(), PropagationModel(Model.FRESNEL, 0.0))


# --- propagate -----------------------------------------------------------------

def test_propagation_model_validation():
    with pytest.raises(ValueError):
        PropagationModel(Model.ASM, float("inf"))
    assert PropagationModel("Fresnel", 2).reversed() == PropagationModel(Model.FRESNEL, -2.0)


@pytest.mark.parametrize("pad_factor", [1, 2])
def test_asm_zero_distance_identity(pad_factor):
    c = cfg(pad_factor=pad_factor)
    f = rand_field(np.random.default_rng(0), c.shape)
    np.testing.assert_allclose(propagate(f, c, PropagationModel(Model.ASM, 0.0)), f, atol=1e-12, rtol=0)


@pytest.mark.parametrize("z", [0.2, 0.8, 2.0, 6.0])
def test_asm_round_trip_band_limited(z):
    c = cfg(32, pad_factor=1)
    f = band_limited_field(np.random.default_rng(1), c, z)
    back = propagate(propagate(f, c, PropagationModel(Model.ASM, z)), c, PropagationModel(Model.ASM, -z))
    np.testing.assert_allclose(back, f, atol=1e-10, rtol=0)


def test_asm_preserves_energy_of_low_frequency_gaussian():
    c = cfg(64)
    y, x = np.mgrid[:64, :64] - 32
    g = np.exp(-(x**2 + y**2) / (2 * 6.0**2))
    out = propagate(g, c, PropagationModel(Model.ASM, 1.0))
    assert np.sum(np.abs(out) ** 2) == pytest.approx(np.sum(g**2), rel=1e-6)


def test_fresnel_matches_asm_paraxially():
    # waist^2 / lambda ~ 0.95 mm, so z = 5 mm is well inside the Fresnel regime
    c = cfg(64)
    y, x = np.mgrid[:64, :64] - 32
    g = np.exp(-(x**2 + y**2) / (2 * 6.0**2)).astype(complex)
    a = propagate(g, c, PropagationModel(Model.ASM, 5.0))
    f = propagate(g, c, PropagationModel(Model.FRESNEL, 5.0))
    # the Fresnel kernel omits the exp(ikz) carrier; compare modulo a global phase
    gauge = np.vdot(f, a)
    f = f * gauge / abs(gauge)
    rms = np.sqrt(np.mean(np.abs(a - f) ** 2) / np.mean(np.abs(a) ** 2))
    assert rms < 0.02


@pytest.mark.parametrize("model", [Model.ASM, Model.FRESNEL])
def test_adjoint_identity(model):
    rng = np.random.default_rng(2)
    c = cfg(16)
    pm = PropagationModel(model, 1.3)
    u, v = rand_field(rng, c.shape), rand_field(rng, c.shape)
    lhs = np.vdot(propagate(u, c, pm), v)
    rhs = np.vdot(u, propagate_adjoint(v, c, pm))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_asm_adjoint_equals_backward():
    c = cfg(16)
    f = rand_field(np.random.default_rng(3), c.shape)
    np.testing.assert_allclose(
        propagate_adjoint(f, c, PropagationModel(Model.ASM, 0.7)),
        propagate(f, c, PropagationModel(Model.ASM, -0.7)),
        atol=1e-13,
    )


def test_propagate_batches_and_checks_grid():
    c = cfg(8)
    rng = np.random.default_rng(4)
    batch = rand_field(rng, (3, 8, 8))
    pm = PropagationModel(Model.ASM, 0.5)
    out = propagate(batch, c, pm)
    np.testing.assert_allclose(out[1], propagate(batch[1], c, pm), atol=1e-14)
    with pytest.raises(ValueError):
        propagate(np.ones((4, 8)), c, pm)


# --- lens ----------------------------------------------------------------------

def test_lens_phase():
    c, f = cfg(8), 3.74e-3
    lens = lens_focal_phase(c, f)
    assert lens[4, 4] == 1
    np.testing.assert_allclose(np.abs(lens), 1, atol=1e-15)
    expected = -math.pi * PITCH**2 / (WL * f)
    assert np.angle(lens[4, 5] / np.exp(1j * expected)) == pytest.approx(0, abs=1e-9)
    with pytest.raises(ValueError):
        lens_focal_phase(c, 0)
