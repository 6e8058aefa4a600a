import numpy as np
import pytest

from holosynth import LayerStack, OpticalConfig
from holosynth.optim import grad_ch, grad_poh, loss_ch, loss_poh

WL, PITCH = 532e-6, 3.74e-3


def cfg(n, pad=2):
    return OpticalConfig(WL, PITCH, n, n, pad)


# --- straight-line oracle ------------------------------------------------------

def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def oracle_propagate(field, n, pad, z):
    """Band-limited ASM by explicit DFT matrices, padding and cropping written out."""
    big = n * pad
    off = (big - n) // 2
    padded = np.zeros((big, big), complex)
    padded[off : off + n, off : off + n] = field
    w = dft_matrix(big)
    spec = w @ padded @ w.T
    f = np.array([k / (big * PITCH) if k < big - big // 2 else (k - big) / (big * PITCH) for k in range(big)])
    limit = 1 / (WL * np.sqrt((2 * z / (big * PITCH)) ** 2 + 1))
    h = np.zeros((big, big), complex)
    for i in range(big):
        for j in range(big):
            arg = 1 / WL**2 - f[i] ** 2 - f[j] ** 2
            if arg > 0 and abs(f[i]) <= limit and abs(f[j]) <= limit:
                h[i, j] = np.exp(2j * np.pi * z * np.sqrt(arg))
    out = np.conj(w) @ (spec * h) @ np.conj(w).T
    return out[off : off + n, off : off + n]


def oracle_loss(recons, targets):
    total, count = 0.0, 0
    for r, t in zip(recons, targets):
        a, ta = np.abs(r), np.sqrt(t)
        s = np.sum(a * ta) / np.sum(a * a)
        total += np.sum((s * a - ta) ** 2)
        count += a.size
    return total / count


def random_stack(rng, n, planes=1):
    depths = tuple(np.sort(rng.uniform(0.2, 1.0, planes)) + 0.1 * np.arange(planes))
    return LayerStack(rng.random((planes, n, n)), depths)


def fd_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        g[idx] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# --- loss values ---------------------------------------------------------------

def test_poh_loss_matches_oracle():
    rng = np.random.default_rng(0)
    t = random_stack(rng, 8)
    phi = rng.uniform(0, 2 * np.pi, (8, 8))
    rec = [oracle_propagate(np.exp(1j * phi), 8, 2, t.depths[0])]
    assert loss_poh(phi, t, cfg(8)) == pytest.approx(oracle_loss(rec, t.intensities), rel=1e-12)


def test_ch_loss_matches_oracle():
    rng = np.random.default_rng(1)
    t = random_stack(rng, 8, planes=2)
    psi = rng.uniform(0, 2 * np.pi, (2, 8, 8))
    waves = [oracle_propagate(np.sqrt(t.intensities[j]) * np.exp(1j * psi[j]), 8, 2, -t.depths[j]) for j in range(2)]
    holo = (waves[0] + waves[1]) / 2
    rec = [oracle_propagate(holo, 8, 2, z) for z in t.depths]
    assert loss_ch(psi, t, cfg(8)) == pytest.approx(oracle_loss(rec, t.intensities), rel=1e-12)


def test_poh_loss_zero_at_self_consistent_target():
    rng = np.random.default_rng(2)
    phi0 = rng.uniform(0, 2 * np.pi, (8, 8))
    rec = np.abs(oracle_propagate(np.exp(1j * phi0), 8, 2, 0.5)) ** 2
    t = LayerStack((rec / rec.max())[None], (0.5,))
    assert loss_poh(phi0, t, cfg(8)) < 1e-25
    np.testing.assert_allclose(grad_poh(phi0, t, cfg(8)), 0, atol=1e-10)


def test_poh_loss_null_target_is_zero():
    t = LayerStack(np.zeros((1, 8, 8)), (0.5,))
    phi = np.random.default_rng(3).uniform(0, 6, (8, 8))
    assert loss_poh(phi, t, cfg(8)) == 0.0


def test_ch_zero_distance_identity():
    rng = np.random.default_rng(4)
    t = LayerStack(rng.random((1, 8, 8)), (0.0,))
    assert loss_ch(np.full((8, 8), 0.7), t, cfg(8)) < 1e-28


def test_ch_global_phase_gauge():
    rng = np.random.default_rng(5)
    t = random_stack(rng, 8, planes=2)
    psi = rng.uniform(0, 2 * np.pi, (2, 8, 8))
    assert loss_ch(psi + 1.234, t, cfg(8)) == pytest.approx(loss_ch(psi, t, cfg(8)), abs=1e-10)


def test_poh_gradient_periodic():
    rng = np.random.default_rng(6)
    t = random_stack(rng, 6)
    phi = rng.uniform(0, 2 * np.pi, (6, 6))
    shifted = phi.copy()
    shifted[2, 3] += 2 * np.pi
    np.testing.assert_allclose(grad_poh(shifted, t, cfg(6)), grad_poh(phi, t, cfg(6)), atol=1e-12)


# --- gradients vs finite differences -------------------------------------------

@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kernel", [None, 3])
def test_poh_gradient_multi_plane(seed, kernel):
    rng = np.random.default_rng(100 + seed)
    t = random_stack(rng, 6, planes=2)
    phi = rng.uniform(0, 2 * np.pi, (6, 6))
    g = grad_poh(phi, t, cfg(6), kernel)
    assert rel_err(g, fd_gradient(lambda p: loss_poh(p, t, cfg(6), kernel), phi)) < 1e-4


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kernel", [None, 3])
def test_ch_gradient_multi_plane(seed, kernel):
    rng = np.random.default_rng(200 + seed)
    t = random_stack(rng, 6, planes=2)
    psi = rng.uniform(0, 2 * np.pi, (2, 6, 6))
    g = grad_ch(psi, t, cfg(6), kernel)
    assert g.shape == psi.shape
    assert rel_err(g, fd_gradient(lambda p: loss_ch(p, t, cfg(6), kernel), psi)) < 1e-4


def test_ch_shared_phase_gradient():
    rng = np.random.default_rng(7)
    t = random_stack(rng, 6, planes=2)
    psi = rng.uniform(0, 2 * np.pi, (6, 6))
    g = grad_ch(psi, t, cfg(6))
    assert g.shape == (6, 6)
    assert rel_err(g, fd_gradient(lambda p: loss_ch(p, t, cfg(6)), psi)) < 1e-4


def test_loss_rejects_grid_mismatch():
    t = LayerStack(np.zeros((1, 6, 6)), (1.0,))
    with pytest.raises(ValueError):
        loss_poh(np.zeros((6, 6)), t, cfg(8))
