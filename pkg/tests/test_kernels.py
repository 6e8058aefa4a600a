"""The compiled and numpy backends must agree exactly on identical inputs."""

import os
import subprocess
import sys

import numpy as np
import pytest

from holosynth import kernels

compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")


@compiled
@pytest.mark.parametrize("shape, k", [((5, 5), 3), ((8, 11), 3), ((9, 7), 5), ((16, 16), 7)])
@pytest.mark.parametrize("seed", range(3))
def test_median_parity(shape, k, seed):
    img = np.random.default_rng(seed).random(shape)
    pv, ps = kernels.python_backend.median2d_argmedian(img, k)
    cv, cs = kernels.compiled_backend.median2d_argmedian(img, k)
    np.testing.assert_array_equal(pv, cv)
    np.testing.assert_array_equal(ps, cs)


@compiled
def test_median_parity_with_ties():
    img = np.random.default_rng(0).integers(0, 3, (10, 10)).astype(float)
    pv, ps = kernels.python_backend.median2d_argmedian(img, 3)
    cv, cs = kernels.compiled_backend.median2d_argmedian(img, 3)
    np.testing.assert_array_equal(pv, cv)
    np.testing.assert_array_equal(ps, cs)


@compiled
def test_pointsource_parity():
    rng = np.random.default_rng(1)
    xs = (np.arange(12) - 6) * 3.74e-3
    ys = (np.arange(10) - 5) * 3.74e-3
    pts = np.column_stack([rng.uniform(-0.05, 0.05, 7), rng.uniform(-0.05, 0.05, 7), rng.uniform(1, 2, 7)])
    amp, ph = rng.random(7), rng.uniform(0, 2 * np.pi, 7)
    a = kernels.python_backend.pointsource_field(xs, ys, pts, amp, ph, 532e-6)
    b = kernels.compiled_backend.pointsource_field(xs, ys, pts, amp, ph, 532e-6)
    assert a.shape == (10, 12)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    if kernels.compiled_backend is not None and not os.environ.get("HOLOSYNTH_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"


def test_env_forces_python_backend():
    env = dict(os.environ, HOLOSYNTH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import holosynth; print(holosynth.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
