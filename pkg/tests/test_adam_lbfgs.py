import numpy as np
import pytest

from holosynth.optim import AdamState, LBFGSHistory, adam_step, lbfgs_step, two_loop
from holosynth.optim.lbfgs import LBFGS, armijo, minimize

# --- Adam ----------------------------------------------------------------------


def test_adam_first_step_is_signed_lr():
    g = np.array([3.0, -0.2, 1e-3])
    state, p = adam_step(AdamState.zeros_like(g), np.zeros(3), g, lr=0.05)
    np.testing.assert_allclose(p, -0.05 * np.sign(g), rtol=1e-4)
    assert state.t == 1


def test_adam_zero_gradient_is_stationary():
    p0 = np.array([1.0, -2.0])
    state, p = AdamState.zeros_like(p0), p0
    for _ in range(5):
        state, p = adam_step(state, p, np.zeros(2), lr=0.1)
    np.testing.assert_array_equal(p, p0)


def test_adam_two_steps_g_then_minus_g():
    lr, g = 0.1, np.array([0.7])
    s1, p1 = adam_step(AdamState.zeros_like(g), np.zeros(1), g, lr)
    s2, p2 = adam_step(s1, p1, -g, lr)
    assert s2.v[0] > 0
    # m_hat = -0.01 g / 0.19 and v_hat = g^2, so the second step is lr / 19
    assert abs(p2[0] - p1[0]) == pytest.approx(lr / 19, rel=1e-6)
    assert abs(p2[0] - p1[0]) < lr


def test_adam_shape_check():
    with pytest.raises(ValueError):
        adam_step(AdamState.zeros_like(np.zeros(3)), np.zeros(3), np.zeros(4), 0.1)


# --- L-BFGS --------------------------------------------------------------------

A = np.array([[3.0, 1.0], [1.0, 2.0]])


def quad(x):
    return 0.5 * float(x @ A @ x), A @ x


def test_empty_history_is_steepest_descent():
    g = np.array([1.0, -2.0, 0.5])
    d, hist, fell = lbfgs_step(LBFGSHistory(5), g)
    np.testing.assert_array_equal(d, -g)
    assert not fell


def test_quadratic_converges_in_ten_iterations():
    opt = minimize(quad, np.array([4.0, -3.0]), iterations=10, memory=5)
    assert np.linalg.norm(opt.x) < 1e-8
    assert opt.fallbacks == 0 and opt.failed_searches == 0


def test_exact_pairs_give_newton_direction():
    # A-conjugate steps make the two-loop product equal A^{-1} once the space is spanned
    _, vecs = np.linalg.eigh(A)
    hist = LBFGSHistory(5)
    for s in vecs.T:
        assert hist.update(s, A @ s)
    g = np.array([0.3, -1.1])
    np.testing.assert_allclose(two_loop(hist, g), -np.linalg.solve(A, g), atol=1e-8)


def test_curvature_pairs_skipped():
    hist = LBFGSHistory(3)
    assert not hist.update(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert not hist.update(np.array([1.0, 0.0]), np.array([1e-11, 0.0]))
    assert len(hist) == 0


def test_history_is_bounded():
    hist = LBFGSHistory(2)
    for k in range(5):
        hist.update(np.array([1.0, k]), np.array([1.0, k]))
    assert len(hist) == 2


def test_non_descent_direction_falls_back():
    hist = LBFGSHistory(3)
    # valid pairs always give descent, so inject a negative-curvature pair directly
    hist.pairs.append((np.array([1.0, 0.0]), np.array([-1.0, 0.0]), -1.0))
    g = np.array([1.0, 0.0])
    d, hist, fell = lbfgs_step(hist, g)
    assert fell and len(hist) == 0
    np.testing.assert_array_equal(d, -g)


def test_armijo_accepts_and_fails():
    f = lambda x: float(x @ x)
    x = np.array([1.0])
    step, x_new, f_new = armijo(f, x, 1.0, np.array([2.0]), np.array([-2.0]))
    assert f_new <= 1.0 + 1e-4 * step * -4.0
    assert armijo(f, x, 1.0, np.array([2.0]), np.array([2.0])) is None


def test_failed_search_counted():
    # a function whose reported gradient is wrong never satisfies Armijo
    opt = LBFGS(lambda x: (float(x @ x), -2 * x), np.array([1.0, 1.0]))
    opt.step()
    assert opt.failed_searches == 1
    np.testing.assert_array_equal(opt.x, [1.0, 1.0])
