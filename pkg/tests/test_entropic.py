import numpy as np
import pytest

from dbnot.constraints import DualBoundedSet, check_feasible
from dbnot.entropic import (
    KernelUnderflowError,
    default_delta,
    feasible_gradient_entropic,
    scale,
    shifted_kernel,
)
from dbnot.oracles import lp_minimum


def test_zero_gradient_vacuous_bounds():
    P = feasible_gradient_entropic(np.zeros((4, 2)), DualBoundedSet(4, 2, 0, 4), delta=0.1)
    assert np.allclose(P, 0.5, atol=1e-12)


def test_zero_gradient_balanced():
    P = feasible_gradient_entropic(np.zeros((2, 2)), DualBoundedSet(2, 2, 1, 1), delta=0.1)
    assert np.allclose(P, 0.5, atol=1e-12)


def test_small_delta_approaches_lp(rng):
    # gradients of unit range; range/delta far above ~745 underflows (see test_underflow_raises)
    om = DualBoundedSet(3, 2, 1, 2)
    for _ in range(50):
        G = rng.random((3, 2))
        lp, _ = lp_minimum(G, om)
        P = feasible_gradient_entropic(G, om, delta=1e-3)
        assert np.sum(G * P) - lp < 1e-2


def test_marginals(rng):
    for _ in range(20):
        om = DualBoundedSet(8, 3, float(rng.uniform(0, 2.5)), float(rng.uniform(3, 6)))
        P = feasible_gradient_entropic(rng.standard_normal((8, 3)) * 3, om)
        assert np.max(np.abs(P.sum(axis=1) - 1)) <= 1e-12
        assert P.min() >= 0
        cs = P.sum(axis=0)
        assert np.all(cs >= om.b_l - 1e-4) and np.all(cs <= om.b_u + 1e-4)


def test_scaling_clamps_hold(rng):
    om = DualBoundedSet(10, 3, 2.5, 4.0)
    st = scale(rng.standard_normal((10, 3)), om, delta=0.3)
    assert st.converged
    assert np.all(st.v >= 1.0) and np.all(st.w <= 1.0)


def test_delta_monotone(rng):
    om = DualBoundedSet(6, 3, 1, 3)
    for _ in range(20):
        G = rng.standard_normal((6, 3))
        vals = [np.sum(G * feasible_gradient_entropic(G, om, d)) for d in (0.4, 0.2, 0.1, 0.05)]
        assert np.all(np.diff(vals) <= 1e-9)


def test_row_shift_invariance(rng):
    om = DualBoundedSet(6, 2, 2, 4)
    G = rng.standard_normal((6, 2))
    shift = rng.standard_normal(6)[:, None] * 10
    P1 = feasible_gradient_entropic(G, om, 0.2)
    P2 = feasible_gradient_entropic(G + shift, om, 0.2)
    assert np.allclose(P1, P2, atol=1e-9)


def test_kernel_rows_keep_a_one(rng):
    K = shifted_kernel(rng.standard_normal((5, 4)) * 100, 0.01)
    assert np.allclose(K.max(axis=1), 1.0)


def test_default_delta():
    assert default_delta(np.array([[0.0, 2.0]])) == pytest.approx(0.1)


def test_underflow_raises():
    # column 1 is far worse for every row, yet must receive mass 2
    G = np.array([[0.0, 1e4], [0.0, 1e4], [0.0, 1e4], [0.0, 1e4]])
    with pytest.raises(KernelUnderflowError):
        feasible_gradient_entropic(G, DualBoundedSet(4, 2, 2, 2), delta=1e-2)


def test_invalid_inputs():
    om = DualBoundedSet(4, 2, 0, 4)
    with pytest.raises(ValueError):
        feasible_gradient_entropic(np.zeros((4, 2)), om, delta=0.0)
    with pytest.raises(ValueError):
        feasible_gradient_entropic(np.zeros((3, 2)), om, delta=0.1)
    with pytest.raises(ValueError):
        feasible_gradient_entropic(np.full((4, 2), np.nan), om, delta=0.1)


def test_feasible_after_solver_cleanup(rng):
    om = DualBoundedSet(12, 4, 2, 4)
    P = feasible_gradient_entropic(rng.standard_normal((12, 4)), om)
    assert check_feasible(P, om, 1e-6)
