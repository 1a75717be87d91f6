import math

from scipy.integrate import trapezoid

import numpy as np
import pytest

from delayssm import (
    DDESystem,
    DelayKernel,
    InvalidSystem,
    NonlinearityJet,
    PolyTerm,
    PolynomialDDE,
    linearize,
    mono_exp_integrals,
    q_constant,
    systems,
    total_variation,
)


def test_kernel_transform_matches_quadrature():
    k = DelayKernel(2, 1.5, atoms=[(0.5, [[1, 2], [0, -1]])], densities=[(0.2, 1.5, [[[1, 0], [0, 2]], [[0, 1], [1, 0]]])])
    z = 0.3 - 1.7j
    s = np.linspace(0.2, 1.5, 20001)
    dens = np.array([[1, 0], [0, 2]])[None] + (s - 0.2)[:, None, None] * np.array([[0, 1], [1, 0]])[None]
    integrand = np.exp(-z * s)[:, None, None] * dens
    ref = trapezoid(integrand, s, axis=0) + np.exp(-z * 0.5) * np.array([[1, 2], [0, -1]])
    assert np.allclose(k.transform(z), ref, atol=1e-7)


def test_transform_derivative_by_differences():
    k = systems.cushing(-3.0).kernel
    z, eps = 0.7 + 2.0j, 1e-6
    fd = (k.transform(z + eps) - k.transform(z - eps)) / (2 * eps)
    assert np.allclose(k.transform_derivative(z), fd, atol=1e-8)


@pytest.mark.parametrize("z", [1e-9, 0.5 + 0.1j, 3.0 - 2.0j, 40.0 + 10.0j, -25.0])
def test_mono_exp_integrals_against_quad(z):
    from scipy.integrate import quad

    L = 1.3
    vals = mono_exp_integrals(3, z, L)
    for p in range(4):
        re = quad(lambda s: (s**p * np.exp(-z * s)).real, 0, L)[0]
        im = quad(lambda s: (s**p * np.exp(-z * s)).imag, 0, L)[0]
        assert abs(vals[p] - (re + 1j * im)) <= 1e-10 * max(1.0, abs(re + 1j * im))


def test_kernel_validation():
    with pytest.raises(InvalidSystem):
        DelayKernel(1, 1.0, atoms=[(1.5, -1.0)])
    with pytest.raises(InvalidSystem):
        DelayKernel(1, -1.0)
    with pytest.raises(InvalidSystem):
        DelayKernel(1, 1.0, densities=[(0.5, 0.2, [[[1.0]]])])


def test_total_variation_and_q():
    assert total_variation(systems.linear_atom(0.4).kernel) == pytest.approx(1.0)
    assert total_variation(systems.cushing(-3.0).kernel) == pytest.approx(3.0)
    assert q_constant(systems.sine_delay(0.1).kernel) == pytest.approx(1.0)
    assert q_constant(DelayKernel(2, 1.0)) == 0.0


def test_linearize_splits_and_is_idempotent():
    desc = PolynomialDDE(
        n=1,
        h=1.0,
        terms=(
            PolyTerm(-1.0, 0, ((-1.0, 0),)),
            PolyTerm(2.0, 0, ((0.0, 0), (-1.0, 0))),
            PolyTerm(-1.0, 0, ((0.0, 0), (0.0, 0), (0.0, 0))),
        ),
    )
    sys1 = linearize(desc)
    assert len(sys1.kernel.atoms) == 1 and sys1.kernel.atoms[0].tau == 1.0
    assert sys1.jet.lags == (0.0, -1.0)
    # symmetric split of the mixed quadratic term
    assert sys1.jet.Q()[0, 0, 1] == pytest.approx(1.0)
    v = np.array([0.3, -0.2])
    assert sys1.jet.evaluate(v)[0] == pytest.approx(2 * 0.3 * -0.2 - 0.3**3)
    assert linearize(sys1).same_as(sys1)


def test_linearize_rejects_nonzero_equilibrium_and_high_degree():
    with pytest.raises(InvalidSystem):
        linearize(PolynomialDDE(n=1, h=1.0, terms=(PolyTerm(1.0, 0, ()),)))
    with pytest.raises(InvalidSystem):
        linearize(PolynomialDDE(n=1, h=1.0, terms=(PolyTerm(1.0, 0, ((0.0, 0),) * 4),)))


def test_jet_symmetry_enforced():
    Q = np.zeros((1, 2, 2))
    Q[0, 0, 1] = 1.0
    with pytest.raises(InvalidSystem):
        NonlinearityJet(1, lags=(0.0, -1.0), quadratic=Q)


def test_modulus_bound_contains_roots():
    k = systems.cushing(-3.0).kernel
    from delayssm import roots_right_of

    sl = roots_right_of(-4.0, k)
    R = k.modulus_bound(-4.0)
    assert all(abs(z) <= R for z in sl.roots)


def test_ball_lipschitz_fallback():
    jet = systems.quadratic_delay(1.0, q=1.0, c=2.0).jet
    assert jet.ball_lipschitz(0.5) == pytest.approx(2 * 1 * 0.5 + 3 * 2 * 0.25)
    assert systems.cubic_delay(1.0).jet.ball_lipschitz(0.2) == pytest.approx(3 * 0.04)
