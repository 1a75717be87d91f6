import math

import numpy as np
import pytest

import oracles
from delayssm import (
    DegenerateHopf,
    ResolventPole,
    WrongSigmaShape,
    expansion_coeffs,
    invariance_residual,
    manifold_eval,
    normal_form,
    periodic_orbit,
    predict_limit_cycle,
    reduce_planar,
    reduce_real,
    roots_right_of,
    systems,
)

H_HOPF = math.pi / 2 + 0.05


@pytest.fixture(scope="module")
def cushing_real():
    s = systems.cushing(-0.3)
    return expansion_coeffs(s, roots_right_of(-1.0, s.kernel))


@pytest.fixture(scope="module")
def cushing_pair():
    s = systems.cushing(-3.0)
    return expansion_coeffs(s, roots_right_of(-1.0, s.kernel))


@pytest.fixture(scope="module")
def hopf():
    s = systems.cubic_delay(H_HOPF)
    return expansion_coeffs(s, roots_right_of(-0.5, s.kernel))


def test_invariance_residual_small(cushing_real, cushing_pair, hopf):
    for m in (cushing_real, cushing_pair, hopf):
        assert invariance_residual(m).max_relative <= 1e-8


def test_no_quadratic_terms_for_odd_nonlinearity(cushing_pair):
    for mono, v in cushing_pair.H.items():
        if sum(mono) == 2:
            assert np.abs(v).max() == 0


def test_real_reduction_scale_invariant(cushing_real):
    # ydot = lam y + c3 y^3 with c3 / c^2 = xi * a / 6 independent of the eigenvector scale
    lam, c3 = reduce_real(cushing_real)
    c = cushing_real.eigen[0].c[0].real
    assert lam == pytest.approx(oracles.cushing_root(-0.4, -0.3).real, abs=1e-10)
    assert c3 / c**2 == pytest.approx(oracles.cushing_xi(lam, -0.3).real / 6, rel=1e-9)


def test_hopf_amplitude_matches_first_lyapunov_formula(hopf):
    # for xdot = -x(t-h) - x^3 the physical amplitude at theta = 0 is 2 sqrt(Re lam / (3 Re xi))
    lam = oracles.atom_roots(H_HOPF)[2]
    lam = complex(lam.real, abs(lam.imag))
    xi = oracles.atom_xi(lam, H_HOPF)
    nf = normal_form(hopf)
    cyc = predict_limit_cycle(nf)
    c = abs(hopf.eigen[0].c[0])
    assert nf.lam1 == pytest.approx(lam, abs=1e-10)
    assert 2 * cyc.r_hat * c == pytest.approx(2 * math.sqrt(lam.real / (3 * xi.real)), rel=1e-9)
    assert nf.beta21 == pytest.approx(3 * c**2 * xi, rel=1e-9)
    assert cyc.stable and cyc.exists
    assert cyc.omega == pytest.approx(lam.imag - nf.beta21.imag * cyc.r_hat**2, rel=1e-12)


def test_planar_field_linear_part(cushing_pair):
    A = reduce_planar(cushing_pair).linear_part()
    lam = cushing_pair.lambdas[0]
    assert np.allclose(np.sort_complex(np.linalg.eigvals(A)), np.sort_complex([lam, lam.conjugate()]), atol=1e-12)


def test_shape_errors(cushing_real, cushing_pair):
    with pytest.raises(WrongSigmaShape):
        reduce_planar(cushing_real)
    with pytest.raises(WrongSigmaShape):
        reduce_real(cushing_pair)
    with pytest.raises(WrongSigmaShape):
        normal_form(cushing_real)


def test_resolvent_pole_detected():
    # decoupled rates -1 and -3: the cubic monomial 3 * (-1) lands on the second root
    with pytest.raises(ResolventPole):
        _force_pole()


def _force_pole():
    from delayssm import PolyTerm, PolynomialDDE, linearize

    desc = PolynomialDDE(
        n=2,
        h=1.0,
        terms=(
            PolyTerm(-1.0, 0, ((0.0, 0),)),
            PolyTerm(-3.0, 1, ((0.0, 1),)),
            PolyTerm(1.0, 1, ((0.0, 0), (0.0, 0), (0.0, 0))),
        ),
    )
    expansion_coeffs(linearize(desc), [-1.0])


def test_manifold_eval_real_and_tangent(cushing_pair):
    th = np.linspace(-1, 0, 50)
    eps = 1e-4
    x = manifold_eval(cushing_pair, eps, theta=th)
    lin = 2 * (eps * cushing_pair.eigen[0].eigenfunction()(th)).real
    assert x.dtype == float
    assert np.abs(x - lin).max() < 10 * eps**3


def test_periodic_orbit_amplitude(hopf):
    nf = normal_form(hopf)
    cyc = predict_limit_cycle(nf)
    t = np.linspace(0, cyc.period, 200)
    x = periodic_orbit(nf, t, cyc)[:, 0]
    c = abs(hopf.eigen[0].c[0])
    assert 0.5 * (x.max() - x.min()) == pytest.approx(2 * cyc.r_hat * c, rel=0.05)


def test_subcritical_has_no_cycle():
    s = systems.cubic_delay(math.pi / 2 - 0.05)
    m = expansion_coeffs(s, roots_right_of(-0.5, s.kernel))
    cyc = predict_limit_cycle(normal_form(m))
    assert not cyc.exists and cyc.period is None
    with pytest.raises(DegenerateHopf):
        periodic_orbit(normal_form(m), [0.0])


def test_degenerate_hopf_without_cubic():
    s = systems.linear_atom(H_HOPF)
    m = expansion_coeffs(s, roots_right_of(-0.5, s.kernel))
    with pytest.raises(DegenerateHopf):
        predict_limit_cycle(normal_form(m))


def test_inner_resonance_marked():
    from delayssm import NotComputed, PolynomialDDE, PolyTerm, linearize

    # undamped oscillator: (2, 1) . (i, -i) = i, so the graph form is blocked at that monomial
    desc = PolynomialDDE(
        n=2,
        h=1.0,
        terms=(
            PolyTerm(1.0, 0, ((0.0, 1),)),
            PolyTerm(-1.0, 1, ((0.0, 0),)),
            PolyTerm(1.0, 1, ((0.0, 0), (0.0, 0), (0.0, 0))),
        ),
    )
    m = expansion_coeffs(linearize(desc), [1j, -1j])
    assert (2, 1) in m.resonant
    with pytest.raises(NotComputed):
        normal_form(m)
