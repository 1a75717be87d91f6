"""Randomized invariants of the numerical building blocks."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from delayssm import (
    BoundaryRoot,
    CharMatrix,
    DelayKernel,
    RhoParams,
    count_roots_in_rect,
    distance_to_manifold,
    eigen_data,
    expansion_coeffs,
    integrate,
    manifold_eval,
    project_history,
    rho_decay_rate,
    roots_right_of,
    systems,
    xi_residue,
)

SETTINGS = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])

coef = st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 0.05)
delay = st.floats(0.3, 2.0)


def _kernel(b_atom, b_dens, h):
    return DelayKernel(1, h, atoms=[(h, b_atom)], densities=[(0.0, h, [[[b_dens]]])])


@SETTINGS
@given(coef, coef, delay)
def test_roots_closed_under_conjugation(b1, b2, h):
    sl = roots_right_of(-2.0, _kernel(b1, b2, h), depth=2.0)
    others = np.array(sl.others)
    for z in others:
        assert np.abs(others - np.conj(z)).min() <= 1e-9 * max(1.0, abs(z))
    roots = np.array(sl.roots)
    for z in roots:
        assert np.abs(roots - np.conj(z)).min() <= 1e-9 * max(1.0, abs(z))


@SETTINGS
@given(coef, coef, delay, st.floats(0.1, 0.9))
def test_winding_count_additive(b1, b2, h, frac):
    k = _kernel(b1, b2, h)
    x0, x1, y0, y1 = -2.0, 1.5, -7.0, 9.0
    cut = y0 + frac * (y1 - y0)
    try:
        whole = count_roots_in_rect((x0, x1, y0, y1), k)
        lower = count_roots_in_rect((x0, x1, y0, cut), k)
        upper = count_roots_in_rect((x0, x1, cut, y1), k)
    except BoundaryRoot:
        assume(False)
    assert whole == lower + upper


@SETTINGS
@given(coef, coef, delay, st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 4))
def test_projection_idempotent(b1, b2, h, p, q, w):
    k = _kernel(b1, b2, h)
    sl = roots_right_of(-1.5, k)
    assume(sl.roots and sl.all_simple)
    lam = sl.roots[-1]
    u = lambda th: p * np.cos(w * th) + q * th**2  # noqa: E731
    once = project_history(lam, u, k)
    twice = project_history(lam, once, k)
    th = np.linspace(-h, 0, 17)
    scale = max(1.0, np.abs(once(th)).max())
    assert np.abs(twice(th) - once(th)).max() <= 1e-8 * scale


@SETTINGS
@given(coef, coef, delay)
def test_xi_is_reciprocal_derivative(b1, b2, h):
    k = _kernel(b1, b2, h)
    sl = roots_right_of(-1.5, k)
    assume(sl.roots and sl.all_simple)
    lam = sl.roots[-1]

    def det(z):
        # independent closed form of det Delta for a scalar atom plus constant density
        tail = b2 * h if z == 0 else b2 * (1 - mpmath.exp(-z * h)) / z
        return z - b1 * mpmath.exp(-z * h) - tail

    ref = 1 / complex(mpmath.diff(det, mpmath.mpc(lam.real, lam.imag)))
    got = complex(xi_residue(lam, k)[0, 0])
    assert abs(got - ref) <= 1e-6 * abs(ref)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.2, 5.0),
    st.floats(-5.0, -0.1),
    st.floats(0.05, 3.0),
    st.floats(0.2, 3.0),
    st.floats(0.2, 3.0),
    st.floats(1e-4, 10.0),
)
def test_rho_crossings_are_roots(nu, lo, width, C1, C2, L):
    p = RhoParams(nu, lo, lo + width, C1, C2, L)
    out = rho_decay_rate(p)
    if out is None:
        assert p.scaled(p.argmin()) >= 1.0
        return
    g2, g1 = out
    assert lo < g2 <= g1 < lo + width
    for s in (g2, g1):
        # one ulp of s moves the value by |slope| * ulp near a pole
        ulp = np.spacing(s)
        slope = abs(p.scaled(s + ulp) - p.scaled(s - ulp)) / 2
        assert abs(p.scaled(s) - 1.0) <= 1e-10 + slope


@settings(max_examples=5, deadline=None)
@given(st.floats(-2.0, -0.3), st.floats(0.5, 1.5))
def test_rk4_order_on_linear_atom(b, h):
    sysm = systems.linear_atom(h, b=b)
    sl = roots_right_of(-3.0, sysm.kernel)
    lam = sl.roots[-1]
    ed = eigen_data(lam, sysm.kernel)
    errs = []
    for m in (8, 16, 32):
        tr = integrate(sysm, ed.eigenfunction(), t_end=2 * h, dt=h / m)
        errs.append(np.abs(tr.x[:, 0] - np.real(np.exp(lam * tr.t) * ed.c[0])).max())
    order = math.log2(errs[1] / errs[2])
    assert 3.5 < order < 4.5


@pytest.mark.parametrize("h,gamma,c", [(1.0, -1.0, 0.5), (0.2, -2.0, 0.0)])
def test_manifold_distance_scales_quartically(h, gamma, c):
    sysm = systems.quadratic_delay(h, q=1.0, c=c)
    model = expansion_coeffs(sysm, roots_right_of(gamma, sysm.kernel))
    amps = np.array([0.01, 0.02, 0.04, 0.08])
    dist = []
    for a in amps:
        hist = lambda th, a=a: manifold_eval(model, a, theta=np.atleast_1d(th).ravel()).reshape(np.shape(th) + (1,))  # noqa: E731
        tr = integrate(sysm, hist, t_end=1.0, dt=h / 64)
        dist.append(distance_to_manifold(tr, model, 1.0))
    slope = np.polyfit(np.log(amps), np.log(dist), 1)[0]
    assert 3.5 <= slope <= 4.5


def test_char_matrix_real_on_real_axis():
    cm = CharMatrix(_kernel(-1.0, 0.5, 1.0))
    f, df = cm.det(np.array([0.7]))
    assert abs(f[0].imag) == 0 and abs(df[0].imag) == 0
