import math

import numpy as np
import pytest

import oracles
from delayssm import (
    DelayKernel,
    ExpSum,
    MultipleRoot,
    SeriesModeUnjustified,
    SpectrumSlice,
    dichotomy_constants,
    eigen_data,
    f_form_constants,
    pairing,
    project_exponential,
    project_history,
    projection_norm,
    roots_right_of,
    systems,
    xi_residue,
)


def test_xi_matches_numerical_derivative_cushing():
    lam = oracles.cushing_root(-0.4, -0.3)
    xi = xi_residue(lam, systems.cushing(-0.3).kernel)
    assert xi[0, 0] == pytest.approx(oracles.cushing_xi(lam, -0.3), rel=1e-10)
    assert xi[0, 0].real == pytest.approx(1.2369254501, rel=1e-9)


def test_xi_atom_closed_form():
    lam = oracles.atom_roots(1.0)[2]
    xi = xi_residue(lam, systems.linear_atom(1.0).kernel)
    assert xi[0, 0] == pytest.approx(oracles.atom_xi(lam, 1.0), rel=1e-12)


def test_zero_kernel_projection_is_evaluation():
    k = DelayKernel(2, 1.0)
    u = lambda th: np.stack([np.sin(3 * th) + 2, np.cos(th)], axis=-1)  # noqa: E731
    P = project_history(0.0, u, k)
    vals = P(np.linspace(-1, 0, 7))
    assert np.allclose(vals, np.array([2.0, 1.0]), atol=1e-12)


def test_multiple_root_rejected():
    k = DelayKernel(1, 1.0, atoms=[(1.0, -1 / math.e)])
    with pytest.raises(MultipleRoot):
        xi_residue(-1.0, k)


def test_eigenfunction_fixed_by_projection():
    k = systems.cushing(-3.0).kernel
    lam = oracles.cushing_root(-0.39 + 2.66j, -3.0)
    ed = eigen_data(lam, k)
    P = project_history(lam, ed.eigenfunction(), k)
    th = np.linspace(-1, 0, 11)
    assert np.allclose(P(th), ed.eigenfunction()(th), atol=1e-12)
    assert abs(ed.c[0].imag) == 0 and ed.c[0].real > 0


def test_projection_of_other_eigenfunction_vanishes():
    k = systems.cushing(-3.0).kernel
    l1 = oracles.cushing_root(-0.39 + 2.66j, -3.0)
    l2 = oracles.cushing_root(-3.33 + 8.67j, -3.0)
    P = project_history(l1, eigen_data(l2, k).eigenfunction(), k)
    assert np.abs(P(np.linspace(-1, 0, 5))).max() < 1e-12


def test_closed_form_exponential_projection_matches_quadrature():
    k = systems.cushing(-3.0).kernel
    lam = oracles.cushing_root(-0.39 + 2.66j, -3.0)
    g, nu = np.array([1.0]), 0.7 - 0.2j
    closed = project_exponential(lam, nu, g, k)
    quad = project_history(lam, ExpSum.term(nu, g), k)
    th = np.linspace(-1, 0, 9)
    assert np.allclose(closed(th), quad(th), atol=1e-12)


def _atom_pair_norm(h):
    """Dual norm of the real projection onto the leading pair of x' = -x(t-h), by brute force."""
    lam = oracles.atom_roots(h)[2]
    xi = oracles.atom_xi(lam, h)
    sig = np.linspace(-h, 0, 20001)
    best = 0.0
    for th in np.linspace(-h, 0, 801):
        a = abs(2 * (np.exp(lam * th) * xi).real)
        dens = np.abs(2 * (np.exp(lam * th) * xi * -np.exp(-lam * (sig + h))).real)
        best = max(best, a + np.trapezoid(dens, sig) if hasattr(np, "trapezoid") else a + np.trapz(dens, sig))
    return best


def test_projection_norm_against_brute_force():
    h = math.pi / 2 + 0.05
    lam = oracles.atom_roots(h)[2]
    val = projection_norm(systems.linear_atom(h).kernel, [lam, lam.conjugate()])
    assert val == pytest.approx(_atom_pair_norm(h), rel=1e-4)


def test_projection_norm_zero_kernel():
    assert projection_norm(DelayKernel(1, 1.0), [0.0]) == pytest.approx(1.0)


def test_dichotomy_modes():
    sl = roots_right_of(-1.0, systems.cushing(-0.3).kernel)
    d = dichotomy_constants(sl)
    assert d.M == d.K1 == d.K2 == 1.0 and d.omega == pytest.approx(sl.roots[0].real + 1e-6)
    c = dichotomy_constants(sl, "conservative", kernel=systems.cushing(-0.3).kernel)
    assert c.omega == pytest.approx(0.3)
    bad = SpectrumSlice(gamma=-1.0, roots=(0j,), multiplicities=(2,))
    with pytest.raises(SeriesModeUnjustified):
        dichotomy_constants(bad)
    f = f_form_constants(0.002, -500.0)
    assert f.K2 == pytest.approx(math.e)


def test_pairing_linear_in_history():
    k = systems.cushing(-3.0).kernel
    lam = oracles.cushing_root(-0.39 + 2.66j, -3.0)
    u = lambda th: np.cos(2 * th)  # noqa: E731
    v = lambda th: th**2  # noqa: E731
    w = lambda th: 2 * np.cos(2 * th) - 3 * th**2  # noqa: E731
    assert np.allclose(pairing(lam, w, k), 2 * pairing(lam, u, k) - 3 * pairing(lam, v, k), atol=1e-13)
