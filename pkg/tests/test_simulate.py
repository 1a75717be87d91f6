import math

import numpy as np
import pytest

import oracles
from delayssm import (
    Blowup,
    NoCycle,
    OutOfChart,
    default_step,
    distance_to_manifold,
    eigen_data,
    expansion_coeffs,
    extract_limit_cycle,
    integrate,
    measure_decay,
    roots_right_of,
    systems,
)


def test_method_of_steps_oracle():
    # x' = -x(t-1), x = 1 on [-1, 0]: piecewise polynomial solution
    tr = integrate(systems.linear_atom(1.0), 1.0, t_end=3.0, dt=1 / 64)
    exact = {
        0.5: 0.5,
        1.0: 0.0,
        1.5: 1 - 1.5 + 0.5**2 / 2,
        2.0: -0.5,
        2.5: 1 - 2.5 + 1.5**2 / 2 - 0.5**3 / 6,
    }
    for t, v in exact.items():
        assert tr(t)[0] == pytest.approx(v, abs=1e-12)


def test_eigen_history_gives_exponential():
    h = 0.2
    lam = oracles.sine_delay_real_roots(h)[0]
    tr = integrate(systems.linear_atom(h), lambda th: np.exp(lam * th), t_end=4.0)
    assert np.abs(tr.x[:, 0] - np.exp(lam * tr.t)).max() < 1e-9


@pytest.mark.parametrize("system", [systems.linear_atom(1.0), systems.cushing(-3.0, a=0.0)], ids=["atom", "density"])
def test_rk4_order(system):
    lam = roots_right_of(-1.0, system.kernel).roots[-1]
    ed = eigen_data(lam, system.kernel)
    hist = ed.eigenfunction()
    errs = []
    for dt in (1 / 8, 1 / 16, 1 / 32):
        tr = integrate(system, hist, t_end=3.0, dt=dt)
        exact = np.real(np.exp(lam * tr.t) * ed.c[0])
        errs.append(np.abs(tr.x[:, 0] - exact).max())
    order = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((order > 3.6) & (order < 4.6)), order


def test_decay_rate_matches_leading_root():
    s = systems.cushing(-0.3, a=0.0)
    lam = oracles.cushing_root(-0.4, -0.3).real
    fit = measure_decay(integrate(s, 1.0, t_end=40.0))
    assert fit.decaying and fit.exponent == pytest.approx(lam, abs=1e-3)


def test_step_rules():
    assert default_step(systems.linear_atom(1.0)) == pytest.approx(1 / 64)
    dt = default_step(systems.linear_atom(0.3))
    assert 0.3 / dt == pytest.approx(round(0.3 / dt), abs=1e-9)
    with pytest.raises(ValueError):
        integrate(systems.linear_atom(1.0), 1.0, t_end=1.0, dt=0.3)


def test_blowup():
    with pytest.raises(Blowup):
        integrate(systems.linear_atom(1.0, b=2.0), 1.0, t_end=50.0, bound=100.0)


def test_trajectory_segment_and_history():
    tr = integrate(systems.linear_atom(1.0), lambda th: 1 + th, t_end=2.0)
    assert tr(-0.5)[0] == pytest.approx(0.5)
    seg = tr.segment(1.0)
    assert seg(np.array([-1.0]))[0, 0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        tr.segment(5.0)


def test_distance_to_manifold_out_of_chart():
    s = systems.quadratic_delay(1.0, q=1.0, c=0.5)
    m = expansion_coeffs(s, roots_right_of(-1.0, s.kernel))
    tr = integrate(s, 0.3, t_end=1.0)
    with pytest.raises(OutOfChart):
        distance_to_manifold(tr, m, 1.0, radius=0.1)


def test_limit_cycle_needs_oscillation():
    tr = integrate(systems.cushing(-0.3, a=0.0), 1.0, t_end=20.0)
    with pytest.raises(NoCycle):
        extract_limit_cycle(tr)
