import math

import numpy as np
import pytest

import oracles
from delayssm import (
    BoundaryRoot,
    DelayKernel,
    InsufficientDepth,
    SpectrumSlice,
    count_roots_in_rect,
    nonresonance_check,
    root_density_check,
    roots_right_of,
    smoothness_degree,
    systems,
)
from delayssm.spectrum import CharMatrix, char_det


def _match(found, expected, tol=1e-9):
    found = sorted(found, key=lambda z: (round(z.real, 6), z.imag))
    expected = sorted(expected, key=lambda z: (round(z.real, 6), z.imag))
    assert len(found) == len(expected)
    for a, b in zip(found, expected):
        assert abs(a - b) <= tol * max(1.0, abs(b))


def test_cushing_roots_against_mpmath():
    sl = roots_right_of(-5.0, systems.cushing(-3.0).kernel)
    seeds = [-0.39 + 2.66j, -3.33 + 8.67j, -4.4 + 15.1j]
    ref = []
    for s in seeds:
        z = oracles.cushing_root(s, -3.0)
        ref += [z, z.conjugate()]
    _match(sl.roots, ref)
    assert sl.beta < -5.0


def test_atom_roots_against_lambert_w():
    sl = roots_right_of(-2.5, systems.linear_atom(1.0).kernel)
    ref = [z for z in oracles.atom_roots(1.0, branches=range(-4, 4)) if z.real >= -2.5]
    _match(sl.roots, ref)


def test_sine_delay_second_root_found_by_secondary_search():
    h = 0.065
    sl = roots_right_of(-3.0, systems.sine_delay(h).kernel, depth=200)
    l1, l2 = oracles.sine_delay_real_roots(h)
    assert sl.roots[0] == pytest.approx(l1, rel=1e-10)
    assert sl.beta == pytest.approx(l2, rel=1e-9)


def test_zero_kernel_multiplicity():
    sl = roots_right_of(-1.0, DelayKernel(3, 1.0))
    assert sl.roots == (0j,) and sl.multiplicities == (3,)


def test_double_root_detected():
    # z + a e^{-z} has a double root at z = -1 when a = 1/e
    k = DelayKernel(1, 1.0, atoms=[(1.0, -1 / math.e)])
    sl = roots_right_of(-2.0, k)
    i = int(np.argmin([abs(z + 1) for z in sl.roots]))
    assert sl.multiplicities[i] == 2
    assert abs(sl.roots[i] + 1) < 1e-6


def test_count_and_boundary():
    k = systems.linear_atom(1.0).kernel
    assert count_roots_in_rect((-1.0, 0.0, 0.5, 2.0), k) == 1
    lam = oracles.atom_roots(1.0)[2]
    with pytest.raises(BoundaryRoot):
        count_roots_in_rect((lam.real, 0.0, -2.0, -0.5), k)


def test_char_det_derivative():
    k = systems.cushing(-0.3).kernel
    f, df = char_det(1.0 + 0.5j, k)
    eps = 1e-6
    fd = (char_det(1.0 + 0.5j + eps, k)[0] - char_det(1.0 + 0.5j - eps, k)[0]) / (2 * eps)
    assert abs(df - fd) < 1e-8


def test_restrict_moves_roots():
    sl = roots_right_of(-5.0, systems.cushing(-0.3).kernel)
    s1 = sl.restrict(-1.0)
    assert len(s1.roots) == 1 and s1.beta == pytest.approx(-3.99044094255441)


def test_smoothness_degree():
    assert smoothness_degree(-0.36, 10, beta=-3.99) == 11 - 1  # 3.99 / 0.36 > 10
    assert smoothness_degree(-1.0, 10, beta=-2.5) == 2
    assert smoothness_degree(0.1, 7, beta=-1.0) == 7


def test_nonresonance_sums_and_a4():
    sl = SpectrumSlice(
        gamma=-3.5, roots=(-3.0 + 0j, -0.5 + 0j), multiplicities=(1, 1), beta=-4.0,
        others=(-4.0 + 0j,), other_multiplicities=(1,), floor=-20.0,
    )
    # Sigma = {-3}: S~ = {-0.5}, and 2 * (-0.5) < -0.5 already, so r = 1 and nothing to test
    rep = nonresonance_check(sl, "A4", sigma=[-3.0])
    assert rep.r == 1 and rep.satisfied
    # -0.5 - 0.5 - 3 = -4 hits a known root
    s3 = nonresonance_check(sl, "sums", sigma=[-0.5, -3.0], r=3)
    assert not s3.satisfied and s3.violations[0][2] == -4.0
    # {-0.5, -2.5, -3, -4}: with Sigma = {-2.5, -4}, -0.5 in S~ and 6 * (-0.5) = -3 in S~
    sl2 = SpectrumSlice(
        gamma=-4.5, roots=(-4.0 + 0j, -3.0 + 0j, -2.5 + 0j, -0.5 + 0j), multiplicities=(1, 1, 1, 1),
        beta=None, floor=-30.0,
    )
    rep = nonresonance_check(sl2, "A4", sigma=[-2.5, -4.0])
    assert not rep.satisfied
    s = nonresonance_check(sl2, "sums", sigma=[-0.5], r=6)
    assert not s.satisfied and any(v[0] == 6 for v in s.violations)


def test_nonresonance_requires_depth():
    sl = SpectrumSlice(gamma=-1.0, roots=(-0.5 + 0j,), multiplicities=(1,), beta=None, floor=-1.0)
    with pytest.raises(InsufficientDepth):
        nonresonance_check(sl, "sums", r=3)


def test_root_density():
    rep = root_density_check(systems.linear_atom(1.0).kernel, 50.0)
    assert rep.count == 16
    assert abs(rep.ratio - 1) < 0.1
    rep = root_density_check(systems.cushing(-3.0).kernel, 100.0)
    assert rep.count == 32


def test_doubled_root_resonance_flagged_by_sums_not_a4():
    # {-1, -2}, Sigma = {-1}: no root outside Sigma sits between Re -1 and 0, so the
    # A4 set is empty; the plain sum check catches 2 * (-1) = -2
    sl = SpectrumSlice(gamma=-2.5, roots=(-2.0 + 0j, -1.0 + 0j), multiplicities=(1, 1), beta=None, floor=-30.0)
    assert nonresonance_check(sl, "A4", sigma=[-1.0]).satisfied
    rep = nonresonance_check(sl, "sums", sigma=[-1.0], r=2)
    assert not rep.satisfied and rep.violations[0][0] == 2
