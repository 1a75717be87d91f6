"""DDE systems: linear delay kernel plus a polynomial nonlinearity jet.

The linear part acts on a history ``u: [-h, 0] -> R^n`` as

    L u = sum_k B_k u(-tau_k) + sum_d int_{a_d}^{b_d} C_d(s) u(-s) ds,

with every density ``C_d`` a matrix polynomial in powers of ``(s - a_d)``.
Nonlinear terms are polynomial in finitely many history samples
``u(theta_i)`` and are stored as symmetric multilinear forms on the stacked
vector ``v = (u(theta_1), ..., u(theta_m))`` so that ``R(v) = Q[v, v] + T[v, v, v]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidSystem

__all__ = [
    "Atom",
    "Density",
    "DelayKernel",
    "NonlinearityJet",
    "DDESystem",
    "PolyTerm",
    "PolynomialDDE",
    "total_variation",
    "entrywise_variation",
    "q_constant",
    "linearize",
    "mono_exp_integrals",
    "gauss_legendre",
]

_SERIES_TERMS = 60


def gauss_legendre(a: float, b: float, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(npts)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def mono_exp_integrals(pmax: int, z, length) -> np.ndarray:
    """Return ``I_p = int_0^L s^p exp(-z s) ds`` for ``p = 0..pmax``.

    ``z`` and ``length`` broadcast against each other; the result has shape
    ``(pmax + 1,) + broadcast_shape``.  A power series is used for small
    ``|z L|`` and the upward recurrence otherwise.
    """
    z = np.asarray(z, dtype=complex)
    length = np.asarray(length, dtype=float)
    z, length = np.broadcast_arrays(z, length)
    shape = z.shape
    z = z.ravel()
    length = length.ravel()
    w = z * length
    out = np.zeros((pmax + 1, z.size), dtype=complex)
    small = np.abs(w) < max(2.0, pmax + 2.0)

    if np.any(small):
        ws = w[small]
        ls = length[small]
        nterms = min(_SERIES_TERMS, int(3.0 * np.abs(ws).max()) + 24)
        m = np.arange(nterms)
        # (-w)^m / m!
        logfact = np.array([math.lgamma(k + 1.0) for k in m])
        terms = np.power.outer(-ws, m) / np.exp(logfact)
        for p in range(pmax + 1):
            out[p, small] = ls ** (p + 1) * (terms / (p + m + 1.0)).sum(axis=-1)

    big = ~small
    if np.any(big):
        zb = z[big]
        lb = length[big]
        e = np.exp(-w[big])
        prev = (1.0 - e) / zb
        out[0, big] = prev
        for p in range(1, pmax + 1):
            prev = (p * prev - lb**p * e) / zb
            out[p, big] = prev
    return out.reshape((pmax + 1,) + shape)


def _as_matrix(B, n: int) -> np.ndarray:
    arr = np.array(B, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.shape != (n, n):
        raise InvalidSystem(f"expected a {n}x{n} matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Atom:
    """Point delay ``B u(-tau)``."""

    tau: float
    B: np.ndarray


@dataclass(frozen=True, eq=False)
class Density:
    """Distributed delay ``int_a^b C(s) u(-s) ds``.

    ``coeffs[p]`` multiplies ``(s - a)**p``.
    """

    a: float
    b: float
    coeffs: np.ndarray

    def __call__(self, s) -> np.ndarray:
        """Evaluate ``C(s)``; returns shape ``s.shape + (n, n)``."""
        s = np.asarray(s, dtype=float)
        x = s - self.a
        out = np.zeros(s.shape + self.coeffs.shape[1:])
        for p in range(self.coeffs.shape[0] - 1, -1, -1):
            out = out * x[..., None, None] + self.coeffs[p]
        return out

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1


class DelayKernel:
    """Linear delay kernel with point delays and polynomial densities.

    Parameters
    ----------
    n : int
        State dimension.
    h : float
        Maximal delay; all supports must lie in ``[0, h]``.
    atoms : sequence of (tau, B)
        Point delays.
    densities : sequence of (a, b, coeffs)
        ``coeffs`` is a sequence of ``n x n`` matrices, ``coeffs[p]`` being
        the coefficient of ``(s - a)**p``.
    """

    def __init__(self, n: int, h: float, atoms=(), densities=()):
        if int(n) != n or n < 1:
            raise InvalidSystem("state dimension must be a positive integer")
        if not h > 0:
            raise InvalidSystem("maximal delay h must be positive")
        self.n = int(n)
        self.h = float(h)
        ats = []
        for item in atoms:
            tau, B = (item.tau, item.B) if isinstance(item, Atom) else item
            tau = float(tau)
            if not (0.0 <= tau <= self.h * (1 + 1e-14)):
                raise InvalidSystem(f"atom delay {tau} outside [0, h]")
            ats.append(Atom(tau, _as_matrix(B, self.n)))
        dens = []
        for item in densities:
            if isinstance(item, Density):
                a, b, coeffs = item.a, item.b, item.coeffs
            else:
                a, b, coeffs = item
            a, b = float(a), float(b)
            if not (0.0 <= a < b <= self.h * (1 + 1e-14)):
                raise InvalidSystem(f"density interval [{a}, {b}] not inside [0, h]")
            c = np.array([_as_matrix(m, self.n) for m in coeffs], dtype=float)
            if c.ndim != 3 or c.shape[0] == 0:
                raise InvalidSystem("density needs at least one coefficient matrix")
            c.setflags(write=False)
            dens.append(Density(a, b, c))
        self.atoms: tuple[Atom, ...] = tuple(ats)
        self.densities: tuple[Density, ...] = tuple(dens)

    # -- identity -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, DelayKernel):
            return NotImplemented
        if (self.n, self.h, len(self.atoms), len(self.densities)) != (
            other.n, other.h, len(other.atoms), len(other.densities)
        ):
            return False
        for x, y in zip(self.atoms, other.atoms):
            if x.tau != y.tau or not np.array_equal(x.B, y.B):
                return False
        for x, y in zip(self.densities, other.densities):
            if (x.a, x.b) != (y.a, y.b) or not np.array_equal(x.coeffs, y.coeffs):
                return False
        return True

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"DelayKernel(n={self.n}, h={self.h}, atoms={len(self.atoms)}, "
            f"densities={len(self.densities)})"
        )

    @property
    def is_zero(self) -> bool:
        return all(not np.any(a.B) for a in self.atoms) and all(
            not np.any(d.coeffs) for d in self.densities
        )

    def breakpoints(self) -> np.ndarray:
        """Sorted support points (atom delays, density ends) together with 0 and h."""
        pts = {0.0, self.h}
        pts.update(a.tau for a in self.atoms)
        for d in self.densities:
            pts.update((d.a, d.b))
        return np.array(sorted(pts))

    # -- Laplace-Stieltjes transform ------------------------------------------
    def transform(self, z) -> np.ndarray:
        """``E(z) = int_0^h exp(-z s) dzeta(s)``, shape ``z.shape + (n, n)``."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n, self.n), dtype=complex)
        for at in self.atoms:
            out += np.exp(-z * at.tau)[..., None, None] * at.B
        for d in self.densities:
            ints = mono_exp_integrals(d.degree, z, d.b - d.a)
            acc = np.einsum("p...,pij->...ij", ints, d.coeffs)
            out += np.exp(-z * d.a)[..., None, None] * acc
        return out

    def transform_derivative(self, z) -> np.ndarray:
        """``dE/dz``."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n, self.n), dtype=complex)
        for at in self.atoms:
            if at.tau:
                out -= (at.tau * np.exp(-z * at.tau))[..., None, None] * at.B
        for d in self.densities:
            ints = mono_exp_integrals(d.degree + 1, z, d.b - d.a)
            shifted = d.a * ints[:-1] + ints[1:]
            acc = np.einsum("p...,pij->...ij", shifted, d.coeffs)
            out -= np.exp(-z * d.a)[..., None, None] * acc
        return out

    def tail_transform(self, lam: complex, x) -> np.ndarray:
        """``int_{s >= x} exp(-lam s) dzeta(s)`` for each ``x`` in ``[0, h]``.

        Atoms with ``tau >= x`` are included.  Returns ``x.shape + (n, n)``.
        """
        x = np.asarray(x, dtype=float)
        lam = complex(lam)
        out = np.zeros(x.shape + (self.n, self.n), dtype=complex)
        for at in self.atoms:
            mask = (at.tau >= x).astype(float)
            out += (mask * np.exp(-lam * at.tau))[..., None, None] * at.B
        for d in self.densities:
            c = np.clip(x, d.a, d.b)
            L = d.b - d.a
            full = mono_exp_integrals(d.degree, lam, L)
            part = mono_exp_integrals(d.degree, np.full(x.shape, lam), c - d.a)
            diff = full.reshape((d.degree + 1,) + (1,) * x.ndim) - part
            out += np.exp(-lam * d.a) * np.einsum("p...,pij->...ij", diff, d.coeffs)
        return out

    def quadrature_rule(self, nodes: int = 32) -> tuple[np.ndarray, np.ndarray]:
        """Offsets ``s_j`` and weights ``W_j`` with ``L u ~ sum_j W_j u(-s_j)``.

        Atoms are exact; densities use ``nodes``-point Gauss-Legendre.
        """
        offs: list[float] = []
        mats: list[np.ndarray] = []
        for at in self.atoms:
            offs.append(at.tau)
            mats.append(np.array(at.B))
        for d in self.densities:
            s, w = gauss_legendre(d.a, d.b, nodes)
            Cs = d(s)
            for sj, wj, Cj in zip(s, w, Cs):
                offs.append(float(sj))
                mats.append(wj * Cj)
        if not offs:
            return np.zeros(0), np.zeros((0, self.n, self.n))
        return np.array(offs), np.array(mats)

    def modulus_bound(self, x: float) -> float:
        """Upper bound of ``||E(z)||_inf`` on the half plane ``Re z >= x``.

        Every characteristic root with real part at least ``x`` has modulus
        at most this value.
        """
        shift = max(-float(x), 0.0)
        total = 0.0
        for at in self.atoms:
            total += np.abs(at.B).sum(axis=1).max() * math.exp(shift * at.tau)
        for d in self.densities:
            s = np.linspace(d.a, d.b, 257)
            cmax = np.abs(d(s)).sum(axis=2).max() * 1.05
            if shift > 0:
                expint = (math.exp(shift * d.b) - math.exp(shift * d.a)) / shift
            else:
                expint = d.b - d.a
            total += cmax * expint
        return total


@dataclass(frozen=True, eq=False)
class NonlinearityJet:
    """Quadratic and cubic part of the nonlinearity.

    Parameters
    ----------
    lags : tuple of float
        Sample points ``theta_i`` in ``[-h, 0]``.
    quadratic : ndarray, shape (n, N, N) or None
        Symmetric form ``Q`` with ``N = n * len(lags)``; component ``a`` of
        ``R`` receives ``sum_ij Q[a, i, j] v_i v_j``.
    cubic : ndarray, shape (n, N, N, N) or None
        Symmetric form ``T``.
    lip_global : float, optional
        Global Lipschitz constant of ``R`` on the sup-norm space.
    lip_ball : callable, optional
        ``rho -> Lip_rho(R)``.  A polynomial bound is derived when absent.
    func : callable, optional
        Full nonlinearity on the stacked vector, used by the simulator instead
        of the truncated jet.
    """

    n: int
    lags: tuple = (0.0,)
    quadratic: Optional[np.ndarray] = None
    cubic: Optional[np.ndarray] = None
    lip_global: Optional[float] = None
    lip_ball: Optional[Callable[[float], float]] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        lags = tuple(float(t) for t in self.lags)
        if not lags:
            lags = (0.0,)
        if any(t > 0 for t in lags):
            raise InvalidSystem("evaluation lags must be non-positive")
        object.__setattr__(self, "lags", lags)
        N = self.n * len(lags)
        for name, order in (("quadratic", 2), ("cubic", 3)):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            if arr.shape != (self.n,) + (N,) * order:
                raise InvalidSystem(f"{name} form has shape {arr.shape}, expected {(self.n,) + (N,) * order}")
            for perm in itertools.permutations(range(1, order + 1)):
                if not np.allclose(arr, arr.transpose((0,) + perm), atol=1e-13, rtol=1e-12):
                    raise InvalidSystem(f"{name} form is not symmetric")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def N(self) -> int:
        return self.n * len(self.lags)

    @property
    def is_zero(self) -> bool:
        return not (
            (self.quadratic is not None and np.any(self.quadratic))
            or (self.cubic is not None and np.any(self.cubic))
        )

    def Q(self) -> np.ndarray:
        if self.quadratic is None:
            return np.zeros((self.n, self.N, self.N))
        return self.quadratic

    def T(self) -> np.ndarray:
        if self.cubic is None:
            return np.zeros((self.n, self.N, self.N, self.N))
        return self.cubic

    def evaluate(self, v) -> np.ndarray:
        """Truncated nonlinearity ``Q[v,v] + T[v,v,v]`` for stacked ``v`` (..., N)."""
        v = np.asarray(v)
        out = np.einsum("aij,...i,...j->...a", self.Q(), v, v)
        out = out + np.einsum("aijk,...i,...j,...k->...a", self.T(), v, v, v)
        return out

    def full(self, v) -> np.ndarray:
        """Full nonlinearity when supplied, otherwise the jet."""
        if self.func is not None:
            return np.asarray(self.func(np.asarray(v)))
        return self.evaluate(v)

    def ball_lipschitz(self, rho: float) -> float:
        """Lipschitz constant of ``R`` on the sup-norm ball of radius ``rho``.

        Falls back to the polynomial bound ``2|Q| rho + 3|T| rho^2`` where
        ``|.|`` sums absolute entries per output row.
        """
        if self.lip_ball is not None:
            return float(self.lip_ball(rho))
        q = np.abs(self.Q()).reshape(self.n, -1).sum(axis=1).max() if self.N else 0.0
        t = np.abs(self.T()).reshape(self.n, -1).sum(axis=1).max() if self.N else 0.0
        return 2.0 * q * rho + 3.0 * t * rho**2

    def same_as(self, other: "NonlinearityJet") -> bool:
        return (
            self.n == other.n
            and self.lags == other.lags
            and np.array_equal(self.Q(), other.Q())
            and np.array_equal(self.T(), other.T())
            and self.lip_global == other.lip_global
        )


@dataclass(frozen=True, eq=False)
class DDESystem:
    """Linear kernel plus nonlinearity jet."""

    kernel: DelayKernel
    jet: NonlinearityJet
    label: str = ""

    def __post_init__(self):
        if self.jet.n != self.kernel.n:
            raise InvalidSystem("jet dimension differs from kernel dimension")
        if any(t < -self.kernel.h * (1 + 1e-14) for t in self.jet.lags):
            raise InvalidSystem("jet lag lies outside [-h, 0]")

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def h(self) -> float:
        return self.kernel.h

    def same_as(self, other: "DDESystem") -> bool:
        return self.kernel == other.kernel and self.jet.same_as(other.jet)


# -- scalar constants ----------------------------------------------------------


def _abs_poly_integral(coeffs: np.ndarray, length: float) -> float:
    """``int_0^L |p(x)| dx`` for a real polynomial with ascending coefficients."""
    poly = np.polynomial.Polynomial(coeffs)
    if not np.any(coeffs):
        return 0.0
    rts = poly.roots()
    cuts = sorted(
        float(r.real) for r in rts if abs(r.imag) < 1e-12 and 0.0 < r.real < length
    )
    anti = poly.integ()
    pts = [0.0] + cuts + [length]
    return float(sum(abs(anti(b) - anti(a)) for a, b in zip(pts[:-1], pts[1:])))


def entrywise_variation(kernel: DelayKernel) -> np.ndarray:
    """Matrix of total variations of the individual kernel entries."""
    V = np.zeros((kernel.n, kernel.n))
    for at in kernel.atoms:
        V += np.abs(at.B)
    for d in kernel.densities:
        for i in range(kernel.n):
            for j in range(kernel.n):
                V[i, j] += _abs_poly_integral(d.coeffs[:, i, j], d.b - d.a)
    return V


def total_variation(kernel: DelayKernel) -> float:
    """Total variation of the kernel in the operator infinity-norm.

    Examples
    --------
    >>> total_variation(DelayKernel(1, 1.0, atoms=[(1.0, [[-1.0]])]))
    1.0
    """
    tv = 0.0
    for at in kernel.atoms:
        tv += float(np.abs(at.B).sum(axis=1).max())
    for d in kernel.densities:
        if kernel.n == 1:
            tv += _abs_poly_integral(d.coeffs[:, 0, 0], d.b - d.a)
            continue
        # kinks of the row-sum maximum sit at entry roots; quad handles them
        pts = []
        for i in range(kernel.n):
            for j in range(kernel.n):
                for r in np.polynomial.Polynomial(d.coeffs[:, i, j]).roots():
                    if abs(r.imag) < 1e-12 and 0 < r.real < d.b - d.a:
                        pts.append(d.a + float(r.real))

        def rownorm(s, d=d):
            return float(np.abs(d(s)).sum(axis=1).max())

        val, _ = integrate.quad(rownorm, d.a, d.b, points=sorted(pts) or None, limit=200)
        tv += val
    return tv


def _permanent(M: np.ndarray) -> float:
    k = M.shape[0]
    if k == 0:
        return 1.0
    return float(
        sum(np.prod([M[i, p[i]] for i in range(k)]) for p in itertools.permutations(range(k)))
    )


def q_constant(kernel: DelayKernel) -> float:
    """Constant ``Q`` of the small-delay inertial-manifold bound.

    ``det Delta(z) = z^n + sum_j eta_j(z) z^(n-j)``; expanding the
    determinant by cofactors bounds ``TV(eta_j)`` by the sum over principal
    ``j``-minors of the permanent of the entrywise variation matrix ``c_j``.
    Then ``Q = sum_j (j/n) c_j^(n/j) (2(n-j))^(n/j - 1)`` with ``0**0 = 1``.
    """
    n = kernel.n
    V = entrywise_variation(kernel)
    Q = 0.0
    for j in range(1, n + 1):
        cj = sum(
            _permanent(V[np.ix_(S, S)]) for S in itertools.combinations(range(n), j)
        )
        if cj == 0.0:
            continue
        base = 2.0 * (n - j)
        expo = n / j - 1.0
        factor = 1.0 if expo == 0.0 else base**expo
        Q += (j / n) * cj ** (n / j) * factor
    return Q


# -- polynomial description and splitting -------------------------------------


@dataclass(frozen=True)
class PolyTerm:
    """Monomial ``coef * prod_k u_{c_k}(theta_k)`` feeding output component ``out``.

    ``factors`` is a tuple of ``(theta, component)`` pairs; an empty tuple is
    a constant term.
    """

    coef: float
    out: int
    factors: tuple = ()


@dataclass(frozen=True, eq=False)
class PolynomialDDE:
    """Right-hand side given as polynomial terms plus optional densities."""

    n: int
    h: float
    terms: tuple = ()
    densities: tuple = ()
    label: str = ""
    lip_global: Optional[float] = None
    lip_ball: Optional[Callable[[float], float]] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None


def _symmetric_add(arr: np.ndarray, out: int, idx: Sequence[int], coef: float) -> None:
    perms = set(itertools.permutations(idx))
    share = coef / len(perms)
    for p in perms:
        arr[(out,) + p] += share


def linearize(desc) -> DDESystem:
    """Split a polynomial right-hand side into linear kernel and jet.

    Accepts a :class:`PolynomialDDE` or an already split :class:`DDESystem`;
    the latter is decomposed into terms and rebuilt, so the operation is
    idempotent.
    """
    if isinstance(desc, DDESystem):
        desc = _to_description(desc)
    n, h = desc.n, float(desc.h)
    atoms: dict[float, np.ndarray] = {}
    nonlinear: list[PolyTerm] = []
    for t in desc.terms:
        deg = len(t.factors)
        if not 0 <= t.out < n:
            raise InvalidSystem(f"output component {t.out} out of range")
        for theta, comp in t.factors:
            if not (-h * (1 + 1e-14) <= theta <= 0.0) or not 0 <= comp < n:
                raise InvalidSystem(f"bad factor ({theta}, {comp})")
        if deg == 0:
            if t.coef != 0.0:
                raise InvalidSystem("f(0) != 0; shift the equilibrium to the origin first")
            continue
        if deg == 1:
            theta, comp = t.factors[0]
            tau = -float(theta) + 0.0
            B = atoms.setdefault(tau, np.zeros((n, n)))
            B[t.out, comp] += t.coef
            continue
        if deg > 3:
            raise InvalidSystem("nonlinear terms above degree three are not supported")
        nonlinear.append(t)

    lags = sorted({float(th) + 0.0 for t in nonlinear for th, _ in t.factors}, reverse=True)
    if not lags:
        lags = [0.0]
    pos = {th: i for i, th in enumerate(lags)}
    N = n * len(lags)
    Q = np.zeros((n, N, N))
    T = np.zeros((n, N, N, N))
    for t in nonlinear:
        idx = [pos[float(th) + 0.0] * n + c for th, c in t.factors]
        _symmetric_add(Q if len(idx) == 2 else T, t.out, idx, t.coef)

    kernel = DelayKernel(n, h, atoms=sorted(atoms.items()), densities=desc.densities)
    jet = NonlinearityJet(
        n=n,
        lags=tuple(lags),
        quadratic=Q if np.any(Q) else None,
        cubic=T if np.any(T) else None,
        lip_global=desc.lip_global,
        lip_ball=desc.lip_ball,
        func=desc.func,
    )
    return DDESystem(kernel, jet, desc.label)


def _to_description(system: DDESystem) -> PolynomialDDE:
    n = system.n
    terms: list[PolyTerm] = []
    for at in system.kernel.atoms:
        for i, j in zip(*np.nonzero(at.B)):
            terms.append(PolyTerm(float(at.B[i, j]), int(i), ((-at.tau, int(j)),)))
    jet = system.jet
    flat = [(th, c) for th in jet.lags for c in range(n)]
    for arr in (jet.Q(), jet.T()):
        for index in zip(*np.nonzero(arr)):
            out, rest = int(index[0]), index[1:]
            if list(rest) != sorted(rest):
                continue
            mult = len(set(itertools.permutations(rest)))
            terms.append(
                PolyTerm(float(arr[index]) * mult, out, tuple(flat[k] for k in rest))
            )
    dens = tuple((d.a, d.b, np.array(d.coeffs)) for d in system.kernel.densities)
    return PolynomialDDE(
        n=n,
        h=system.h,
        terms=tuple(terms),
        densities=dens,
        label=system.label,
        lip_global=jet.lip_global,
        lip_ball=jet.lip_ball,
        func=jet.func,
    )
