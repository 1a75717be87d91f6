"""Third-order spectral submanifolds, reduced dynamics and the Hopf normal form.

The manifold is parameterized in diagonal coordinates ``z`` (one per
eigenvalue of Sigma) as ``K(z) = sum_m z^m K_m`` with history-valued
coefficients ``K_m`` and reduced field ``zdot = H(z) = sum_m z^m H_m``.
Invariance of the graph under the semiflow reads

    d/dtheta K(z) = DK(z) H(z)        on [-h, 0],
    DK(z) H(z) |_{theta=0} = L K(z) + R(K(z)).

Order by order, with ``mu = m . lambda`` and the lower-order forcing
``F_m = sum_k f_k exp(nu_k theta)``, the solution in graph style is

    K_m = exp(mu theta) v + sum_k f_k exp(nu_k theta) / (nu_k - mu)
          + sum_i H_{m,i} c_i exp(lambda_i theta) / (lambda_i - mu),
    Delta(mu) v = r_m - sum_k Delta(nu_k) f_k / (nu_k - mu),
    H_{m,j} = d_j^T r_m - sum_k d_j^T Delta(nu_k) f_k / (nu_k - lambda_j),

where ``r_m`` is the ``z^m`` coefficient of ``R(K^{<|m|}(z))`` and the
``H`` choice makes ``P_Sigma K_m = 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import polyalg as pa
from .errors import (
    DegenerateHopf,
    HomologicalResonance,
    MultipleRoot,
    NotComputed,
    ResolventPole,
    WrongSigmaShape,
)
from .expsum import ExpSum
from .model import DDESystem
from .projection import EigenData, eigen_data
from .spectrum import CharMatrix, SpectrumSlice, smoothness_degree

__all__ = [
    "SSMModel",
    "expansion_coeffs",
    "reduce_real",
    "PlanarField",
    "reduce_planar",
    "NormalFormData",
    "normal_form",
    "LimitCycle",
    "predict_limit_cycle",
    "manifold_eval",
    "periodic_orbit",
    "ResidualReport",
    "invariance_residual",
]


@dataclass(frozen=True, eq=False)
class SSMModel:
    """Graph-style 3-jet of a spectral submanifold.

    Attributes
    ----------
    system : DDESystem
    eigen : tuple of EigenData
        Reduced eigenvalues with right/left vectors; ``xi_j = c_j d_j^T``.
    K : dict
        Monomial exponent tuple -> :class:`ExpSum` history coefficient
        (``None`` where an inner resonance prevents the graph form).
    H : dict
        Monomial -> complex vector of reduced-field coefficients.
    ell : int
        Smoothness degree of the manifold.
    formal : bool
        True when ``ell < 4``: coefficients solve the invariance equation
        formally but need not be Taylor coefficients.
    """

    system: DDESystem
    eigen: tuple
    K: dict
    H: dict
    ell: int = 10
    formal: bool = False
    style: str = "graph"
    order: int = 3
    resonant: tuple = ()

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.eigen])

    @property
    def dim(self) -> int:
        return len(self.eigen)

    @property
    def is_pair(self) -> bool:
        lam = self.lambdas
        return self.dim == 2 and abs(lam[1] - lam[0].conjugate()) <= 1e-9 * max(1.0, abs(lam[0])) and lam[0].imag != 0

    @property
    def is_real(self) -> bool:
        return self.dim == 1 and self.lambdas[0].imag == 0

    def coordinates(self, coord) -> np.ndarray:
        """Full coordinate vector from a scalar (real or pair case) or a vector."""
        c = np.atleast_1d(np.asarray(coord, dtype=complex))
        if c.size == 1 and self.is_pair:
            return np.array([c[0], np.conj(c[0])])
        if c.size != self.dim:
            raise ValueError(f"expected {self.dim} coordinates")
        return c

    def reduced_field(self, z) -> np.ndarray:
        """``H(z)`` evaluated from the stored coefficients."""
        z = self.coordinates(z)
        out = np.zeros(self.dim, dtype=complex)
        for m, v in self.H.items():
            out += v * np.prod(z ** np.array(m))
        return out

    def samples(self, npts: int = 512) -> dict:
        """Coefficient histories sampled on a uniform grid over ``[-h, 0]``."""
        theta = np.linspace(-self.system.h, 0.0, npts)
        return {m: (k(theta) if k is not None else None) for m, k in self.K.items()}


# -- helpers ---------------------------------------------------------------------


def _poly_forms(Q, T, V: dict, maxdeg: int) -> dict:
    """Monomial coefficients of ``Q[V,V] + T[V,V,V]`` up to ``maxdeg``."""
    out: dict = {}
    items = list(V.items())
    for (ma, va), (mb, vb) in itertools.product(items, repeat=2):
        m = tuple(a + b for a, b in zip(ma, mb))
        if sum(m) > maxdeg:
            continue
        val = np.einsum("aij,i,j->a", Q, va, vb)
        out[m] = out.get(m, 0) + val
    for (ma, va), (mb, vb), (mc, vc) in itertools.product(items, repeat=3):
        m = tuple(a + b + c for a, b, c in zip(ma, mb, mc))
        if sum(m) > maxdeg:
            continue
        val = np.einsum("aijk,i,j,k->a", T, va, vb, vc)
        out[m] = out.get(m, 0) + val
    return out


def _is_root(cm: CharMatrix, mu: complex, tol: float) -> bool:
    f, df = cm.det(np.array(mu))
    f, df = complex(f), complex(df)
    if f == 0:
        return True
    if df == 0:
        return False
    return abs(f / df) <= tol * max(1.0, abs(mu))


def _left_dd(cm: CharMatrix, d: np.ndarray, nu: complex, lam: complex) -> np.ndarray:
    """``d^T Delta(nu) / (nu - lam)``, continuous at ``nu = lam``."""
    if abs(nu - lam) <= 1e-12 * max(1.0, abs(lam)):
        return d @ cm.ddelta(np.array(lam))
    return d @ cm.delta(np.array(nu)) / (nu - lam)


def expansion_coeffs(
    system: DDESystem,
    sigma: Union[SpectrumSlice, Sequence[complex]],
    ell: Optional[int] = None,
    order: int = 3,
    tol_res: float = 1e-6,
) -> SSMModel:
    """Graph-style SSM coefficients through ``order`` (at most 3).

    Parameters
    ----------
    system : DDESystem
    sigma : SpectrumSlice or sequence of complex
        Reduced eigenvalues, all simple.  A slice uses its ``roots``.
    ell : int, optional
        Smoothness degree; computed from the slice when available.
    tol_res : float
        Relative distance below which ``m . lambda`` counts as a root.

    Raises
    ------
    ResolventPole
        If some ``m . lambda`` is a characteristic root outside Sigma.
    """
    if order > 3:
        raise NotComputed("orders above three are not available")
    if isinstance(sigma, SpectrumSlice):
        if not sigma.all_simple:
            raise MultipleRoot("reduced eigenvalues must be simple")
        lams = list(sigma.roots)
        if ell is None:
            ell = smoothness_degree(sigma, 10)
    else:
        lams = [complex(v) for v in sigma]
    if ell is None:
        ell = 10
    kernel = system.kernel
    cm = CharMatrix(kernel)
    if len(lams) == 2 and lams[0].imag < 0 and abs(lams[1] - lams[0].conjugate()) <= 1e-9 * max(1.0, abs(lams[0])):
        lams = [lams[1], lams[0]]  # first coordinate carries Im > 0
    eig = tuple(eigen_data(lam, kernel) for lam in lams)
    m = len(eig)
    lam = np.array([e.lam for e in eig])
    lags = system.jet.lags
    Q, T = system.jet.Q(), system.jet.T()

    K: dict = {}
    H: dict = {}
    for i, e in enumerate(eig):
        mono = tuple(1 if k == i else 0 for k in range(m))
        K[mono] = ExpSum.term(e.lam, e.c)
        H[mono] = np.array([e.lam if k == i else 0.0 for k in range(m)], dtype=complex)

    resonant = []
    for deg in range(2, order + 1):
        V = {mm: k.stacked(lags) for mm, k in K.items() if k is not None}
        rpoly = _poly_forms(Q, T, V, deg)
        for mono in pa.monomials(m, deg):
            mu = complex(np.dot(mono, lam))
            r = np.asarray(rpoly.get(mono, np.zeros(kernel.n)), dtype=complex)
            forcing = ExpSum.zero(kernel.n)
            for p, Kp in K.items():
                if sum(p) < 2 or sum(p) >= deg or Kp is None:
                    continue
                for i in range(m):
                    if p[i] == 0:
                        continue
                    for q, Hq in H.items():
                        if sum(q) < 2 or Hq[i] == 0:
                            continue
                        target = tuple(a - (1 if k == i else 0) + b for k, (a, b) in enumerate(zip(p, q)))
                        if target == mono:
                            forcing = forcing + Kp * (p[i] * Hq[i])
            for p, Kp in K.items():
                if Kp is None and sum(p) < deg:
                    raise ResolventPole(f"inner resonance at {p} blocks order {deg}")
            Km, Hm, res = _solve_monomial(cm, eig, mu, r, forcing, tol_res)
            K[mono] = Km
            H[mono] = Hm
            if res:
                resonant.append(mono)
    return SSMModel(
        system=system,
        eigen=eig,
        K=K,
        H=H,
        ell=int(ell),
        formal=int(ell) < 4,
        order=order,
        resonant=tuple(resonant),
    )


def _solve_monomial(cm: CharMatrix, eig, mu: complex, r: np.ndarray, forcing: ExpSum, tol: float):
    n = cm.n
    nus = forcing.exponents
    fs = forcing.coeffs
    Hm = np.zeros(len(eig), dtype=complex)
    for j, e in enumerate(eig):
        val = e.d @ r
        for nu, f in zip(nus, fs):
            val -= _left_dd(cm, e.d, nu, e.lam) @ f
        Hm[j] = val

    inner = [j for j, e in enumerate(eig) if abs(mu - e.lam) <= tol * max(1.0, abs(mu))]
    if inner or any(abs(nu - mu) <= tol * max(1.0, abs(mu)) for nu in nus):
        return None, Hm, True
    if _is_root(cm, mu, tol):
        raise ResolventPole(f"{mu} is (nearly) a characteristic root outside Sigma")
    gs = [f / (nu - mu) for nu, f in zip(nus, fs)]
    rhs = r.copy()
    for nu, g in zip(nus, gs):
        rhs = rhs - cm.delta(np.array(nu)) @ g
    v = np.linalg.solve(cm.delta(np.array(mu)), rhs)
    out = ExpSum.term(mu, v)
    if len(nus):
        out = out + ExpSum(nus, np.array(gs).reshape(len(nus), n))
    for j, e in enumerate(eig):
        if Hm[j] != 0:
            out = out + ExpSum.term(e.lam, Hm[j] * e.c / (e.lam - mu))
    return out, Hm, False


# -- reduced fields --------------------------------------------------------------


def reduce_real(model: SSMModel) -> tuple[float, float]:
    """``(lambda_1, c_3)`` of ``ydot = lambda_1 y + c_3 y^3`` for real one-dimensional Sigma."""
    if not model.is_real:
        raise WrongSigmaShape("reduce_real needs a single real eigenvalue")
    c3 = model.H.get((3,), np.zeros(1))[0]
    return float(model.lambdas[0].real), float(np.real(c3))


@dataclass(frozen=True, eq=False)
class PlanarField:
    """Real planar polynomial field ``(xdot, ydot) = sum c_ij x^i y^j``.

    ``coeffs`` maps ``(i, j)`` to the pair ``(cx, cy)``.
    """

    coeffs: dict

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape + (2,))
        for (i, j), c in self.coeffs.items():
            out += np.multiply.outer(x**i * y**j, np.asarray(c))
        return out

    def linear_part(self) -> np.ndarray:
        A = np.zeros((2, 2))
        A[:, 0] = self.coeffs.get((1, 0), (0.0, 0.0))
        A[:, 1] = self.coeffs.get((0, 1), (0.0, 0.0))
        return A


def reduce_planar(model: SSMModel) -> PlanarField:
    """Real chart ``z = x + i y`` of the reduced field for a conjugate pair."""
    if not model.is_pair:
        raise WrongSigmaShape("reduce_planar needs a simple conjugate pair")
    z1 = {(1, 0): 1.0 + 0j, (0, 1): 1j}
    z2 = {(1, 0): 1.0 + 0j, (0, 1): -1j}
    out: dict = {}
    for (a, b), v in model.H.items():
        term = pa.pmul(pa.ppow(z1, a, 9, 2), pa.ppow(z2, b, 9, 2), 9)
        for mono, c in term.items():
            out[mono] = out.get(mono, 0) + c * v[0]
    coeffs = {
        k: (float(v.real), float(v.imag))
        for k, v in sorted(out.items())
        if abs(v) > 1e-15
    }
    return PlanarField(coeffs)


# -- normal form ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormalFormData:
    """Cubic Hopf normal form ``qdot = lambda_1 q - beta21 |q|^2 q``.

    Attributes
    ----------
    lam1 : complex
    beta21 : complex
    p : dict
        Near-identity transform ``z = q + p(q)``; monomial -> vector of both
        components.
    p_coeffs : tuple
        Coefficients of ``q^3``, ``|q|^2 conj(q)``, ``conj(q)^3`` in the first
        component.
    polar_field : tuple
        ``(Re lambda_1, -Re beta21, Im lambda_1, -Im beta21)`` for
        ``rdot = a r + b r^3``, ``phidot = c + d r^2``.
    Ktilde : dict
        Manifold coefficients in normal-form coordinates.
    residual : float
        Largest homological-equation residual.
    """

    model: SSMModel
    lam1: complex
    beta21: complex
    p: dict
    p_coeffs: tuple
    polar_field: tuple
    Ktilde: dict
    residual: float

    @property
    def K30(self) -> ExpSum:
        return self.Ktilde[(3, 0)]

    @property
    def K21(self) -> ExpSum:
        return self.Ktilde[(2, 1)]


def normal_form(model: SSMModel, tol: float = 1e-10) -> NormalFormData:
    """Remove all non-resonant quadratic and cubic terms of the reduced field.

    The resonant monomials ``q1^2 q2`` (first component) and ``q1 q2^2``
    (second) are kept; ``beta21`` is minus the retained coefficient.
    """
    if not model.is_pair:
        raise WrongSigmaShape("normal form needs a conjugate pair")
    lam = model.lambdas
    if abs(lam[0]) <= tol:
        raise HomologicalResonance("lambda_1 = 0")

    def divisor(mono, j):
        return complex(np.dot(mono, lam) - lam[j])

    def resonant(mono, j):
        return sum(mono) == 3 and (mono[0] - mono[1]) == (1 if j == 0 else -1)

    H2 = {mm: v for mm, v in model.H.items() if sum(mm) == 2}
    H3 = {mm: v for mm, v in model.H.items() if sum(mm) == 3}
    p: dict = {}
    for mono, v in H2.items():
        pv = np.zeros(2, dtype=complex)
        for j in range(2):
            if v[j] == 0:
                continue
            dv = divisor(mono, j)
            if abs(dv) <= tol * max(1.0, abs(lam[0])):
                raise HomologicalResonance(f"quadratic resonance at {mono}")
            pv[j] = v[j] / dv
        p[mono] = pv

    # third-order right-hand side: H3 + DH2(q) p2(q)
    rhs3 = {mm: np.array(v, dtype=complex) for mm, v in H3.items()}
    for j in range(2):
        H2j = {mm: v[j] for mm, v in H2.items()}
        for i in range(2):
            dH = pa.pderiv(H2j, i)
            p2i = {mm: v[i] for mm, v in p.items()}
            for mm, c in pa.pmul(dH, p2i, 3).items():
                rhs3.setdefault(mm, np.zeros(2, dtype=complex))[j] += c

    N3: dict = {}
    resid = 0.0
    for mono in pa.monomials(2, 3):
        rv = rhs3.get(mono, np.zeros(2, dtype=complex))
        pv = np.zeros(2, dtype=complex)
        nv = np.zeros(2, dtype=complex)
        for j in range(2):
            if resonant(mono, j):
                nv[j] = rv[j]
                continue
            dv = divisor(mono, j)
            if abs(dv) <= tol * max(1.0, abs(lam[0])):
                raise HomologicalResonance(f"cubic resonance at {mono}")
            pv[j] = rv[j] / dv
            resid = max(resid, abs(dv * pv[j] - rv[j]))
        p[mono] = p.get(mono, 0) + pv
        N3[mono] = nv
    beta21 = -complex(N3[(2, 1)][0])

    # manifold in normal-form coordinates: (K o (id + p)) truncated at degree 3
    phi = [pa.padd(pa.variable(i, 2), {mm: v[i] for mm, v in p.items()}) for i in range(2)]
    Kt: dict = {}
    for mono, Km in model.K.items():
        if Km is None:
            raise NotComputed(f"coefficient {mono} unavailable (inner resonance)")
        term = pa.pmul(pa.ppow(phi[0], mono[0], 3, 2), pa.ppow(phi[1], mono[1], 3, 2), 3)
        for mm, c in term.items():
            if c == 0:
                continue
            Kt[mm] = Kt[mm] + Km * c if mm in Kt else Km * c
    for mm in pa.monomials(2, 3) + pa.monomials(2, 2):
        Kt.setdefault(mm, ExpSum.zero(model.system.n))

    pc = tuple(complex(p[mm][0]) for mm in ((3, 0), (1, 2), (0, 3)))
    polar = (float(lam[0].real), float(-beta21.real), float(lam[0].imag), float(-beta21.imag))
    return NormalFormData(model, complex(lam[0]), beta21, p, pc, polar, Kt, resid)


@dataclass(frozen=True)
class LimitCycle:
    """Predicted periodic orbit of the normal form."""

    r_hat: Optional[float]
    omega: Optional[float]
    stable: bool
    exists: bool

    @property
    def period(self) -> Optional[float]:
        if not self.exists or not self.omega:
            return None
        return 2 * math.pi / abs(self.omega)


def predict_limit_cycle(nf: NormalFormData, tol: float = 1e-12) -> LimitCycle:
    """Amplitude ``sqrt(Re lambda_1 / Re beta21)`` and frequency of the cycle."""
    a = nf.lam1.real
    b = nf.beta21.real
    if abs(b) <= tol * max(1.0, abs(nf.beta21)):
        raise DegenerateHopf("Re beta21 vanishes")
    rad = a / b
    if rad < 0:
        return LimitCycle(None, None, False, False)
    r_hat = math.sqrt(rad)
    omega = nf.lam1.imag - nf.beta21.imag * r_hat**2
    return LimitCycle(r_hat, omega, bool(a > 0 and b > 0), r_hat > 0)


# -- evaluation ----------------------------------------------------------------


def _eval_poly_exps(coeffs: dict, z: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(theta.shape + (n,), dtype=complex)
    for mono, Km in coeffs.items():
        if Km is None:
            raise NotComputed(f"coefficient {mono} unavailable (inner resonance)")
        w = np.prod(z ** np.array(mono))
        if w != 0:
            out += w * Km(theta)
    return out


def manifold_eval(obj, coord, theta=None, npts: int = 512) -> np.ndarray:
    """Sampled history on the manifold at a reduced coordinate.

    For an :class:`SSMModel`, ``coord`` is the diagonal coordinate (a scalar
    for a real eigenvalue or a conjugate pair).  For :class:`NormalFormData`
    it is ``(r, phi)`` with ``q = r exp(i phi)``.  Returns shape
    ``(len(theta), n)``; real when the reduced set is conjugation closed.
    """
    if isinstance(obj, NormalFormData):
        model = obj.model
        r, phi = coord
        z = np.array([r * np.exp(1j * phi), r * np.exp(-1j * phi)])
        coeffs = obj.Ktilde
    else:
        model = obj
        z = model.coordinates(coord)
        coeffs = model.K
    if theta is None:
        theta = np.linspace(-model.system.h, 0.0, npts)
    theta = np.asarray(theta, dtype=float)
    vals = _eval_poly_exps(coeffs, z, theta, model.system.n)
    real_coords = model.is_pair or (model.is_real and np.isreal(z).all())
    if real_coords:
        scale = max(1.0, float(np.abs(vals).max()))
        if np.abs(vals.imag).max() > 1e-8 * scale:
            raise ValueError("manifold evaluation is not real; check coordinates")
        return vals.real
    return vals


def periodic_orbit(nf: NormalFormData, t, cycle: Optional[LimitCycle] = None) -> np.ndarray:
    """``x_per(t) ~ Ktilde(r_hat, omega t)(0)`` on a time grid; shape ``(len(t), n)``."""
    cycle = cycle or predict_limit_cycle(nf)
    if not cycle.exists:
        raise DegenerateHopf("no periodic orbit predicted")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.array([manifold_eval(nf, (cycle.r_hat, cycle.omega * tk), theta=[0.0])[0] for tk in t])


# -- independent invariance check -------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """Relative invariance residual per monomial and overall maximum."""

    max_relative: float
    per_monomial: dict


def invariance_residual(model: SSMModel, ntorus: int = 16, ngrid: int = 33, quad_nodes: int = 64) -> ResidualReport:
    """Check the invariance equation of the 3-jet by sampling.

    ``K(z)`` and ``H(z)`` are evaluated at points of the torus ``|z_i| = 1``;
    the interior residual ``d/dtheta K - DK H`` and the boundary residual
    ``DK H(0) - L K - R(K)`` are formed with a quadrature rule for ``L``
    (no characteristic-matrix algebra) and the sampled nonlinearity, and
    monomial coefficients up to degree three are extracted by a discrete
    Fourier transform.  Each residual coefficient is compared to the largest
    of the corresponding coefficients of the individual terms.
    """
    system = model.system
    n, m = system.n, model.dim
    if any(k is None for k in model.K.values()):
        raise NotComputed("model has unresolved (resonant) coefficients")
    theta = np.linspace(-system.h, 0.0, ngrid)
    offs, mats = system.kernel.quadrature_rule(quad_nodes)
    lags = np.asarray(system.jet.lags)
    monos = list(model.K.keys())
    E = np.array(monos)  # (nm, m)

    # coefficient histories on all needed points
    pts = np.concatenate([theta, -offs, lags, [0.0]])
    Kv = np.array([model.K[mm](pts) for mm in monos])  # (nm, P, n)
    dKv = np.array([model.K[mm].derivative()(theta) for mm in monos])

    ticks = np.exp(2j * np.pi * np.arange(ntorus) / ntorus)
    grid = np.array(list(itertools.product(range(ntorus), repeat=m)))
    Z = ticks[grid]  # (S, m)
    powers = np.prod(Z[:, None, :] ** E[None, :, :], axis=2)  # (S, nm)

    # DK(z) H(z): sum_i dK/dz_i * H_i(z)
    Hmon = list(model.H.keys())
    HE = np.array(Hmon)
    Hc = np.array([model.H[mm] for mm in Hmon])  # (nh, m)
    Hz = np.prod(Z[:, None, :] ** HE[None, :, :], axis=2) @ Hc  # (S, m)
    weight = np.zeros((Z.shape[0], len(monos)), dtype=complex)
    for i in range(m):
        red = E.copy()
        red[:, i] = np.maximum(red[:, i] - 1, 0)
        dpow = E[None, :, i] * np.prod(Z[:, None, :] ** red[None, :, :], axis=2)
        weight += dpow * Hz[:, i : i + 1]
    DKH = np.einsum("sk,kpn->spn", weight, Kv)

    Kz = np.einsum("sk,kpn->spn", powers, Kv)
    dKz = np.einsum("sk,kpn->spn", powers, dKv)
    nt = len(theta)
    nq = len(offs)
    LK = np.einsum("jab,sjb->sa", mats, Kz[:, nt : nt + nq]) if nq else np.zeros((Z.shape[0], n))
    V = Kz[:, nt + nq : nt + nq + len(lags)].reshape(Z.shape[0], -1)
    RK = system.jet.evaluate(V)
    lhs0 = DKH[:, -1]

    pieces_interior = (dKz, DKH[:, :nt])
    pieces_boundary = (lhs0, LK, RK)
    res_int = dKz - DKH[:, :nt]
    res_bnd = lhs0 - LK - RK

    def coeff(samples, mono):
        w = np.prod(np.conj(Z) ** np.array(mono), axis=1)
        return np.tensordot(w, samples, axes=(0, 0)) / Z.shape[0]

    report = {}
    worst = 0.0
    scales = {}
    for deg in range(1, model.order + 1):
        for mono in pa.monomials(m, deg):
            sc = max(
                max(float(np.abs(coeff(p, mono)).max()) for p in pieces_interior),
                max(float(np.abs(coeff(p, mono)).max()) for p in pieces_boundary),
            )
            scales[mono] = sc
    glob = max(scales.values()) if scales else 1.0
    for mono, sc in scales.items():
        r = max(float(np.abs(coeff(res_int, mono)).max()), float(np.abs(coeff(res_bnd, mono)).max()))
        rel = r / max(sc, 1e-6 * glob, 1e-300)
        report[mono] = rel
        worst = max(worst, rel)
    return ResidualReport(worst, report)
