"""Residues of the inverse characteristic matrix and spectral projections.

For an eigenvalue ``lam`` with residue ``xi = Res_{z=lam} Delta(z)^{-1}`` the
spectral projection of a history ``u`` is

    (P_lam u)(theta) = exp(lam theta) xi [u(0) + int_{-h}^0 k_lam(sigma) u(sigma) dsigma],

    k_lam(sigma) = exp(-lam sigma) int_{s >= -sigma} exp(-lam s) dzeta(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline

from .errors import MultipleRoot, SeriesModeUnjustified
from .expsum import ExpSum
from .model import DelayKernel, gauss_legendre, total_variation
from .spectrum import CharMatrix, SpectrumSlice, _adjugate

__all__ = [
    "EigenData",
    "eigen_data",
    "xi_residue",
    "history_kernel",
    "pairing",
    "project_history",
    "project_exponential",
    "projection_norm",
    "DichotomyConstants",
    "dichotomy_constants",
    "f_form_constants",
]

History = Union[Callable, np.ndarray, ExpSum]


def _contour_residue(cm: CharMatrix, lam: complex, radius: float, npts: int = 256):
    t = 2 * math.pi * np.arange(npts) / npts
    e = np.exp(1j * t)
    z = lam + radius * e
    inv = np.linalg.inv(cm.delta(z))
    # trapezoid rule for (1/2 pi i) oint F(z) dz with dz = i r e dt
    res = (inv * (radius * e)[:, None, None]).mean(axis=0)
    second = (inv * (radius**2 * e**2)[:, None, None]).mean(axis=0)
    return res, second


def xi_residue(lam: complex, kernel: DelayKernel, allow_semisimple: bool = False, tol_deriv: float = 1e-6) -> np.ndarray:
    """Residue ``xi(lam)`` of ``Delta(z)^{-1}`` at a characteristic root.

    For simple roots ``xi = adj Delta(lam) / (det Delta)'(lam)``.  With
    ``allow_semisimple`` a multiple root whose inverse has a first-order pole
    is handled by a contour integral.

    Examples
    --------
    >>> from delayssm.model import DelayKernel
    >>> xi_residue(0.0, DelayKernel(2, 1.0), allow_semisimple=True).real.round(12)
    array([[1., 0.],
           [0., 1.]])
    """
    cm = CharMatrix(kernel)
    lam = complex(lam)
    f, df, sc = cm.det(np.array(lam), with_scale=True)
    if abs(complex(df)) > tol_deriv * float(sc) / max(1.0, abs(lam)):
        return _adjugate(cm.delta(np.array(lam))) / complex(df)
    if not allow_semisimple:
        raise MultipleRoot(f"root {lam} is not simple (|d det| = {abs(complex(df)):.2e})")
    radius = 1e-2 * max(1.0, abs(lam))
    res, second = _contour_residue(cm, lam, radius)
    if np.abs(second).max() > 1e-8 * max(1.0, np.abs(res).max()) * radius:
        raise MultipleRoot(f"root {lam} carries a Jordan block; no first-order residue")
    return res


@dataclass(frozen=True, eq=False)
class EigenData:
    """Simple eigenvalue with normalized right/left vectors, ``xi = c d^T``."""

    lam: complex
    c: np.ndarray
    d: np.ndarray
    xi: np.ndarray

    def eigenfunction(self) -> ExpSum:
        return ExpSum.term(self.lam, self.c)


def _normalize(c: np.ndarray) -> np.ndarray:
    big = np.abs(c).max()
    first = next(i for i, v in enumerate(c) if abs(v) > 1e-12 * big)
    phase = c[first] / abs(c[first])
    c = c / phase
    c = c / np.abs(c).max()
    c[first] = c[first].real
    return c


def eigen_data(lam: complex, kernel: DelayKernel) -> EigenData:
    """Eigenvector data for a simple root.

    ``c`` has its first nonzero entry real positive and unit sup norm.
    """
    xi = xi_residue(lam, kernel)
    col = int(np.argmax(np.abs(xi).sum(axis=0)))
    c = _normalize(xi[:, col].copy())
    i = int(np.argmax(np.abs(c)))
    d = xi[i, :] / c[i]
    return EigenData(complex(lam), c, d, xi)


# -- pairing and projections ---------------------------------------------------


def history_kernel(lam: complex, sigma, kernel: DelayKernel) -> np.ndarray:
    """``k_lam(sigma)`` for ``sigma`` in ``[-h, 0]``; shape ``sigma.shape + (n, n)``."""
    sigma = np.asarray(sigma, dtype=float)
    tail = kernel.tail_transform(lam, -sigma)
    return np.exp(-complex(lam) * sigma)[..., None, None] * tail


def _as_callable(u: History, h: float, n: int) -> Callable:
    if isinstance(u, ExpSum) or callable(u):
        f = u

        def g(theta):
            val = np.asarray(f(theta))
            if val.ndim == np.ndim(theta):
                val = val[..., None]
            return val

        return g
    arr = np.asarray(u)
    if arr.ndim == 1:
        arr = arr[:, None]
    grid = np.linspace(-h, 0.0, arr.shape[0])
    spline = CubicSpline(grid, arr, axis=0)
    return lambda theta: spline(np.asarray(theta, dtype=float))


def _sigma_rule(kernel: DelayKernel, nodes: int = 64, subdiv: int = 1):
    bps = np.unique(np.concatenate([-kernel.breakpoints(), [0.0, -kernel.h]]))
    xs, ws = [], []
    for a, b in zip(bps[:-1], bps[1:]):
        edges = np.linspace(a, b, subdiv + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = gauss_legendre(lo, hi, nodes)
            xs.append(x)
            ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def pairing(lam: complex, u: History, kernel: DelayKernel, grid: int = 512) -> np.ndarray:
    """``u(0) + int k_lam(sigma) u(sigma) dsigma`` (piecewise 64-point Gauss)."""
    f = _as_callable(u, kernel.h, kernel.n)
    u0 = np.asarray(f(np.array([0.0])))[0].astype(complex)
    if kernel.is_zero:
        return u0
    sig, w = _sigma_rule(kernel)
    K = history_kernel(lam, sig, kernel)
    vals = np.asarray(f(sig)).astype(complex)
    return u0 + np.einsum("s,sij,sj->i", w, K, vals)


def _residue_for(lam, kernel, allow_semisimple):
    return xi_residue(lam, kernel, allow_semisimple=allow_semisimple)


def project_history(
    lam: Union[complex, Sequence[complex]],
    u: History,
    kernel: DelayKernel,
    grid: int = 512,
    allow_semisimple: bool = True,
) -> ExpSum:
    """Spectral projection of a history onto one eigenvalue or a set of them.

    ``u`` may be a callable of ``theta``, an :class:`ExpSum` or samples on a
    uniform grid over ``[-h, 0]`` (interpolated by a cubic spline).
    """
    lams = [complex(lam)] if np.ndim(lam) == 0 else [complex(v) for v in lam]
    out = ExpSum.zero(kernel.n)
    for mu in lams:
        xi = _residue_for(mu, kernel, allow_semisimple)
        out = out + ExpSum.term(mu, xi @ pairing(mu, u, kernel, grid))
    return out


def divided_difference(cm: CharMatrix, nu: complex, lam: complex) -> np.ndarray:
    """``(Delta(nu) - Delta(lam)) / (nu - lam)``, or ``Delta'(lam)`` when equal."""
    if abs(nu - lam) <= 1e-12 * max(1.0, abs(lam)):
        return cm.ddelta(np.array(lam))
    return (cm.delta(np.array(nu)) - cm.delta(np.array(lam))) / (nu - lam)


def project_exponential(lam: complex, nu: complex, g, kernel: DelayKernel, xi: Optional[np.ndarray] = None) -> ExpSum:
    """Closed-form ``P_lam (g exp(nu theta)) = exp(lam theta) xi D(nu, lam) g``."""
    cm = CharMatrix(kernel)
    if xi is None:
        xi = xi_residue(lam, kernel)
    v = xi @ divided_difference(cm, complex(nu), complex(lam)) @ np.asarray(g, dtype=complex)
    return ExpSum.term(lam, v)


def projection_norm(kernel: DelayKernel, eigenvalues: Sequence[complex], ntheta: int = 129) -> float:
    """Operator sup-norm of the real spectral projection onto ``eigenvalues``.

    The set must be closed under conjugation.  The norm equals the maximum
    over ``theta`` and output rows of the total variation of the
    representing measure: an atom ``G(theta)`` at ``sigma = 0`` plus the
    density ``Re sum exp(lam theta) xi k_lam(sigma)``.
    """
    lams = [complex(v) for v in eigenvalues]
    xis = [xi_residue(v, kernel, allow_semisimple=True) for v in lams]
    sig, w = _sigma_rule(kernel, nodes=16, subdiv=48)
    ks = [np.einsum("ij,sjk->sik", xi, history_kernel(v, sig, kernel)) for v, xi in zip(lams, xis)]

    def norm_at(theta: float) -> float:
        G = sum(np.exp(v * theta) * xi for v, xi in zip(lams, xis)).real
        D = sum(np.exp(v * theta) * k for v, k in zip(lams, ks)).real
        rows = np.abs(G).sum(axis=1) + np.einsum("s,sij->i", w, np.abs(D))
        return float(rows.max())

    thetas = np.linspace(-kernel.h, 0.0, ntheta)
    vals = np.array([norm_at(t) for t in thetas])
    k = int(np.argmax(vals))
    lo = thetas[max(k - 1, 0)]
    hi = thetas[min(k + 1, ntheta - 1)]
    best = vals[k]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: -norm_at(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = max(best, -res.fun)
    return best


# -- dichotomy constants -------------------------------------------------------


@dataclass(frozen=True)
class DichotomyConstants:
    """Semigroup and dichotomy constants.

    ``||T(t)|| <= M exp(omega t)``; ``K1``, ``K2`` bound the projected
    semigroup on the reduced and complementary parts with slacks ``eps1``,
    ``eps2``.
    """

    M: float
    omega: float
    K1: float
    K2: float
    eps1: float = 1e-5
    eps2: float = 1e-5
    mode: str = "series"

    def __post_init__(self):
        for name in ("M", "K1", "K2", "eps1", "eps2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.omega == 0:
            raise ValueError("omega must be nonzero")


def dichotomy_constants(
    slice: SpectrumSlice,
    mode: str = "series",
    eps1: float = 1e-5,
    eps2: float = 1e-5,
    M: Optional[float] = None,
    omega: Optional[float] = None,
    K1: Optional[float] = None,
    K2: Optional[float] = None,
    kernel: Optional[DelayKernel] = None,
    omega_offset: float = 1e-6,
) -> DichotomyConstants:
    """Constants for the inertial-manifold inequalities.

    ``series``: all roots simple, ``M = K1 = K2 = 1`` and ``omega`` just
    above the spectral bound.  ``conservative``: user values; ``M`` defaults
    to 1 with ``omega = TV(zeta)`` (Gronwall), ``K1 = K2 = 1`` unless given.
    """
    if mode == "series":
        mults = list(slice.multiplicities) + list(slice.other_multiplicities)
        if any(m > 1 for m in mults):
            raise SeriesModeUnjustified("series mode needs simple roots")
        top = max(z.real for z in slice.roots) if slice.roots else slice.alpha
        om = top + omega_offset if omega is None else float(omega)
        if om == 0.0:
            om = omega_offset
        return DichotomyConstants(1.0, om, 1.0, 1.0, eps1, eps2, "series")
    if mode == "conservative":
        if omega is None:
            if kernel is None:
                raise ValueError("conservative mode needs omega or the kernel")
            omega = total_variation(kernel)
        return DichotomyConstants(
            1.0 if M is None else float(M),
            float(omega),
            1.0 if K1 is None else float(K1),
            1.0 if K2 is None else float(K2),
            eps1,
            eps2,
            "conservative",
        )
    raise ValueError(f"unknown mode {mode!r}")


def f_form_constants(h: float, beta2: float, eps: float = 1e-5) -> DichotomyConstants:
    """Constants of the splitting ``F = beta2 id + (F - beta2 id)``.

    ``M = 1``, ``omega = 1``, ``K1 = 1`` and ``K2 = exp(-beta2 h)``.
    """
    return DichotomyConstants(1.0, 1.0, 1.0, math.exp(-beta2 * h), eps, eps, "f_form")
