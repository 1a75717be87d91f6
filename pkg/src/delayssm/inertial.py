"""Inertial-manifold certificates and decay-rate witnesses.

Three routes are available: a spectral gap with explicit dichotomy
constants, a small-delay bound driven by the kernel variation, and the
``F``-form splitting ``F = beta2 id + (F - beta2 id)``.  A fourth entry point
handles nonlinearities that are only locally Lipschitz through a cutoff.

Every certificate stores its witnesses and the evaluated inequalities, and
:func:`verify_certificate` re-derives them by plain arithmetic.

Condition identifiers
---------------------
``nu_range``        ``0 < nu < (alpha - beta - eps1 - eps2) / ln 2``
``step_lipschitz``  ``Lip < omega / (2 M (exp(omega/nu) - 1))``
``gap_balance``     ``(sqrt K1 + sqrt K2)^2 4 M^2 Lip <
                    omega exp((alpha - eps1 - omega)/nu) / (exp(omega/nu) - 1)``
``gap_simplified``  ``(sqrt K1 + sqrt K2)^2 8 M^2 Lip exp((omega + eps1 - alpha)/|omega|) < nu``
                    (usable in place of ``gap_balance`` when ``nu > |omega|``)
``small_delay``     ``h < min(ln((2Q)^(-1/n) r) / r, ln((2Q)^(-1/n) |gamma|) / |gamma|)``
``f_form``          ``16 (1 + exp(-beta2 h / 2))^2 Lip(F) < |beta2|``
``cutoff``          ``C Lip_{4 rho}(R) < (alpha1 - alpha2) /
                    ((sqrt K1 + sqrt K2)^2 (2 M^2/omega)(exp(omega/nu) - 1) exp(omega/nu))``
``negative_kappa``  ``kappa < 0`` (needed when the reduced spectrum is unstable)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import BadBeta2, MissingBallLipschitz, NoGlobalLipschitz
from .model import DDESystem, q_constant, total_variation
from .projection import DichotomyConstants, dichotomy_constants, f_form_constants, projection_norm
from .spectrum import SpectrumSlice, roots_right_of

__all__ = [
    "Inequality",
    "IMCertificate",
    "RhoParams",
    "RhoCurve",
    "rho_decay_rate",
    "lipschitz_time_map",
    "tau_curves",
    "certify_gap",
    "certify_small_delay",
    "certify_f_form",
    "f_form_hmax",
    "certify_with_cutoff",
    "verify_certificate",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Inequality:
    """A strict inequality ``lhs < rhs`` with an identifier."""

    name: str
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return bool(self.lhs < self.rhs)

    @property
    def ratio(self) -> float:
        """``lhs / rhs``; below one when the inequality holds (for positive ``rhs``)."""
        if self.rhs > 0:
            return self.lhs / self.rhs if math.isfinite(self.lhs) else math.inf
        return -math.inf if self.lhs < self.rhs else math.inf

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


@dataclass(frozen=True)
class IMCertificate:
    """Outcome of an inertial-manifold check.

    Attributes
    ----------
    route : {'gap', 'small_delay', 'f_form', 'cutoff'}
    verdict : {'certified', 'not_certified', 'not_applicable'}
    nu, eps1, eps2, M, omega, K1, K2, lip : float
        Witnesses entering the inequalities.
    kappa : float or None
        Upper bound on the exponential attraction rate (the smaller unit
        crossing of the decay curve).
    ell : int or None
        Smoothness witness: the largest ``l`` with ``kappa < l * gamma1``.
    failing : str or None
        Identifier of the first violated condition.
    inequalities : tuple of Inequality
    alpha, beta : float or None
        Spectral gap edges used.
    details : dict
        Route-specific extras (``Q``, ``r``, ``rho_crit``, ``gamma1`` ...).
    """

    route: str
    verdict: str
    nu: Optional[float] = None
    eps1: float = 1e-5
    eps2: float = 1e-5
    M: float = 1.0
    omega: Optional[float] = None
    K1: float = 1.0
    K2: float = 1.0
    lip: Optional[float] = None
    kappa: Optional[float] = None
    ell: Optional[int] = None
    failing: Optional[str] = None
    inequalities: tuple = ()
    alpha: Optional[float] = None
    beta: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def as_dict(self) -> dict:
        out = {
            k: getattr(self, k)
            for k in ("route", "verdict", "nu", "eps1", "eps2", "M", "omega", "K1", "K2", "lip",
                      "kappa", "ell", "failing", "alpha", "beta")
        }
        out["inequalities"] = [q.as_dict() for q in self.inequalities]
        out["details"] = {k: v for k, v in self.details.items() if isinstance(v, (int, float, str, type(None)))}
        return out


# -- the decay curve ----------------------------------------------------------------


@dataclass(frozen=True)
class RhoParams:
    """Parameters of ``rho(s) = C1/(alpha1 - x) + C2/(x - alpha2)``, ``x = exp(s/nu)``.

    The poles sit at ``s_lo`` (``alpha2 = exp(s_lo/nu)``) and ``s_hi``
    (``alpha1 = exp(s_hi/nu)``); ``lip_N`` scales the curve.
    """

    nu: float
    s_lo: float
    s_hi: float
    C1: float = 1.0
    C2: float = 1.0
    lip_N: float = 0.0

    def __post_init__(self):
        if not (self.nu > 0 and self.s_lo < self.s_hi):
            raise ValueError("need nu > 0 and s_lo < s_hi")

    @property
    def alpha1(self) -> float:
        return math.exp(self.s_hi / self.nu)

    @property
    def alpha2(self) -> float:
        return math.exp(self.s_lo / self.nu)

    def rho(self, s) -> np.ndarray:
        """Unscaled ``rho(exp(s/nu))``; differences use ``expm1`` to stay accurate."""
        s = np.asarray(s, dtype=float)
        x = np.exp(s / self.nu)
        left = x * np.expm1((self.s_hi - s) / self.nu)
        right = self.alpha2 * np.expm1((s - self.s_lo) / self.nu)
        return self.C1 / left + self.C2 / right

    def scaled(self, s) -> np.ndarray:
        return self.lip_N * self.rho(s)

    def argmin(self) -> float:
        """Minimizer in ``s`` (closed form in ``x``)."""
        r1, r2 = math.sqrt(self.C1), math.sqrt(self.C2)
        x = (r2 * self.alpha1 + r1 * self.alpha2) / (r1 + r2)
        s = self.nu * math.log(x)
        return min(max(s, self.s_lo), self.s_hi)


def lipschitz_time_map(M: float, omega: float, nu: float, lip: float) -> float:
    """Bound ``(2 M^2/omega)(exp(omega/nu) - 1) exp(omega/nu) Lip`` on the time-``1/nu`` nonlinearity."""
    t = omega / nu
    return 2.0 * M**2 * (math.expm1(t) / omega) * math.exp(t) * lip


def rho_decay_rate(params: RhoParams, lip_N: Optional[float] = None):
    """Unit crossings ``(gamma2, gamma1)`` of ``lip_N * rho``, or ``None``.

    With ``lip_N == 0`` the whole interval ``(s_lo, s_hi)`` is returned.
    """
    lip = params.lip_N if lip_N is None else float(lip_N)
    if lip == 0.0:
        return (params.s_lo, params.s_hi)
    p = replace(params, lip_N=lip)
    g = lambda s: float(p.scaled(s)) - 1.0  # noqa: E731
    sm = p.argmin()
    if not g(sm) < 0.0:
        return None

    def crossing(end: float) -> float:
        # approach the pole geometrically until the curve exceeds one
        for k in range(1, 1100):
            s = end - (end - sm) * 2.0**-k
            if s == end or g(s) > 0:
                break
        lo, hi = sorted((sm, s))
        root = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        # near a pole the curve is steep; pick the best neighbouring double
        cand = root + np.spacing(root) * np.arange(-64, 65)
        cand = cand[(cand > lo) & (cand < hi)]
        if cand.size == 0:
            return root
        return float(cand[np.argmin(np.abs(p.scaled(cand) - 1.0))])

    return crossing(p.s_lo), crossing(p.s_hi)


@dataclass(frozen=True)
class RhoCurve:
    """Samples of a scaled decay curve with its unit crossings."""

    params: RhoParams
    s: np.ndarray
    values: np.ndarray
    roots: Optional[tuple]
    variant: str = "R"

    @property
    def minimum(self) -> float:
        return float(self.params.scaled(self.params.argmin()))

    def table(self) -> np.ndarray:
        """Two-column array ``(s, value)`` for export."""
        return np.column_stack([self.s, self.values])


def _curve(params: RhoParams, npts: int, variant: str) -> RhoCurve:
    # interior grid, denser near the poles
    u = 0.5 - 0.5 * np.cos(np.linspace(0.0, np.pi, npts + 2)[1:-1])
    s = params.s_lo + (params.s_hi - params.s_lo) * u
    return RhoCurve(params, s, params.scaled(s), rho_decay_rate(params), variant)


def _smoothness(roots, ell_max: int = 10) -> Optional[int]:
    if roots is None:
        return None
    g2, g1 = roots
    if g1 >= 0:
        return ell_max
    ell = 1
    while ell < ell_max and g2 < (ell + 1) * g1:
        ell += 1
    return ell


def _gap_edges(slice: SpectrumSlice) -> tuple[float, float]:
    if not slice.roots:
        raise ValueError("the reduced spectrum is empty")
    if slice.beta is None:
        raise ValueError("no root found below the cut; deepen the spectrum search")
    return float(slice.alpha), float(slice.beta)


def _top(slice: SpectrumSlice) -> float:
    return max(z.real for z in slice.roots)


def tau_curves(
    system: DDESystem,
    slice: Optional[SpectrumSlice] = None,
    variant: str = "R",
    eps: float = 1e-5,
    beta2: Optional[float] = None,
    lip: Optional[float] = None,
    npts: int = 1000,
) -> RhoCurve:
    """Decay curve of the gap route (``'R'``) or of the ``F``-form (``'F'``).

    ``'R'``: ``nu = (lambda1 - lambda2 - 3 eps)/ln 2`` with the gap edges of
    ``slice``, ``omega = lambda1 + eps``, ``M = K1 = K2 = 1``.
    ``'F'``: ``omega = 1``, ``nu = (-beta2 - 2 eps)/ln 2``,
    ``C2 = exp(-h beta2)`` on ``(beta2, -eps)``; ``lip`` defaults to
    ``TV + Lip(R)``.
    """
    if variant == "R":
        if slice is None:
            raise ValueError("the R curve needs a spectrum slice")
        lip = system.jet.lip_global if lip is None else lip
        if lip is None:
            raise NoGlobalLipschitz("set lip_global or pass lip=")
        alpha, beta = _gap_edges(slice)
        nu = (alpha - beta - 3.0 * eps) / LN2
        omega = _top(slice) + eps
        params = RhoParams(nu, beta + eps, alpha - eps, 1.0, 1.0, lipschitz_time_map(1.0, omega, nu, lip))
        return _curve(params, npts, "R")
    if variant == "F":
        if beta2 is None:
            raise ValueError("the F curve needs beta2")
        if beta2 >= -1:
            raise BadBeta2("beta2 must be below -1")
        lipF = _lip_full(system) if lip is None else lip
        nu = (-beta2 - 2.0 * eps) / LN2
        params = RhoParams(nu, beta2, -eps, 1.0, math.exp(-system.h * beta2), lipschitz_time_map(1.0, 1.0, nu, lipF))
        return _curve(params, npts, "F")
    raise ValueError(f"unknown variant {variant!r}")


# -- gap route ------------------------------------------------------------------------


def _gap_checks(nu, alpha, beta, d: DichotomyConstants, lip) -> list[Inequality]:
    M, om, K1, K2, e1, e2 = d.M, d.omega, d.K1, d.K2, d.eps1, d.eps2
    kk = (math.sqrt(K1) + math.sqrt(K2)) ** 2
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        t = np.float64(om) / nu
        em1 = np.expm1(t)
        out = [
            Inequality("nu_range", float(nu), float((alpha - beta - e1 - e2) / LN2)),
            Inequality("step_lipschitz", float(lip), float(om / (2.0 * M * em1))),
            Inequality(
                "gap_balance",
                float(kk * 4.0 * M**2 * lip),
                float(om * np.exp((alpha - e1 - om) / nu) / em1),
            ),
        ]
        if nu > abs(om):
            out.append(
                Inequality(
                    "gap_simplified",
                    float(kk * 8.0 * M**2 * lip * np.exp((om + e1 - alpha) / abs(om))),
                    float(nu),
                )
            )
    return [q if not math.isnan(q.rhs) else Inequality(q.name, q.lhs, -math.inf) for q in out]


def _gap_ok(checks: list[Inequality]) -> tuple[bool, Optional[str]]:
    by = {q.name: q for q in checks}
    if not (by["nu_range"].holds and by["nu_range"].lhs > 0):
        return False, "nu_range"
    if not by["step_lipschitz"].holds:
        return False, "step_lipschitz"
    if by["gap_balance"].holds or ("gap_simplified" in by and by["gap_simplified"].holds):
        return True, None
    return False, "gap_balance"


def _gap_score(nu, alpha, beta, d, lip) -> float:
    """Largest ratio among the binding constraints (below one means certified)."""
    by = {q.name: q.ratio for q in _gap_checks(nu, alpha, beta, d, lip)}
    alt = min(by["gap_balance"], by.get("gap_simplified", math.inf))
    val = max(by["step_lipschitz"], alt)
    return val if math.isfinite(val) else 1e300


def _kappa(alpha, beta, nu, d: DichotomyConstants, lip):
    params = RhoParams(nu, beta + d.eps2, alpha - d.eps1, d.K1, d.K2, lipschitz_time_map(d.M, d.omega, nu, lip))
    roots = rho_decay_rate(params)
    return roots, params


def certify_gap(
    system: DDESystem,
    slice: SpectrumSlice,
    dich: Optional[DichotomyConstants] = None,
    lip: Optional[float] = None,
    nscan: int = 400,
) -> IMCertificate:
    """Spectral-gap certificate with a search over ``nu``.

    ``nu`` is chosen to make the binding constraint as slack as possible;
    when the reduced spectrum has a root with positive real part the
    certificate additionally requires ``kappa < 0``.
    """
    lip = system.jet.lip_global if lip is None else lip
    if lip is None:
        raise NoGlobalLipschitz("global Lipschitz constant missing; try certify_with_cutoff")
    lip = float(lip)
    d = dichotomy_constants(slice) if dich is None else dich
    alpha, beta = _gap_edges(slice)
    nu_max = (alpha - beta - d.eps1 - d.eps2) / LN2
    base = dict(eps1=d.eps1, eps2=d.eps2, M=d.M, omega=d.omega, K1=d.K1, K2=d.K2, lip=lip, alpha=alpha, beta=beta)
    if nu_max <= 0:
        checks = _gap_checks(max(nu_max, 0.0), alpha, beta, d, lip)
        return IMCertificate("gap", "not_certified", nu=None, failing="nu_range", inequalities=tuple(checks), **base)

    if lip == 0.0:
        nu = 0.5 * nu_max
    else:
        grid = nu_max * np.geomspace(1e-6, 1.0 - 1e-9, nscan)
        scores = np.array([_gap_score(v, alpha, beta, d, lip) for v in grid])
        k = int(np.argmin(scores))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, nscan - 1)]
        nu = float(grid[k])
        if hi > lo:
            res = optimize.minimize_scalar(
                lambda v: _gap_score(v, alpha, beta, d, lip), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * nu_max}
            )
            if res.fun < scores[k]:
                nu = float(res.x)
    checks = _gap_checks(nu, alpha, beta, d, lip)
    ok, failing = _gap_ok(checks)
    kappa = ell = None
    details: dict = {}
    if ok:
        roots, _ = _kappa(alpha, beta, nu, d, lip)
        if roots is not None:
            kappa = float(roots[0])
            details["gamma1"] = float(roots[1])
            ell = _smoothness(roots)
        if alpha > 0:
            checks.append(Inequality("negative_kappa", math.inf if kappa is None else kappa, 0.0))
            if kappa is None or kappa >= 0:
                ok, failing = False, "negative_kappa"
    return IMCertificate(
        "gap", "certified" if ok else "not_certified", nu=nu, kappa=kappa, ell=ell,
        failing=failing, inequalities=tuple(checks), details=details, **base,
    )


# -- small delays --------------------------------------------------------------------


def _small_delay_r(n, Q, d: DichotomyConstants, lip, alpha) -> tuple[float, float, float]:
    """Return ``(gamma, nu_min, r)``."""
    gamma = -((2.0 * Q) ** (1.0 / n)) - 1.0
    M, om, K1, K2, e1, e2 = d.M, d.omega, d.K1, d.K2, d.eps1, d.eps2
    kk = (math.sqrt(K1) + math.sqrt(K2)) ** 2
    a = kk * 8.0 * M**2 * lip * math.exp((om + e1 - alpha) / abs(om))
    third = 0.0
    if lip > 0:
        arg = 1.0 + om / (2.0 * M * lip)
        if arg > 0 and arg != 1.0:
            third = om / math.log(arg)
    nu_min = max(a, abs(om), third)
    return gamma, nu_min, nu_min * LN2 - gamma + e1 + e2


def _small_delay_check(h, n, Q, gamma, r) -> Inequality:
    s = (2.0 * Q) ** (-1.0 / n)
    g = abs(gamma)
    bound = min(math.log(s * r) / r, math.log(s * g) / g)
    return Inequality("small_delay", float(h), float(bound))


def certify_small_delay(
    system: DDESystem,
    mode: str = "series",
    eps1: float = 1e-5,
    eps2: float = 1e-5,
    dich: Optional[DichotomyConstants] = None,
    slice: Optional[SpectrumSlice] = None,
) -> IMCertificate:
    """Small-delay certificate.

    ``Q`` comes from the kernel variation, ``gamma = -(2Q)^(1/n) - 1`` sets
    the cut, and the delay must satisfy the ``small_delay`` bound.  Series
    constants use the roots right of ``gamma``; conservative ones use
    ``omega = TV``.
    """
    lip = system.jet.lip_global
    if lip is None:
        raise NoGlobalLipschitz("global Lipschitz constant missing; try certify_with_cutoff")
    kernel = system.kernel
    n = kernel.n
    Q = q_constant(kernel)
    if Q == 0.0:
        return IMCertificate("small_delay", "not_applicable", lip=lip, failing="small_delay", details={"Q": 0.0})
    gamma = -((2.0 * Q) ** (1.0 / n)) - 1.0
    if slice is None:
        slice = roots_right_of(gamma, kernel)
    alpha = slice.alpha if slice.roots else gamma
    if dich is None:
        if mode == "series":
            dich = dichotomy_constants(slice, "series", eps1, eps2)
        else:
            dich = dichotomy_constants(slice, "conservative", eps1, eps2, kernel=kernel)
    gamma, nu_min, r = _small_delay_r(n, Q, dich, lip, alpha)
    check = _small_delay_check(kernel.h, n, Q, gamma, r)
    ok = check.holds
    kappa = ell = None
    details = {"Q": Q, "gamma": gamma, "r": r, "n": n, "h": kernel.h}
    if ok and slice.roots and slice.beta is not None:
        nu = (alpha - slice.beta - dich.eps1 - dich.eps2) / LN2 * (1.0 - 1e-9)
        roots, _ = _kappa(alpha, slice.beta, nu, dich, lip)
        if roots is not None:
            kappa = float(roots[0])
            details["gamma1"] = float(roots[1])
            ell = _smoothness(roots)
    return IMCertificate(
        "small_delay", "certified" if ok else "not_certified", nu=nu_min, eps1=dich.eps1, eps2=dich.eps2,
        M=dich.M, omega=dich.omega, K1=dich.K1, K2=dich.K2, lip=lip, kappa=kappa, ell=ell,
        failing=None if ok else "small_delay", inequalities=(check,), alpha=alpha,
        beta=slice.beta, details=details,
    )


# -- F-form ----------------------------------------------------------------------------


def _lip_full(system: DDESystem) -> float:
    lip = system.jet.lip_global
    if lip is None:
        raise NoGlobalLipschitz("global Lipschitz constant missing")
    return total_variation(system.kernel) + float(lip)


def _f_form_check(h, beta2, lipF) -> Inequality:
    return Inequality("f_form", 16.0 * (1.0 + math.exp(-beta2 * h / 2.0)) ** 2 * lipF, abs(beta2))


def f_form_hmax(beta2, lip_F: float = 3.0):
    """Largest delay accepted by the ``F``-form test; ``0`` when none is.

    ``h_max = (2/|beta2|) ln(sqrt(|beta2|/(16 Lip)) - 1)``.  Vectorized in
    ``beta2``.
    """
    b = np.abs(np.asarray(beta2, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        if lip_F == 0:
            out = np.full_like(b, np.inf)
        else:
            arg = np.sqrt(b / (16.0 * lip_F)) - 1.0
            out = np.where(arg > 1.0, 2.0 / b * np.log(np.where(arg > 1.0, arg, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def certify_f_form(
    system: DDESystem,
    beta2: float,
    lip_F: Optional[float] = None,
    eps: float = 1e-5,
) -> IMCertificate:
    """Certificate for the splitting with linear part ``beta2 id``."""
    if not beta2 < -1:
        raise BadBeta2("beta2 must be below -1")
    lipF = _lip_full(system) if lip_F is None else float(lip_F)
    h = system.h
    d = f_form_constants(h, beta2, eps)
    check = _f_form_check(h, beta2, lipF)
    ok = check.holds
    nu = (-beta2 - 2.0 * eps) / LN2
    kappa = ell = None
    details: dict = {"beta2": beta2, "h": h}
    if ok:
        curve = tau_curves(system, None, "F", eps=eps, beta2=beta2, lip=lipF, npts=8)
        if curve.roots is not None:
            kappa = float(curve.roots[0])
            details["gamma1"] = float(curve.roots[1])
            ell = _smoothness(curve.roots)
    return IMCertificate(
        "f_form", "certified" if ok else "not_certified", nu=nu, eps1=eps, eps2=eps, M=1.0, omega=1.0,
        K1=1.0, K2=d.K2, lip=lipF, kappa=kappa, ell=ell, failing=None if ok else "f_form",
        inequalities=(check,), alpha=0.0, beta=beta2, details=details,
    )


# -- cutoff ---------------------------------------------------------------------------


def _cutoff_rhs(alpha, beta, d: DichotomyConstants) -> tuple[float, float]:
    """Return ``(nu, rhs)`` with ``nu = (alpha - beta - eps1 - eps2 - eps)/ln 2``."""
    eps = max(d.eps1, d.eps2)
    nu = (alpha - beta - d.eps1 - d.eps2 - eps) / LN2
    a1 = math.exp((alpha - d.eps1) / nu)
    a2 = math.exp((beta + d.eps2) / nu)
    kk = (math.sqrt(d.K1) + math.sqrt(d.K2)) ** 2
    return nu, (a1 - a2) / (kk * lipschitz_time_map(d.M, d.omega, nu, 1.0))


def certify_with_cutoff(
    system: DDESystem,
    rho: float,
    slice: SpectrumSlice,
    dich: Optional[DichotomyConstants] = None,
    pnorm: Optional[float] = None,
) -> IMCertificate:
    """Certificate for the cut-off nonlinearity on the ball of radius ``rho``.

    ``Lip(R_rho) <= 2 (1 + 2 ||P_Sigma||) Lip_{4 rho}(R)``.  The default
    constants are the conservative ones (``M = 1``, ``omega = TV``).  The
    critical radius where the test switches is stored as
    ``details['rho_crit']``.
    """
    jet = system.jet
    if jet.lip_ball is None and jet.func is not None:
        raise MissingBallLipschitz("supply lip_ball for a non-polynomial nonlinearity")
    if dich is None:
        dich = dichotomy_constants(slice, "conservative", kernel=system.kernel)
    alpha, beta = _gap_edges(slice)
    if pnorm is None:
        pnorm = projection_norm(system.kernel, slice.roots)
    C = 2.0 * (1.0 + 2.0 * pnorm)
    nu, rhs = _cutoff_rhs(alpha, beta, dich)
    lhs_of = lambda r: C * jet.ball_lipschitz(4.0 * r)  # noqa: E731
    check = Inequality("cutoff", float(lhs_of(rho)), float(rhs))

    rho_crit = math.inf
    if lhs_of(1.0) > 0:
        hi = 1.0
        while lhs_of(hi) < rhs and hi < 1e12:
            hi *= 2.0
        if lhs_of(hi) >= rhs:
            lo = 0.0
            while lhs_of(hi / 2.0) >= rhs and hi > 1e-300:
                hi /= 2.0
            lo = hi / 2.0
            rho_crit = optimize.brentq(lambda r: lhs_of(r) - rhs, lo, hi, xtol=1e-15, rtol=1e-13)
    ok = check.holds
    kappa = ell = None
    details = {"C": C, "pnorm": pnorm, "rho": rho, "rho_crit": rho_crit}
    if ok:
        roots, _ = _kappa(alpha, beta, nu, dich, C * jet.ball_lipschitz(4.0 * rho))
        if roots is not None:
            kappa = float(roots[0])
            details["gamma1"] = float(roots[1])
            ell = _smoothness(roots)
    return IMCertificate(
        "cutoff", "certified" if ok else "not_certified", nu=nu, eps1=dich.eps1, eps2=dich.eps2, M=dich.M,
        omega=dich.omega, K1=dich.K1, K2=dich.K2, lip=check.lhs, kappa=kappa, ell=ell,
        failing=None if ok else "cutoff", inequalities=(check,), alpha=alpha, beta=beta, details=details,
    )


# -- replay -------------------------------------------------------------------------------


def _close(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def verify_certificate(cert: IMCertificate) -> bool:
    """Recompute every inequality from the stored witnesses.

    Returns ``True`` when the recomputed values match the stored ones and
    the verdict agrees with them.
    """
    if cert.verdict == "not_applicable":
        return True
    d = DichotomyConstants(cert.M, cert.omega, cert.K1, cert.K2, cert.eps1, cert.eps2, "replay")
    if cert.route == "gap":
        checks = _gap_checks(cert.nu, cert.alpha, cert.beta, d, cert.lip)
        ok, _ = _gap_ok(checks)
        extra = [q for q in cert.inequalities if q.name == "negative_kappa"]
        if extra:
            ok = ok and extra[0].holds and extra[0].lhs == (math.inf if cert.kappa is None else cert.kappa)
            checks = checks + extra
    elif cert.route == "small_delay":
        det = cert.details
        gamma, _, r = _small_delay_r(det["n"], det["Q"], d, cert.lip, cert.alpha)
        checks = [_small_delay_check(det["h"], det["n"], det["Q"], gamma, r)]
        ok = checks[0].holds
    elif cert.route == "f_form":
        checks = [_f_form_check(cert.details["h"], cert.beta, cert.lip)]
        ok = checks[0].holds and _close(cert.K2, math.exp(-cert.beta * cert.details["h"]))
    elif cert.route == "cutoff":
        nu, rhs = _cutoff_rhs(cert.alpha, cert.beta, d)
        checks = [Inequality("cutoff", cert.lip, rhs)]
        ok = checks[0].holds and _close(nu, cert.nu)
    else:
        raise ValueError(f"unknown route {cert.route!r}")
    if len(checks) != len(cert.inequalities):
        return False
    for a, b in zip(checks, cert.inequalities):
        if a.name != b.name or not (_close(a.lhs, b.lhs) and _close(a.rhs, b.rhs)):
            return False
    return ok == cert.certified
