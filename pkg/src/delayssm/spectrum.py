"""Characteristic matrix, rigorous root search and spectral-gap diagnostics.

Roots of ``det Delta(z)``, ``Delta(z) = z I - E(z)``, are located with the
argument principle on rectangles: a rectangle is bisected until each piece
holds at most one root (counted with multiplicity), whose location then
follows from the first moment ``(1/2 pi i) oint z f'/f`` and a Newton polish.
The search box is finite because every root with ``Re z >= x`` satisfies
``|z| <= ||E||`` bounded by :meth:`DelayKernel.modulus_bound`.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BoundaryRoot,
    ContourNotConverged,
    InsufficientDepth,
    StripBoundUnavailable,
)
from .model import DelayKernel

__all__ = [
    "Tolerances",
    "CharMatrix",
    "char_det",
    "count_roots_in_rect",
    "SpectrumSlice",
    "roots_right_of",
    "smoothness_degree",
    "NonresonanceReport",
    "nonresonance_check",
    "DensityReport",
    "root_density_check",
]

_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances of the root finder."""

    tol_root: float = 1e-12
    tol_sep: float = 1e-8
    tol_res: float = 1e-8
    tol_boundary: float = 1e-10
    tol_deriv: float = 1e-6


def _adjugate(M: np.ndarray) -> np.ndarray:
    """Adjugate of a batch of square matrices (cofactor formula)."""
    n = M.shape[-1]
    if n == 1:
        return np.ones_like(M)
    if n == 2:
        out = np.empty_like(M)
        out[..., 0, 0] = M[..., 1, 1]
        out[..., 1, 1] = M[..., 0, 0]
        out[..., 0, 1] = -M[..., 0, 1]
        out[..., 1, 0] = -M[..., 1, 0]
        return out
    out = np.empty_like(M)
    idx = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = M[..., idx != i, :][..., :, idx != j]
            out[..., j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return out


class CharMatrix:
    """Closed-form characteristic matrix of a delay kernel."""

    def __init__(self, kernel: DelayKernel):
        self.kernel = kernel
        self.n = kernel.n
        self._eye = np.eye(self.n)

    def delta(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z[..., None, None] * self._eye - self.kernel.transform(z)

    def ddelta(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self._eye, z.shape + (self.n, self.n)) - self.kernel.transform_derivative(z)

    def det(self, z, with_scale: bool = False):
        """``det Delta(z)`` and its derivative (Jacobi's formula).

        With ``with_scale`` also return :meth:`scale` at the same points.
        """
        D = self.delta(z)
        dD = self.ddelta(z)
        if self.n == 1:
            f, df = D[..., 0, 0], dD[..., 0, 0]
        else:
            f = np.linalg.det(D)
            df = np.einsum("...ij,...ji->...", _adjugate(D), dD)
        if with_scale:
            return f, df, np.prod(np.abs(D).sum(axis=-1), axis=-1) + 1.0
        return f, df

    def scale(self, z) -> np.ndarray:
        """Natural magnitude of ``det Delta(z)`` (product of row norms)."""
        D = self.delta(z)
        return np.prod(np.abs(D).sum(axis=-1), axis=-1) + 1.0


def char_det(z, kernel: DelayKernel) -> tuple[complex, complex]:
    """Return ``(det Delta(z), d/dz det Delta(z))``.

    Examples
    --------
    >>> from delayssm.model import DelayKernel
    >>> f, df = char_det(0.0, DelayKernel(1, 1.0, atoms=[(1.0, [[-1.0]])]))
    >>> complex(f), complex(df)
    ((1+0j), (0+0j))
    """
    f, df = CharMatrix(kernel).det(z)
    if np.ndim(f) == 0:
        return complex(f), complex(df)
    return f, df


# -- argument principle ---------------------------------------------------------

Rect = tuple  # (x0, x1, y0, y1)


def _initial_panels(rect: Rect, density: float):
    """Panel endpoints of the positively oriented rectangle boundary."""
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    starts, ends = [], []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        panels = max(2, int(math.ceil(abs(b - a) * density)))
        t = np.linspace(0.0, 1.0, panels + 1)
        starts.append(a + (b - a) * t[:-1])
        ends.append(a + (b - a) * t[1:])
    return np.concatenate(starts), np.concatenate(ends)


@dataclass
class _ContourResult:
    count: int
    moment: complex
    moments: Optional[np.ndarray] = None


def _contour(cm: CharMatrix, rect: Rect, tol: Tolerances, nmoments: int = 1) -> _ContourResult:
    x0, x1, y0, y1 = rect
    # enough panels to resolve exp(-z h) oscillation along vertical edges
    density = 1.0 + 0.5 * cm.kernel.h
    near = min(1e-4 * min(x1 - x0, y1 - y0), 1e-5)
    gx, gw = _GL16
    zmax = max(abs(complex(x, y)) for x in (x0, x1) for y in (y0, y1))
    # per-panel tolerance on each moment, scaled by the size of z**k
    atol = 1e-10 * max(1.0, zmax) ** np.arange(nmoments + 1)

    def panel_values(a, b):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        z = mid[:, None] + half[:, None] * gx[None, :]
        f, df, sc = cm.det(z.ravel(), with_scale=True)
        absf = np.abs(f)
        if np.any(absf <= tol.tol_boundary * sc) or not np.all(np.isfinite(absf)):
            raise BoundaryRoot(f"characteristic root on or near the contour {rect}")
        # |f/f'| estimates the distance to the closest root
        if np.min(absf / (np.abs(df) + 1e-300)) < near:
            raise BoundaryRoot(f"characteristic root within {near:.1e} of the contour {rect}")
        g = (df / f).reshape(z.shape) * (half[:, None] * gw[None, :]) / (2j * math.pi)
        return np.einsum("pq,pqk->pk", g, z[..., None] ** np.arange(nmoments + 1))

    a, b = _initial_panels(rect, density)
    v = panel_values(a, b)
    total = np.zeros(nmoments + 1, dtype=complex)
    evaluated = a.size
    budget = 250_000 + 8 * a.size
    # adaptive bisection: only panels close to a root get refined
    while a.size:
        m = 0.5 * (a + b)
        left, right = panel_values(a, m), panel_values(m, b)
        evaluated += 2 * a.size
        both = left + right
        done = np.all(np.abs(both - v) <= atol, axis=1)
        total += both[done].sum(axis=0)
        keep = ~done
        a, b, v = (
            np.concatenate([a[keep], m[keep]]),
            np.concatenate([m[keep], b[keep]]),
            np.concatenate([left[keep], right[keep]]),
        )
        if evaluated > budget:
            # a root hugging the boundary makes the integrand nearly singular
            raise BoundaryRoot(f"argument-principle integral did not converge on {rect}")
    I0 = total[0]
    if abs(I0 - round(I0.real)) > 1e-3:
        raise BoundaryRoot(f"argument-principle integral did not converge on {rect}")
    return _ContourResult(int(round(I0.real)), total[1], total[1:])


def count_roots_in_rect(rect: Rect, kernel: DelayKernel, tol: Tolerances = Tolerances()) -> int:
    """Number of characteristic roots (with multiplicity) inside ``rect``.

    ``rect`` is ``(x0, x1, y0, y1)`` describing ``[x0, x1] x [y0, y1]``.
    Raises :class:`BoundaryRoot` when a root sits on the boundary.
    """
    return _contour(CharMatrix(kernel), tuple(float(v) for v in rect), tol).count


# -- root search ----------------------------------------------------------------


def _newton(cm: CharMatrix, z0: complex, mult: int = 1, maxit: int = 60) -> tuple[complex, bool]:
    z = complex(z0)
    for _ in range(maxit):
        f, df = cm.det(np.array(z))
        f, df = complex(f), complex(df)
        if df == 0:
            return z, False
        step = mult * f / df
        z -= step
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            return z, True
    f, _ = cm.det(np.array(z))
    return z, abs(complex(f)) <= 1e-10 * float(cm.scale(np.array(z)))


def _inside(z: complex, rect: Rect, pad: float) -> bool:
    x0, x1, y0, y1 = rect
    return x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad


def _prunable(kernel: DelayKernel, rect: Rect) -> bool:
    x0, x1, y0, y1 = rect
    cx = min(max(0.0, x0), x1)
    cy = min(max(0.0, y0), y1)
    return abs(complex(cx, cy)) > kernel.modulus_bound(x0) * (1 + 1e-9) + 1e-12


def _cluster_roots(moments: np.ndarray, m: int) -> np.ndarray:
    """Roots of the polynomial whose power sums are ``moments[0..m-1]`` (Newton identities)."""
    e = [1.0 + 0j]
    for k in range(1, m + 1):
        s = sum((-1) ** (i - 1) * e[k - i] * moments[i - 1] for i in range(1, k + 1))
        e.append(s / k)
    coeffs = [(-1) ** k * e[k] for k in range(m + 1)]
    return np.roots(coeffs)


def _split(rect: Rect, frac: float) -> tuple[Rect, Rect]:
    x0, x1, y0, y1 = rect
    if x1 - x0 >= y1 - y0:
        xm = x0 + frac * (x1 - x0)
        return (x0, xm, y0, y1), (xm, x1, y0, y1)
    ym = y0 + frac * (y1 - y0)
    return (x0, x1, y0, ym), (x0, x1, ym, y1)


_FRACS = (0.5 + 0.0123, 0.5, 0.5 - 0.0171, 0.5 + 0.0311, 0.5 - 0.0427, 0.43, 0.58)


def _locate(cm: CharMatrix, rect: Rect, count: int, tol: Tolerances, threads: int = 1) -> list[tuple[complex, int]]:
    """All roots inside ``rect`` whose total count is known."""
    found: list[tuple[complex, int]] = []
    work: list[tuple[Rect, int]] = [(rect, count)]
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while work:
            rect_i, cnt = work.pop()
            if cnt == 0:
                continue
            x0, x1, y0, y1 = rect_i
            size = max(x1 - x0, y1 - y0)
            scale = max(1.0, abs(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))))
            res = None
            if cnt <= 6 and size < 1e-2 * scale or cnt == 1:
                res = _contour(cm, rect_i, tol, nmoments=max(cnt, 1))
            if cnt == 1:
                z, ok = _newton(cm, res.moment)
                if ok and _inside(z, rect_i, 1e-9 * scale):
                    found.append((z, 1))
                    continue
            elif res is not None:
                pts = _cluster_roots(res.moments, cnt)
                centre = res.moments[0] / cnt
                spread = float(np.max(np.abs(pts - centre)))
                if spread <= 1e-6 * scale or size < tol.tol_sep * scale:
                    z, _ = _newton(cm, centre, mult=cnt, maxit=5)
                    if not _inside(z, rect_i, 1e-9 * scale):
                        z = centre
                    found.append((complex(centre if abs(z - centre) > 1e-8 * scale else z), cnt))
                    continue
            if size < tol.tol_sep * scale:
                raise ContourNotConverged(f"roots in {rect_i} could not be separated")
            halves = None
            for frac in _FRACS:
                a, b = _split(rect_i, frac)
                try:
                    pieces = [a, b]
                    counts = []
                    jobs = [p for p in pieces if not _prunable(cm.kernel, p)]
                    if pool is not None and len(jobs) > 1:
                        results = dict(zip(jobs, pool.map(lambda r: _contour(cm, r, tol).count, jobs)))
                    else:
                        results = {p: _contour(cm, p, tol).count for p in jobs}
                    counts = [results.get(p, 0) for p in pieces]
                except BoundaryRoot:
                    continue
                if sum(counts) != cnt:
                    continue
                halves = list(zip(pieces, counts))
                break
            if halves is None and res is not None and cnt > 1:
                # every split line runs into the cluster: treat it as one
                # multiple root at the centroid, which the moments give stably
                found.append((complex(res.moments[0] / cnt), cnt))
                continue
            if halves is None:
                raise ContourNotConverged(f"could not split {rect_i} consistently")
            work.extend(halves)
    finally:
        if pool is not None:
            pool.shutdown()
    return found


def _root_key(z: complex) -> tuple:
    return (round(z.real, 9), z.imag)


def _symmetrize(roots: list[tuple[complex, int]]) -> list[tuple[complex, int]]:
    """Snap near-real roots to the axis and make conjugate partners exact."""
    out: list[tuple[complex, int]] = []
    upper = []
    roots = [(0j if abs(z) <= 1e-14 else z, m) for z, m in roots]
    # a root of multiplicity m is only determined to about eps**(1/m)
    near_real = lambda z, m: abs(z.imag) <= max(1e-10, 10 * 2.2e-16 ** (1.0 / m)) * max(1.0, abs(z))  # noqa: E731
    for z, m in roots:
        if near_real(z, m):
            out.append((complex(z.real, 0.0), m))
        elif z.imag > 0:
            upper.append((z, m))
    lower = [(z, m) for z, m in roots if z.imag < 0 and not near_real(z, m)]
    for z, m in upper:
        out.append((z, m))
        # keep the partner that was actually found if it matches
        if any(abs(w - z.conjugate()) <= 1e-6 * max(1.0, abs(z)) for w, _ in lower):
            out.append((z.conjugate(), m))
    for w, m in lower:
        if not any(abs(w - z.conjugate()) <= 1e-6 * max(1.0, abs(z)) for z, _ in upper):
            out.append((w, m))
    out.sort(key=lambda t: _root_key(t[0]))
    return out


@dataclass(frozen=True)
class SpectrumSlice:
    """Characteristic roots right of a cut line together with gap data.

    Attributes
    ----------
    gamma : float
        Cut line; ``roots`` are all roots with ``Re >= gamma`` (the set Sigma).
    roots : tuple of complex
        Sorted by ``(Re, Im)``.
    multiplicities : tuple of int
    beta : float or None
        Largest real part of roots left of the cut found by the secondary
        search; ``None`` when none was found within the explored depth.
    others : tuple of complex
        Known roots left of the cut (the part of Sigma' that was resolved).
    other_multiplicities : tuple of int
    floor : float
        Every root with real part at least ``floor`` is listed in
        ``roots`` or ``others``.
    """

    gamma: float
    roots: tuple
    multiplicities: tuple
    beta: Optional[float] = None
    others: tuple = ()
    other_multiplicities: tuple = ()
    floor: float = -math.inf

    @property
    def alpha(self) -> float:
        """Smallest real part in Sigma (``inf`` when Sigma is empty)."""
        if not self.roots:
            return math.inf
        return min(z.real for z in self.roots)

    @property
    def conjugate_closed(self) -> bool:
        for z, m in zip(self.roots, self.multiplicities):
            if not any(
                abs(w - z.conjugate()) <= 1e-8 * max(1.0, abs(z)) and k == m
                for w, k in zip(self.roots, self.multiplicities)
            ):
                return False
        return True

    @property
    def all_simple(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def all_known(self) -> list[tuple[complex, int]]:
        pairs = list(zip(self.roots, self.multiplicities)) + list(
            zip(self.others, self.other_multiplicities)
        )
        return sorted(pairs, key=lambda t: _root_key(t[0]))

    def restrict(self, cut: float) -> "SpectrumSlice":
        """Keep roots with ``Re >= cut`` as Sigma and move the rest to Sigma'."""
        keep = [(z, m) for z, m in zip(self.roots, self.multiplicities) if z.real >= cut]
        moved = [(z, m) for z, m in zip(self.roots, self.multiplicities) if z.real < cut]
        others = sorted(moved + list(zip(self.others, self.other_multiplicities)), key=lambda t: _root_key(t[0]))
        beta = self.beta
        if moved:
            top = max(z.real for z, _ in moved)
            beta = top if beta is None else max(beta, top)
        return SpectrumSlice(
            gamma=float(cut),
            roots=tuple(z for z, _ in keep),
            multiplicities=tuple(m for _, m in keep),
            beta=beta,
            others=tuple(z for z, _ in others),
            other_multiplicities=tuple(m for _, m in others),
            floor=self.floor,
        )


def roots_right_of(
    gamma: float,
    kernel: DelayKernel,
    depth: Optional[float] = None,
    tol: Tolerances = Tolerances(),
    threads: int = 1,
    box: Optional[Rect] = None,
    max_modulus: float = 1e6,
) -> SpectrumSlice:
    """All characteristic roots with ``Re >= gamma`` plus the gap below.

    Parameters
    ----------
    gamma : float
        Cut line.
    kernel : DelayKernel
    depth : float, optional
        The secondary search for ``beta`` scans ``[gamma - depth, gamma)``;
        default ``3 |gamma| + 5``.
    box : (x1, y1), optional
        User-supplied bounding box replacing the modulus bound.
    max_modulus : float
        Secondary search stops when the modulus bound exceeds this.
    """
    cm = CharMatrix(kernel)
    gamma = float(gamma)
    if box is None:
        R = kernel.modulus_bound(gamma)
        if not math.isfinite(R):
            raise StripBoundUnavailable("modulus bound is not finite; pass box=")
        rect0 = [gamma, R + 1.0, -(R + 1.0), R + 1.0]
    else:
        rect0 = [gamma, float(box[0]), -float(box[1]), float(box[1])]

    shift = 1e-7 * max(1.0, abs(gamma))
    roots = None
    # nudge the cut left, geometrically, until no root is close to it
    for attempt in range(14):
        try:
            rect = tuple(rect0)
            total = _contour(cm, rect, tol).count
            roots = _locate(cm, rect, total, tol, threads)
            break
        except BoundaryRoot:
            rect0[0] -= shift
            shift *= 3.0
    if roots is None:
        raise BoundaryRoot("could not place the cut line away from roots")
    gamma_eff = rect0[0]
    roots = _symmetrize(roots)

    if depth is None:
        depth = 3.0 * abs(gamma) + 5.0
    beta = None
    others: list[tuple[complex, int]] = []
    x_hi = gamma_eff
    floor = gamma_eff
    lowest = gamma - depth
    while x_hi > lowest:
        width = max(1.0, 0.25 * abs(x_hi))
        x_lo = max(x_hi - width, lowest)
        R = kernel.modulus_bound(x_lo)
        if R > max_modulus:
            break
        strip = None
        for nudge in (0.0, 1.3e-7, -2.9e-7, 5.3e-7, 3.1e-3, -7.3e-3, 2.3e-2):
            try:
                strip = (x_lo + nudge * max(1.0, abs(x_lo)), x_hi, -(R + 1.0), R + 1.0)
                cnt = _contour(cm, strip, tol).count
                break
            except BoundaryRoot:
                strip = None
        if strip is None:
            raise BoundaryRoot(f"secondary search could not avoid roots near Re = {x_lo}")
        floor = strip[0]
        if cnt:
            others = _symmetrize(_locate(cm, strip, cnt, tol, threads))
            beta = max(z.real for z, _ in others)
            break
        x_hi = strip[0]

    return SpectrumSlice(
        gamma=gamma_eff,
        roots=tuple(z for z, _ in roots),
        multiplicities=tuple(m for _, m in roots),
        beta=beta,
        others=tuple(z for z, _ in others),
        other_multiplicities=tuple(m for _, m in others),
        floor=floor,
    )


# -- gap diagnostics --------------------------------------------------------------


def smoothness_degree(slice_or_alpha, k_max: int, beta: Optional[float] = None) -> int:
    """Largest ``l <= k_max`` with ``beta < l * alpha`` (at least 1).

    Accepts a :class:`SpectrumSlice` or a bare ``alpha`` with ``beta=``.
    Returns ``k_max`` when ``alpha >= 0`` or no root lies below the cut.
    """
    if isinstance(slice_or_alpha, SpectrumSlice):
        alpha, beta = slice_or_alpha.alpha, slice_or_alpha.beta
    else:
        alpha = float(slice_or_alpha)
    if alpha >= 0 or beta is None or beta == -math.inf:
        return int(k_max)
    best = 1
    for ell in range(1, int(k_max) + 1):
        if beta < ell * alpha:
            best = ell
    return best


@dataclass(frozen=True)
class NonresonanceReport:
    kind: str
    r: int
    satisfied: bool
    violations: tuple = ()


def _minkowski(parts: Sequence[Sequence[complex]]) -> list[tuple[complex, tuple]]:
    """All sums taking one element from each part, with the chosen elements."""
    out = []
    for combo in itertools.product(*parts):
        out.append((complex(sum(combo)), combo))
    return out


def _hits(value: complex, targets: Sequence[complex], tol: float) -> list[complex]:
    return [t for t in targets if abs(value - t) <= tol * max(1.0, abs(t))]


def nonresonance_check(
    slice: SpectrumSlice,
    kind: str = "A4",
    sigma: Optional[Sequence[complex]] = None,
    tol_res: float = 1e-8,
    r: Optional[int] = None,
    r_max: int = 12,
) -> NonresonanceReport:
    """Check integer-combination nonresonance of a reduced spectral set.

    ``kind``:

    * ``"A4"`` for stable sets: with ``S~`` the roots outside Sigma whose real
      part lies in ``[inf Re Sigma, 0)`` and ``S~'`` the remaining stable
      roots, ``((i-j) S~ + j S~') ∩ S~`` must be empty for ``2 <= i <= r``,
      ``1 <= j <= i``, where ``r`` is the least integer with
      ``(r+1) sup Re(stable) < inf Re S~``.
    * ``"A5"`` for unstable sets: ``j Sigma`` must miss the unstable roots
      outside Sigma for ``2 <= j <= r``, ``r`` least with
      ``(r+1) inf Re Sigma > sup Re(outside)``.
    * ``"sums"``: sums of ``2..r`` elements of Sigma must miss every known
      root outside Sigma (``r`` defaults to 3).

    ``sigma`` picks Sigma among the known roots (default: ``slice.roots``).
    Each sum ``j S`` is the set of sums of ``j`` elements of ``S``.
    """
    known = [z for z, _ in slice.all_known()]
    if sigma is None:
        sigma = list(slice.roots)
    sigma = [complex(s) for s in sigma]

    def in_sigma(z):
        return any(abs(z - s) <= 1e-10 * max(1.0, abs(s)) for s in sigma)

    outside = [z for z in known if not in_sigma(z)]
    violations = []

    if kind == "A4":
        if any(s.real >= 0 for s in sigma):
            raise ValueError("A4 needs a stable Sigma")
        inf_sigma = min(s.real for s in sigma)
        if slice.floor > inf_sigma:
            raise InsufficientDepth("spectrum not resolved down to inf Re Sigma")
        tilde = [z for z in outside if inf_sigma <= z.real < 0]
        if not tilde:
            return NonresonanceReport("A4", 0, True, ())
        stable = [z for z in known if z.real < 0]
        sup_stable = max(z.real for z in stable)
        inf_tilde = min(z.real for z in tilde)
        rr = 0
        while not (rr + 1) * sup_stable < inf_tilde:
            rr += 1
        # a sum of stable roots reaching Re >= inf_tilde only uses summands
        # with Re >= inf_tilde, so deeper roots can be ignored
        tilde_p = [z for z in stable if z not in tilde and z.real >= inf_tilde]
        if slice.floor > inf_tilde:
            raise InsufficientDepth("spectrum not resolved down to inf Re S~")
        for i in range(2, rr + 1):
            for j in range(1, i + 1):
                parts = [tilde] * (i - j) + [tilde_p] * j
                for val, combo in _minkowski(parts):
                    for hit in _hits(val, tilde, tol_res):
                        violations.append((i, j, combo, hit))
        return NonresonanceReport("A4", rr, not violations, tuple(violations))

    if kind == "A5":
        if any(s.real <= 0 for s in sigma):
            raise ValueError("A5 needs an unstable Sigma")
        if slice.floor > 0 and slice.gamma > 0:
            raise InsufficientDepth("unstable spectrum not fully resolved")
        rest = [z.real for z in outside]
        sup_rest = max(rest) if rest else (slice.beta if slice.beta is not None else -math.inf)
        inf_sigma = min(s.real for s in sigma)
        rr = 0
        while not (rr + 1) * inf_sigma > sup_rest:
            rr += 1
            if rr > r_max:
                raise InsufficientDepth("r exceeds r_max")
        targets = [z for z in outside if z.real > 0]
        for j in range(2, rr + 1):
            for val, combo in _minkowski([sigma] * j):
                for hit in _hits(val, targets, tol_res):
                    violations.append((j, combo, hit))
        return NonresonanceReport("A5", rr, not violations, tuple(violations))

    if kind == "sums":
        rr = 3 if r is None else int(r)
        lowest = min(s.real for s in sigma) * rr if sigma else 0.0
        if slice.floor > lowest and not all(s.real >= 0 for s in sigma):
            raise InsufficientDepth("spectrum not resolved deep enough for r-fold sums")
        for j in range(2, rr + 1):
            seen = set()
            for val, combo in _minkowski([sigma] * j):
                key = tuple(sorted((round(c.real, 12), round(c.imag, 12)) for c in combo))
                if key in seen:
                    continue
                seen.add(key)
                for hit in _hits(val, outside, tol_res):
                    violations.append((j, combo, hit))
        return NonresonanceReport("sums", rr, not violations, tuple(violations))

    raise ValueError(f"unknown nonresonance kind {kind!r}")


@dataclass(frozen=True)
class DensityReport:
    radius: float
    count: int
    exponential_type: float
    asymptote: float

    @property
    def ratio(self) -> float:
        """``n(r) / r`` divided by ``E / pi``."""
        if self.asymptote == 0:
            return math.inf if self.count else 1.0
        return self.count / self.asymptote


def root_density_check(kernel: DelayKernel, radius: float, exponential_type: Optional[float] = None) -> DensityReport:
    """Compare the root count in ``|z| < radius`` with ``E radius / pi``.

    ``E`` defaults to ``n`` times the largest support point of the kernel,
    an upper estimate of the exponential type of ``det Delta``.
    """
    cm = CharMatrix(kernel)
    if exponential_type is None:
        pts = [a.tau for a in kernel.atoms if np.any(a.B)] + [d.b for d in kernel.densities if np.any(d.coeffs)]
        exponential_type = kernel.n * (max(pts) if pts else 0.0)
    npts = max(256, int(8 * radius * (1 + kernel.h)))
    prev = None
    for _ in range(12):
        t = 2 * math.pi * np.arange(npts) / npts
        z = radius * np.exp(1j * t)
        f, df = cm.det(z)
        if np.any(np.abs(f) <= 1e-10 * cm.scale(z)):
            raise BoundaryRoot("root on the counting circle")
        val = (df / f * z).mean().real
        if prev is not None and abs(val - prev) < 1e-3 and abs(val - round(val)) < 0.25:
            break
        prev = val
        npts *= 2
    else:
        raise ContourNotConverged("root count on circle did not converge")
    return DensityReport(float(radius), int(round(val)), float(exponential_type), exponential_type * radius / math.pi)
