"""Fixed-step method-of-steps integration and trajectory diagnostics.

The integrator is classical RK4.  Delayed values come from a piecewise cubic
Hermite interpolant built from the accepted steps; values inside the step
being taken are extrapolated from the last completed segment (a linear
Taylor step is used on the very first step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import Blowup, NoCycle, OutOfChart
from .expsum import ExpSum
from .model import DDESystem, gauss_legendre
from .projection import pairing

__all__ = [
    "Trajectory",
    "integrate",
    "default_step",
    "DecayFit",
    "measure_decay",
    "distance_to_manifold",
    "CycleFit",
    "extract_limit_cycle",
]


def _history_callable(history, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Normalize an initial history to ``theta -> array (..., n)`` (real)."""
    if history is None:
        return lambda th: np.zeros(np.shape(th) + (n,))
    if isinstance(history, ExpSum):
        return lambda th: np.real(history(th))
    if callable(history):
        def f(th):
            th = np.asarray(th, dtype=float)
            val = np.real(np.asarray(history(th), dtype=complex))
            if val.shape == th.shape:
                val = val[..., None]
            return np.broadcast_to(val, th.shape + (n,))
        return f
    const = np.broadcast_to(np.asarray(history, dtype=float), (n,)).copy()
    return lambda th: np.broadcast_to(const, np.shape(th) + (n,)).copy()


def default_step(system: DDESystem) -> float:
    """``min(h/64, smallest positive delay/8)`` adjusted to divide that delay."""
    h = system.h
    taus = [a.tau for a in system.kernel.atoms if a.tau > 0]
    taus += [-t for t in system.jet.lags if t < 0]
    dt = h / 64.0
    if taus:
        tmin = min(taus)
        dt = min(dt, tmin / 8.0)
        dt = tmin / math.ceil(tmin / dt - 1e-9)
    return dt


def _kernel_rule(kernel, nodes: int, split: Optional[float]):
    """Offsets and weight matrices of ``L``; densities are split at ``split``."""
    offs = [a.tau for a in kernel.atoms]
    mats = [np.asarray(a.B, dtype=float) for a in kernel.atoms]
    for d in kernel.densities:
        cuts = [d.a, d.b]
        if split is not None and d.a < split < d.b:
            cuts = [d.a, split, d.b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            s, w = gauss_legendre(lo, hi, nodes)
            offs.extend(s)
            mats.extend(w[:, None, None] * d(s))
    if not offs:
        return np.zeros(0), np.zeros((0, kernel.n, kernel.n))
    return np.asarray(offs, dtype=float), np.asarray(mats)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Solution on a uniform grid with cubic Hermite dense output.

    Attributes
    ----------
    t : ndarray, shape (m,)
    x : ndarray, shape (m, n)
    dx : ndarray, shape (m, n)
        Right-hand side at the grid points (Hermite slopes).
    system : DDESystem
    history : callable
        Initial history ``theta -> x(theta)`` on ``[-h, 0]``.
    dt : float
    """

    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    system: DDESystem
    history: Callable
    dt: float

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def __call__(self, s) -> np.ndarray:
        """Dense output at times ``s`` (history for ``s <= 0``)."""
        s = np.asarray(s, dtype=float)
        return _lookup(s, self.x, self.dx, self.dt, len(self.t) - 1, self.history, extrapolate=False)

    def segment(self, t: float) -> Callable[[np.ndarray], np.ndarray]:
        """The history ``x_t`` as a callable of ``theta`` in ``[-h, 0]``."""
        if t > self.t[-1] + 1e-12:
            raise ValueError("t beyond the integration horizon")
        return lambda th: self(t + np.asarray(th, dtype=float))

    def sup_norm(self, t: float, npts: int = 257) -> float:
        th = np.linspace(-self.system.h, 0.0, npts)
        return float(np.abs(self.segment(t)(th)).max())


def _lookup(s, X, F, dt, ndone, history, extrapolate=True):
    """Evaluate the piecewise Hermite interpolant; ``ndone`` completed steps."""
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.empty(flat.shape + (X.shape[1],))
    past = flat <= 0.0
    if past.any():
        out[past] = history(flat[past])
    fut = ~past
    if fut.any():
        q = flat[fut]
        if ndone == 0:
            out[fut] = X[0] + q[:, None] * F[0]
        else:
            k = np.minimum(np.floor(q / dt).astype(int), ndone - 1)
            u = q / dt - k
            if not extrapolate and np.any(u > 1.0 + 1e-9):
                raise ValueError("lookup beyond the integration horizon")
            u = u[:, None]
            h00 = (1 + 2 * u) * (1 - u) ** 2
            h10 = u * (1 - u) ** 2
            h01 = u**2 * (3 - 2 * u)
            h11 = u**2 * (u - 1)
            out[fut] = h00 * X[k] + h10 * dt * F[k] + h01 * X[k + 1] + h11 * dt * F[k + 1]
    return out.reshape(s.shape + (X.shape[1],))


def integrate(
    system: DDESystem,
    history=None,
    t_end: float = 10.0,
    dt: Optional[float] = None,
    bound: float = 1e8,
    quad_nodes: int = 32,
) -> Trajectory:
    """Integrate ``x' = L x_t + R(x_t)`` from an initial history.

    Parameters
    ----------
    history : None, float, array, callable or ExpSum
        ``None`` is the zero history; constants are broadcast.
    dt : float, optional
        Defaults to :func:`default_step`.  Must not exceed a quarter of the
        smallest positive delay.
    bound : float
        :class:`Blowup` is raised when ``|x|`` exceeds it.
    """
    kernel, jet = system.kernel, system.jet
    n = kernel.n
    hist = _history_callable(history, n)
    if dt is None:
        dt = default_step(system)
    dt = float(dt)
    pos = [a.tau for a in kernel.atoms if a.tau > 0] + [-t for t in jet.lags if t < 0]
    if not dt > 0 or (pos and dt > min(pos) / 4.0 * (1 + 1e-12)):
        raise ValueError("dt must be positive and at most a quarter of the smallest delay")
    nsteps = int(math.ceil(t_end / dt - 1e-9))

    lags = np.asarray(jet.lags)
    nl_delays = -lags
    static = _kernel_rule(kernel, quad_nodes, None)
    split_until = max((d.b for d in kernel.densities), default=0.0)
    use_nl = not jet.is_zero or jet.func is not None

    X = np.zeros((nsteps + 1, n))
    F = np.zeros((nsteps + 1, n))
    X[0] = hist(np.array([0.0]))[0]

    def rhs(t, y, ndone):
        # before the densities have passed t = 0 the integrand has a kink at s = t
        offs, W = static if t >= split_until else _kernel_rule(kernel, quad_nodes, t)
        delays = np.concatenate([offs, nl_delays])
        nk = len(offs)
        vals = _lookup(t - delays, X, F, dt, ndone, hist)
        vals[delays == 0.0] = y
        out = np.einsum("kij,kj->i", W, vals[:nk]) if nk else np.zeros(n)
        if use_nl:
            out = out + jet.full(vals[nk:].reshape(-1))
        return out

    F[0] = rhs(0.0, X[0], 0)
    for k in range(nsteps):
        t = k * dt
        y = X[k]
        k1 = F[k]
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1, k)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2, k)
        k4 = rhs(t + dt, y + dt * k3, k)
        ynew = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(ynew)) or np.abs(ynew).max() > bound:
            raise Blowup(f"|x| exceeded {bound:g} at t = {t + dt:.6g}")
        X[k + 1] = ynew
        F[k + 1] = rhs(t + dt, ynew, k)
    t = dt * np.arange(nsteps + 1)
    return Trajectory(t, X, F, system, hist, dt)


# -- diagnostics -----------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares slope of ``ln ||x_t||`` over a window."""

    exponent: float
    window: tuple
    decaying: bool


def measure_decay(traj: Trajectory, window: Optional[tuple] = None, npts: int = 400) -> DecayFit:
    """Fit ``ln max_theta |x(t + theta)|`` linearly in ``t``.

    ``window`` defaults to the second half of the trajectory.  The sup over
    the delay interval smooths out oscillation so complex roots give their
    real part.
    """
    T = traj.t[-1]
    t0, t1 = window if window is not None else (0.5 * T, T)
    ts = np.linspace(t0, t1, npts)
    h = traj.system.h
    x = traj.x
    # sup over [t - h, t] from the grid samples
    idx = np.unique(np.searchsorted(traj.t, ts))
    ts = traj.t[idx]
    lag = max(1, int(round(h / traj.dt)))
    norms = np.array([np.abs(x[max(i - lag, 0): i + 1]).max() for i in idx])
    if np.any(norms <= 0):
        return DecayFit(-math.inf, (t0, t1), True)
    slope = float(np.polyfit(ts, np.log(norms), 1)[0])
    return DecayFit(slope, (t0, t1), slope < 0)


def distance_to_manifold(traj: Trajectory, model, t: float, radius: float = 0.5, npts: int = 513) -> float:
    """Sup-norm distance of ``x_t`` to the graph of the 3-jet.

    The reduced coordinates are ``z_i = d_i^T <lambda_i, x_t>``; the result is
    ``max_theta |x_t(theta) - K(z)(theta)|``.
    """
    from .ssm import manifold_eval

    seg = traj.segment(t)
    kernel = traj.system.kernel
    z = np.array([e.d @ pairing(e.lam, seg, kernel) for e in model.eigen])
    if np.abs(z).max() > radius:
        raise OutOfChart(f"|z| = {np.abs(z).max():.3g} exceeds {radius}")
    theta = np.linspace(-kernel.h, 0.0, npts)
    coord = z[0] if model.is_pair else (z.real if model.is_real else z)
    graph = manifold_eval(model, coord, theta=theta)
    return float(np.abs(seg(theta) - graph).max())


@dataclass(frozen=True)
class CycleFit:
    """Amplitude (half peak-to-peak) and period of a settled oscillation."""

    amplitude: float
    period: float
    peaks: np.ndarray


def extract_limit_cycle(traj: Trajectory, component: int = 0, settle_tol: float = 1e-3) -> CycleFit:
    """Measure a periodic orbit from the tail of a trajectory.

    Uses the second half of the run; successive maxima must agree to
    ``settle_tol`` (relative), otherwise :class:`NoCycle` is raised.
    """
    t = traj.t
    x = traj.x[:, component]
    half = len(t) // 2
    tt, xx = t[half:], x[half:]
    i = np.where((xx[1:-1] > xx[:-2]) & (xx[1:-1] >= xx[2:]))[0] + 1
    if len(i) < 3:
        raise NoCycle("fewer than three maxima in the tail")
    peaks = xx[i]
    tail = peaks[-max(3, len(peaks) // 3):]
    scale = np.abs(tail).max()
    if scale == 0 or (tail.max() - tail.min()) > settle_tol * scale:
        raise NoCycle("successive maxima have not settled")
    amp = 0.5 * (xx.max() - xx.min())
    if amp <= 1e-12:
        raise NoCycle("no oscillation")
    mid = 0.5 * (xx.max() + xx.min())
    y = xx - mid
    up = np.where((y[:-1] < 0) & (y[1:] >= 0))[0]
    if len(up) < 2:
        raise NoCycle("not enough zero crossings")
    # linear interpolation of crossing times
    tc = tt[up] - y[up] * (tt[up + 1] - tt[up]) / (y[up + 1] - y[up])
    return CycleFit(float(amp), float(np.mean(np.diff(tc))), peaks)
