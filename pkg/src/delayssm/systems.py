"""Ready-made example systems."""

from __future__ import annotations

import numpy as np

from .model import DDESystem, PolynomialDDE, PolyTerm, linearize

__all__ = ["cushing", "sine_delay", "cubic_delay", "quadratic_delay", "linear_atom"]


def cushing(b: float, a: float = 1.0, h: float = 1.0) -> DDESystem:
    """``xdot = b int_0^h x(t-s) ds + a (x - sin x)``.

    The cubic jet is ``a x^3 / 6``; ``Lip(R) = 2a`` globally.
    """
    desc = PolynomialDDE(
        n=1,
        h=h,
        terms=(PolyTerm(a / 6.0, 0, ((0.0, 0), (0.0, 0), (0.0, 0))),),
        densities=((0.0, h, [[[b]]]),),
        label=f"cushing(b={b}, a={a}, h={h})",
        lip_global=2.0 * abs(a),
        func=lambda v: a * (v[..., :1] - np.sin(v[..., :1])),
    )
    return linearize(desc)


def sine_delay(h: float) -> DDESystem:
    """``xdot = -x(t-h) - (x - sin x)`` with ``Lip(R) = 2``."""
    desc = PolynomialDDE(
        n=1,
        h=h,
        terms=(
            PolyTerm(-1.0, 0, ((-h, 0),)),
            PolyTerm(-1.0 / 6.0, 0, ((0.0, 0), (0.0, 0), (0.0, 0))),
        ),
        label=f"sine_delay(h={h})",
        lip_global=2.0,
        func=lambda v: -(v[..., :1] - np.sin(v[..., :1])),
    )
    return linearize(desc)


def cubic_delay(h: float) -> DDESystem:
    """``xdot = -x(t-h) - x^3``; ``Lip_rho(R) = 3 rho^2``, no global bound."""
    desc = PolynomialDDE(
        n=1,
        h=h,
        terms=(
            PolyTerm(-1.0, 0, ((-h, 0),)),
            PolyTerm(-1.0, 0, ((0.0, 0), (0.0, 0), (0.0, 0))),
        ),
        label=f"cubic_delay(h={h})",
        lip_ball=lambda rho: 3.0 * rho**2,
    )
    return linearize(desc)


def quadratic_delay(h: float, q: float = 1.0, c: float = 0.0) -> DDESystem:
    """``xdot = -x(t-h) + q x^2 + c x^3`` (quadratic jet, used for scaling tests)."""
    terms = [
        PolyTerm(-1.0, 0, ((-h, 0),)),
        PolyTerm(q, 0, ((0.0, 0), (0.0, 0))),
    ]
    if c:
        terms.append(PolyTerm(c, 0, ((0.0, 0), (0.0, 0), (0.0, 0))))
    return linearize(PolynomialDDE(n=1, h=h, terms=tuple(terms), label=f"quadratic_delay(h={h}, q={q}, c={c})"))


def linear_atom(h: float, b: float = -1.0) -> DDESystem:
    """``xdot = b x(t-h)``."""
    return linearize(PolynomialDDE(n=1, h=h, terms=(PolyTerm(b, 0, ((-h, 0),)),), label=f"linear_atom(h={h}, b={b})"))
