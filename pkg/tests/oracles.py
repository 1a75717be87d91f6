"""Independent reference computations used by the tests.

Nothing here imports the package: roots come from mpmath Newton iterations
or Lambert W branches, residues from numerical differentiation.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.special import lambertw

mp.mp.dps = 30


def cushing_char(z, b, h=1.0):
    """Scalar characteristic function ``z - b (1 - exp(-z h))/z`` times ``z``."""
    return z * z - b * (1 - mp.exp(-z * h))


def cushing_root(seed, b, h=1.0) -> complex:
    return complex(mp.findroot(lambda z: cushing_char(z, b, h), mp.mpc(seed)))


def cushing_xi(lam, b, h=1.0) -> complex:
    """Residue of ``1/Delta`` with ``Delta(z) = z - b (1 - e^{-zh})/z``."""
    lam = mp.mpc(lam)
    delta = lambda z: z - b * (1 - mp.exp(-z * h)) / z  # noqa: E731
    return complex(1 / mp.diff(delta, lam))


def atom_roots(h: float, b: float = -1.0, branches=range(-3, 3)) -> list[complex]:
    """Roots of ``z = b exp(-z h)``: ``z = W_k(b h)/h``."""
    return [complex(lambertw(b * h, k) / h) for k in branches]


def atom_xi(lam: complex, h: float, b: float = -1.0) -> complex:
    """``1/Delta'(lam)`` for ``Delta(z) = z - b e^{-zh}``."""
    return 1.0 / (1.0 + b * h * np.exp(-lam * h))


def sine_delay_real_roots(h: float) -> tuple[float, float]:
    """The two real roots of ``z + exp(-z h) = 0`` for ``h < 1/e``."""
    return float(lambertw(-h, 0).real / h), float(lambertw(-h, -1).real / h)


def small_delay_bound(Q=1.0, n=1, lip=2.0, omega_minus_alpha=0.0, omega=-1.0, eps=0.0) -> float:
    """Hand-evaluated small-delay bound with unit dichotomy constants."""
    gamma = -((2 * Q) ** (1 / n)) - 1
    a = 4 * 8 * lip * math.exp((omega_minus_alpha + eps) / abs(omega))
    r = a * math.log(2) - gamma + 2 * eps
    s = (2 * Q) ** (-1 / n)
    return min(math.log(s * r) / r, math.log(s * abs(gamma)) / abs(gamma))
