"""Truncated multivariate polynomials stored as ``{exponent tuple: coefficient}``.

Coefficients may be scalars, numpy arrays or any object supporting ``+`` and
multiplication by a scalar.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

__all__ = [
    "monomials",
    "degree",
    "padd",
    "pscale",
    "pmul",
    "ppow",
    "truncate",
    "pderiv",
    "variable",
    "evaluate",
]


def monomials(nvars: int, deg: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree ``deg`` in lexicographic order (descending)."""
    out = [
        m
        for m in itertools.product(range(deg, -1, -1), repeat=nvars)
        if sum(m) == deg
    ]
    return out


def degree(m) -> int:
    return int(sum(m))


def _addm(a, b):
    return tuple(x + y for x, y in zip(a, b))


def padd(*polys: dict) -> dict:
    out: dict = {}
    for p in polys:
        for m, c in p.items():
            out[m] = out[m] + c if m in out else c
    return out


def pscale(p: dict, s) -> dict:
    return {m: c * s for m, c in p.items()}


def truncate(p: dict, maxdeg: int, mindeg: int = 0) -> dict:
    return {m: c for m, c in p.items() if mindeg <= degree(m) <= maxdeg}


def pmul(a: dict, b: dict, maxdeg: int, mul: Callable = None) -> dict:
    """Product truncated at ``maxdeg``; ``mul(ca, cb)`` combines coefficients."""
    mul = mul or (lambda x, y: x * y)
    out: dict = {}
    for ma, ca in a.items():
        da = degree(ma)
        for mb, cb in b.items():
            if da + degree(mb) > maxdeg:
                continue
            m = _addm(ma, mb)
            v = mul(ca, cb)
            out[m] = out[m] + v if m in out else v
    return out


def ppow(p: dict, k: int, maxdeg: int, nvars: int) -> dict:
    out = {(0,) * nvars: 1.0 + 0j}
    for _ in range(k):
        out = pmul(out, p, maxdeg)
    return out


def pderiv(p: dict, i: int) -> dict:
    """Partial derivative with respect to variable ``i``."""
    out: dict = {}
    for m, c in p.items():
        if m[i] == 0:
            continue
        mm = list(m)
        mm[i] -= 1
        out[tuple(mm)] = c * m[i]
    return out


def variable(i: int, nvars: int) -> dict:
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): 1.0 + 0j}


def evaluate(p: dict, z) -> complex:
    z = np.asarray(z, dtype=complex)
    total = 0
    for m, c in p.items():
        total = total + c * np.prod(z ** np.array(m))
    return total
