"""Vector-valued exponential sums ``theta -> sum_k v_k exp(mu_k theta)``.

Eigenfunctions, projections and all manifold coefficients are of this form,
which keeps derivatives, evaluation and the action of the delay kernel exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ExpSum"]


@dataclass(frozen=True, eq=False)
class ExpSum:
    """Finite exponential sum with vector coefficients.

    Attributes
    ----------
    exponents : ndarray, shape (k,)
        Complex exponents ``mu_k``.
    coeffs : ndarray, shape (k, n)
        Coefficient vectors ``v_k``.
    """

    exponents: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.exponents, dtype=complex))
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(len(e), -1) if len(e) else c.reshape(0, 0)
        if c.shape[0] != e.shape[0]:
            raise ValueError("one coefficient vector per exponent required")
        object.__setattr__(self, "exponents", e)
        object.__setattr__(self, "coeffs", c)

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "ExpSum":
        return cls(np.zeros(0, dtype=complex), np.zeros((0, n), dtype=complex))

    @classmethod
    def term(cls, mu: complex, v) -> "ExpSum":
        v = np.asarray(v, dtype=complex).ravel()
        return cls(np.array([mu], dtype=complex), v[None, :])

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def __len__(self) -> int:
        return self.exponents.shape[0]

    # -- evaluation ------------------------------------------------------------
    def __call__(self, theta) -> np.ndarray:
        """Values at ``theta``; shape ``theta.shape + (n,)``."""
        theta = np.asarray(theta, dtype=float)
        if len(self) == 0:
            return np.zeros(theta.shape + (self.n,), dtype=complex)
        ex = np.exp(np.multiply.outer(theta, self.exponents))
        return ex @ self.coeffs

    def derivative(self) -> "ExpSum":
        return ExpSum(self.exponents, self.coeffs * self.exponents[:, None])

    def stacked(self, lags) -> np.ndarray:
        """Concatenate the values at ``lags`` into one vector of length ``n * m``."""
        return self(np.asarray(lags, dtype=float)).reshape(-1)

    def apply_kernel(self, kernel) -> np.ndarray:
        """Exact ``L`` applied to the sum: ``sum_k E(mu_k) v_k``."""
        if len(self) == 0:
            return np.zeros(self.n, dtype=complex)
        E = kernel.transform(self.exponents)
        return np.einsum("kij,kj->i", E, self.coeffs)

    # -- algebra ---------------------------------------------------------------
    def __add__(self, other: "ExpSum") -> "ExpSum":
        if not isinstance(other, ExpSum):
            return NotImplemented
        return ExpSum(
            np.concatenate([self.exponents, other.exponents]),
            np.concatenate([self.coeffs, other.coeffs]),
        ).simplify()

    def __neg__(self) -> "ExpSum":
        return ExpSum(self.exponents, -self.coeffs)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def __mul__(self, scalar) -> "ExpSum":
        return ExpSum(self.exponents, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def conj(self) -> "ExpSum":
        return ExpSum(np.conj(self.exponents), np.conj(self.coeffs))

    def simplify(self, tol: float = 1e-13) -> "ExpSum":
        """Merge terms whose exponents agree to ``tol`` and drop zero terms."""
        if len(self) == 0:
            return self
        order = np.lexsort((self.exponents.imag, self.exponents.real))
        exps: list[complex] = []
        coefs: list[np.ndarray] = []
        for k in order:
            mu = self.exponents[k]
            if exps and abs(mu - exps[-1]) <= tol * max(1.0, abs(mu)):
                coefs[-1] = coefs[-1] + self.coeffs[k]
            else:
                exps.append(mu)
                coefs.append(self.coeffs[k].copy())
        keep = [i for i, c in enumerate(coefs) if np.any(c != 0)]
        if not keep:
            return ExpSum.zero(self.n)
        return ExpSum(np.array([exps[i] for i in keep]), np.array([coefs[i] for i in keep]))

    def max_abs(self, h: float, npts: int = 512) -> float:
        """Sup norm on ``[-h, 0]`` estimated on a uniform grid."""
        if len(self) == 0:
            return 0.0
        return float(np.abs(self(np.linspace(-h, 0.0, npts))).max())
