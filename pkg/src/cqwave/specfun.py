"""Bessel functions and quadrature rules used by the kernels and references.

The Bessel evaluations delegate to :mod:`scipy.special` (AMOS for complex
arguments, Cephes for real ones) behind thin wrappers that enforce the
domains the rest of the package relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, exp

import numpy as np
from scipy import special
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "RuleKind",
    "QuadratureRule",
    "bessel_K0",
    "bessel_K1",
    "bessel_I",
    "bessel_K",
    "bessel_Ip",
    "bessel_Kp",
    "bessel_J0",
    "bessel_J1",
    "gauss_legendre",
    "log_weighted_rule",
]

# Beyond this |Re z| the K functions are below 1e-304; report zero instead
# of relying on the backend's underflow handling.
UNDERFLOW_RE = 700.0


def _right_half_plane(z, name):
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise ValueError(f"{name} requires Re z > 0")
    return z


def _kv(order, z):
    out = np.zeros(z.shape, dtype=complex)
    ok = z.real <= UNDERFLOW_RE
    out[ok] = special.kv(order, z[ok])
    return out


def _scalar_if(out, z):
    return out if np.ndim(z) else out[()]


def bessel_K0(z):
    """Modified Bessel function ``K_0`` for ``Re z > 0``.

    Returns exactly zero where ``Re z > 700`` (underflow).

    Raises
    ------
    ValueError
        If some argument has ``Re z <= 0``.
    """
    zz = _right_half_plane(z, "K0")
    return _scalar_if(_kv(0, zz), z)


def bessel_K1(z):
    """Modified Bessel function ``K_1`` for ``Re z > 0``."""
    zz = _right_half_plane(z, "K1")
    return _scalar_if(_kv(1, zz), z)


def bessel_I(m: int, z):
    """Modified Bessel function ``I_m`` of integer order ``m >= 0``.

    Raises
    ------
    OverflowError
        If the result is not finite.
    """
    if m < 0:
        raise ValueError("order must be non-negative")
    zz = np.asarray(z, dtype=complex)
    out = special.iv(m, zz)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"I_{m} overflows")
    return _scalar_if(out, z)


def bessel_K(m: int, z):
    """Modified Bessel function ``K_m`` of integer order, ``Re z > 0``."""
    if m < 0:
        raise ValueError("order must be non-negative")
    zz = _right_half_plane(z, f"K_{m}")
    out = _kv(m, zz)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"K_{m} overflows")
    return _scalar_if(out, z)


def bessel_Ip(m: int, z):
    """Derivative ``I_m'(z)``."""
    zz = np.asarray(z, dtype=complex)
    out = special.ivp(m, zz)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"I_{m}' overflows")
    return _scalar_if(out, z)


def bessel_Kp(m: int, z):
    """Derivative ``K_m'(z)``, ``Re z > 0``."""
    zz = _right_half_plane(z, f"K_{m}'")
    out = special.kvp(m, zz)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"K_{m}' overflows")
    return _scalar_if(out, z)


def bessel_J0(x):
    """Bessel function ``J_0`` of real argument."""
    return special.j0(x)


def bessel_J1(x):
    """Bessel function ``J_1`` of real argument."""
    return special.j1(x)


class RuleKind(str, enum.Enum):
    GAUSS_LEGENDRE = "gauss_legendre"
    LOG_WEIGHTED = "log_weighted"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on a reference interval.

    Gauss-Legendre rules live on ``(-1, 1)``; log-weighted rules on
    ``(0, 1)`` with weight function ``-log x``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: RuleKind

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def degree(self) -> int:
        """Highest polynomial degree integrated exactly."""
        return 2 * self.n - 1

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of a Gauss-Legendre rule affinely mapped to ``(a, b)``."""
        if self.kind is not RuleKind.GAUSS_LEGENDRE:
            raise ValueError("only Gauss-Legendre rules can be mapped affinely")
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """``n``-point Gauss-Legendre rule on ``(-1, 1)``, exact to degree ``2n - 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x, w = special.roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w, RuleKind.GAUSS_LEGENDRE)


def _log_modified_moments(count: int) -> np.ndarray:
    """Moments of ``-log x`` against monic shifted Legendre polynomials on (0, 1)."""
    mom = np.empty(count)
    mom[0] = 1.0
    for k in range(1, count):
        # int_0^1 -log(x) P*_k(x) dx = (-1)^k / (k (k + 1)); the monic
        # polynomial is P*_k divided by its leading coefficient (2k)! / (k!)^2
        lead = exp(lgamma(2 * k + 1) - 2 * lgamma(k + 1))
        mom[k] = (-1) ** k / (k * (k + 1)) / lead
    return mom


@lru_cache(maxsize=None)
def log_weighted_rule(n: int) -> QuadratureRule:
    """Gauss rule for ``int_0^1 -log(x) p(x) dx``.

    The recurrence coefficients of the orthogonal polynomials for the weight
    ``-log x`` are obtained by the modified Chebyshev algorithm from
    shifted-Legendre modified moments; nodes and weights then follow from
    the Jacobi matrix.  Exact for polynomials of degree ``2n - 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 2 * n
    mom = _log_modified_moments(m)
    # monic shifted Legendre recurrence p_{k+1} = (x - a_k) p_k - b_k p_{k-1}
    a = np.full(m, 0.5)
    kk = np.arange(m, dtype=float)
    b = np.where(kk > 0, kk**2 / (4.0 * (4.0 * kk**2 - 1.0)), 0.0)

    alpha = np.zeros(n)
    beta = np.zeros(n)
    sig_prev = np.zeros(m)
    sig = mom.copy()
    alpha[0] = a[0] + mom[1] / mom[0]
    beta[0] = mom[0]
    for k in range(1, n):
        sig_new = np.zeros(m)
        for l in range(k, m - k):
            sig_new[l] = (
                sig[l + 1]
                - (alpha[k - 1] - a[l]) * sig[l]
                - beta[k - 1] * sig_prev[l]
                + b[l] * sig[l - 1]
            )
        alpha[k] = a[k] + sig_new[k + 1] / sig_new[k] - sig[k] / sig[k - 1]
        beta[k] = sig_new[k] / sig[k - 1]
        sig_prev, sig = sig, sig_new

    if np.any(beta[1:] <= 0):
        raise ArithmeticError("modified Chebyshev algorithm lost positivity")
    nodes, vecs = eigh_tridiagonal(alpha, np.sqrt(beta[1:]))
    weights = beta[0] * vecs[0] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, RuleKind.LOG_WEIGHTED)
