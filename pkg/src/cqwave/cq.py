"""Convolution quadrature weights by scaled FFT contour quadrature.

The weights of a Laplace-domain kernel ``K(s)`` are the Taylor coefficients
of ``K(delta(zeta) / dt)``.  They are approximated by the trapezoidal rule
on the circle ``|zeta| = lam``::

    omega_j ~= lam**-j / (N + 1) * sum_l K(s_l) * exp(2 pi i l j / (N + 1)),
    s_l = delta(lam * exp(-2 pi i l / (N + 1))) / dt,

which is one inverse FFT of length ``N + 1``.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .genfun import GeneratingFunction

__all__ = [
    "ContourParams",
    "WeightSequence",
    "HerglotzTestParams",
    "ContourResidueWarning",
    "contour_frequencies",
    "scalar_weights",
    "block_weights",
    "apply_history",
    "discrete_derivative",
    "convolve",
]

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps / 2.0  # unit roundoff


class ContourResidueWarning(RuntimeWarning):
    """Imaginary residue of the inverse FFT exceeds the contour-error budget."""


def default_lambda(N: int) -> float:
    return EPS ** (1.0 / (2 * N + 1))


@dataclass(frozen=True)
class ContourParams:
    """Step count ``N``, time step ``dt`` and contour radius ``lam``.

    ``lam`` defaults to ``eps**(1 / (2 N + 1))``, which balances the
    aliasing error ``lam**(N + 1)`` against roundoff amplified by
    ``lam**-N``.
    """

    N: int
    dt: float
    lam: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        lam = default_lambda(self.N) if self.lam is None else float(self.lam)
        if not 0.0 < lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if lam < default_lambda(self.N) * (1 - 1e-12):
            raise ValueError(f"lam={lam} below eps**(1/(2N+1))={default_lambda(self.N)}")
        object.__setattr__(self, "lam", lam)

    @property
    def contour_error(self) -> float:
        return self.lam ** (self.N + 1)


@dataclass(frozen=True)
class HerglotzTestParams:
    sigma: float
    dt: float

    def __post_init__(self):
        if not self.sigma > 0 or not self.dt > 0:
            raise ValueError("sigma and dt must be positive")

    @property
    def rho(self) -> float:
        return float(np.exp(-self.sigma * self.dt))


@dataclass
class WeightSequence:
    """Convolution weights ``omega_0 .. omega_N``.

    ``weights`` has shape ``(N + 1,)`` for scalar kernels and
    ``(N + 1, m, n)`` for block kernels.
    """

    weights: np.ndarray
    kernel_tag: str = ""

    def __len__(self):
        return self.weights.shape[0]

    def __getitem__(self, j):
        return self.weights[j]

    @property
    def N(self) -> int:
        return self.weights.shape[0] - 1

    @property
    def is_block(self) -> bool:
        return self.weights.ndim == 3


def _zeta_nodes(p: ContourParams) -> np.ndarray:
    ell = np.arange(p.N + 1)
    return p.lam * np.exp(-2j * np.pi * ell / (p.N + 1))


def contour_frequencies(g: GeneratingFunction, p: ContourParams) -> np.ndarray:
    """Laplace frequencies ``s_l = delta(lam * zeta_{N+1}**-l) / dt``, ``l = 0..N``."""
    return np.asarray(g(_zeta_nodes(p))) / p.dt


def _residue_check(imag, scale, p: ContourParams, tag: str):
    budget = 1e3 * p.contour_error * max(scale, np.finfo(float).tiny)
    worst = float(np.max(np.abs(imag))) if imag.size else 0.0
    if worst > budget:
        warnings.warn(
            f"CQ weights of {tag or 'kernel'}: imaginary residue {worst:.3e} exceeds {budget:.3e}",
            ContourResidueWarning,
            stacklevel=3,
        )


def scalar_weights(
    K: Callable[[np.ndarray], np.ndarray],
    g: GeneratingFunction,
    p: ContourParams,
    tag: str = "",
) -> WeightSequence:
    """CQ weights of a scalar kernel ``K``.

    ``K`` is called once on the array of all contour frequencies; kernels
    that only accept scalars are evaluated element by element.

    Raises
    ------
    FloatingPointError
        If ``K`` is not finite at some contour frequency.
    """
    s = contour_frequencies(g, p)
    try:
        vals = np.asarray(K(s), dtype=complex)
        if vals.shape != s.shape:
            vals = np.broadcast_to(vals, s.shape).astype(complex)
    except TypeError:
        vals = np.array([complex(K(si)) for si in s])
    if not np.all(np.isfinite(vals)):
        bad = s[~np.isfinite(vals)][0]
        raise FloatingPointError(f"kernel not finite at s = {bad}")
    raw = np.fft.ifft(vals) * p.lam ** -np.arange(p.N + 1)
    _residue_check(raw.imag, float(np.max(np.abs(vals))), p, tag)
    return WeightSequence(raw.real.copy(), tag)


def block_weights(
    assembler: Callable[[complex], np.ndarray],
    g: GeneratingFunction,
    p: ContourParams,
    parallel: bool | int = False,
    tag: str = "",
) -> WeightSequence:
    """CQ weights of a matrix-valued kernel.

    Only the frequencies ``l = 0 .. (N + 1) // 2`` are assembled: real
    kernels satisfy ``K(conj s) = conj K(s)`` and the contour nodes come in
    conjugate pairs, so the spectrum is Hermitian and a real inverse FFT
    recovers the weights.  The assembler is called exactly once per
    distinct frequency; with ``parallel`` those calls run in a thread pool.
    """
    s = contour_frequencies(g, p)
    n_half = (p.N + 1) // 2 + 1
    s_half = s[:n_half]

    if parallel:
        workers = None if parallel is True else int(parallel)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mats = list(pool.map(assembler, s_half))
    else:
        mats = [assembler(sl) for sl in s_half]

    shape = np.shape(mats[0])
    if len(shape) != 2:
        raise ValueError(f"assembler must return 2-D matrices, got shape {shape}")
    spectrum = np.empty((n_half,) + shape, dtype=complex)
    for ell, mat in enumerate(mats):
        if np.shape(mat) != shape:
            raise ValueError(f"assembler shape mismatch at l={ell}: {np.shape(mat)} != {shape}")
        spectrum[ell] = mat
    del mats
    if not np.all(np.isfinite(spectrum)):
        raise FloatingPointError("assembler returned non-finite entries")

    weights = np.fft.irfft(spectrum, n=p.N + 1, axis=0)
    del spectrum
    weights *= (p.lam ** -np.arange(p.N + 1))[:, None, None]
    logger.debug("block weights: N=%d, block %s", p.N, shape)
    return WeightSequence(weights, tag)


def apply_history(w: WeightSequence, x, n: int) -> np.ndarray:
    """History sum ``sum_{j=0}^{n-1} omega_{n-j} x_j``.

    Parameters
    ----------
    w : WeightSequence
    x : array_like
        Sequence ``x_0, x_1, ...`` stacked along the first axis.
    n : int
        Current index, ``0 <= n <= N``.
    """
    if n < 0 or n > w.N:
        raise IndexError(f"history index n={n} outside 0..{w.N}")
    x = np.asarray(x)
    if x.shape[0] < n:
        raise IndexError(f"history needs {n} past values, got {x.shape[0]}")
    if w.is_block:
        out_dim = w.weights.shape[1]
        if n == 0:
            return np.zeros(out_dim, dtype=np.result_type(w.weights, x))
        # omega_n, ..., omega_1 paired with x_0, ..., x_{n-1}
        return np.tensordot(w.weights[n:0:-1], x[:n], axes=([0, 2], [0, 1]))
    if n == 0:
        return np.zeros(x.shape[1:], dtype=np.result_type(w.weights, x))
    return np.tensordot(w.weights[n:0:-1], x[:n], axes=(0, 0))


def convolve(w: WeightSequence, x) -> np.ndarray:
    """Full discrete convolution ``y_n = sum_{j=0}^{n} omega_{n-j} x_j`` for ``n < len(x)``."""
    x = np.asarray(x)
    n = x.shape[0]
    if n > len(w):
        raise IndexError(f"sequence of length {n} exceeds {len(w)} weights")
    out = []
    for k in range(n):
        head = w.weights[0] @ x[k] if w.is_block else w.weights[0] * x[k]
        out.append(head + apply_history(w, x, k))
    return np.array(out)


def discrete_derivative(g: GeneratingFunction, dt: float, x, power: int) -> np.ndarray:
    """Apply ``(partial_t^dt)**power`` to a sequence, ``power`` in ``{-1, +1}``.

    With ``delta = P(zeta) / Q(zeta)`` the result ``y`` solves the recursion
    ``P * y = dt * Q * x`` (``power = -1``) or ``Q * y = P * x / dt``
    (``power = +1``), where ``*`` is the causal convolution of coefficient
    sequences.  Both are forward substitutions with ``P[0], Q[0] != 0``.
    """
    if power not in (-1, 1):
        raise ValueError("power must be -1 or +1")
    x = np.asarray(x, dtype=float)
    P, Q = g.zeta_coefficients()
    if power == 1:
        lhs, rhs = Q, P / dt
    else:
        lhs, rhs = P, Q * dt
    y = np.zeros_like(x)
    for n in range(x.shape[0]):
        acc = sum(rhs[k] * x[n - k] for k in range(min(len(rhs), n + 1)))
        acc = acc - sum(lhs[k] * y[n - k] for k in range(1, min(len(lhs), n + 1)))
        y[n] = acc / lhs[0]
    return y
