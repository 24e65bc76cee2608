"""Generating functions of A-stable second-order multistep methods.

A generating function delta(zeta) is stored as a rational function of
``w = 1 - zeta``::

    BDF2:  w + w**2 / 2
    TR:    2 w / (2 - w)          (= 2 (1 - zeta) / (1 + zeta))
    TTR:   w + w**2 / 2 + sum_{j=2}^{J} 2**-j c_j w**(j + 1)

Writing everything in ``w`` keeps evaluation accurate near ``zeta = 1``,
where the consistency condition ``delta(1) = 0`` forces heavy cancellation
in the monomial basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "Kind",
    "GeneratingFunction",
    "ExpansionReport",
    "TTRDesign",
    "PoleError",
    "InfeasibleDesignError",
    "PUBLISHED_TTR_COEFFS",
    "bdf2",
    "trapezoidal",
    "ttr",
    "from_name",
    "eval_delta",
    "consistency_expansion",
    "check_a_stability",
    "design_ttr",
    "stability_region_boundary",
]

#: Published J = 4 truncated-trapezoidal coefficients c_2, c_3, c_4.
PUBLISHED_TTR_COEFFS = (0.893817850529318, 0.684154908023834, 0.629642997466429)

A_STABILITY_TOL = 1e-15


class PoleError(ZeroDivisionError):
    """Raised when a rational generating function is evaluated at its pole."""


class InfeasibleDesignError(RuntimeError):
    """Raised when an optimized TTR fails the sampled A-stability check."""


class Kind(str, enum.Enum):
    BDF2 = "bdf2"
    TR = "tr"
    TTR = "ttr"


@dataclass(frozen=True)
class GeneratingFunction:
    """Symbol ``delta(zeta)`` of a second-order linear multistep method.

    Parameters
    ----------
    kind : Kind
        Method family.
    ttr_coeffs : tuple of float
        ``c_2, ..., c_J`` for ``Kind.TTR``; must be empty otherwise.
    order : int
        Classical order (2 for all built-ins).
    """

    kind: Kind
    ttr_coeffs: tuple[float, ...] = ()
    order: int = 2
    _num: np.ndarray = field(init=False, repr=False, compare=False)
    _den: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        coeffs = tuple(float(c) for c in self.ttr_coeffs)
        object.__setattr__(self, "ttr_coeffs", coeffs)
        if kind is not Kind.TTR and coeffs:
            raise ValueError(f"{kind.value} takes no TTR coefficients")
        if kind is Kind.TTR:
            if not coeffs:
                raise ValueError("TTR needs at least c_2")
            if any(not (0.0 <= c <= 1.0) for c in coeffs):
                raise ValueError(f"TTR coefficients must lie in [0, 1], got {coeffs}")

        # numerator / denominator coefficients in powers of w, lowest first
        if kind is Kind.TR:
            num = np.array([0.0, 2.0])
            den = np.array([2.0, -1.0])
        else:
            num = np.zeros(len(coeffs) + 3)
            num[1], num[2] = 1.0, 0.5
            for j, c in enumerate(coeffs, start=2):
                num[j + 1] = 2.0 ** (-j) * c
            den = np.array([1.0])
        object.__setattr__(self, "_num", num)
        object.__setattr__(self, "_den", den)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def is_entire(self) -> bool:
        """True for polynomial symbols (BDF2, TTR)."""
        return self.kind is not Kind.TR

    @property
    def J(self) -> int:
        return len(self.ttr_coeffs) + 1 if self.kind is Kind.TTR else 0

    def w_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Numerator and denominator coefficients in powers of ``w = 1 - zeta``."""
        return self._num.copy(), self._den.copy()

    def zeta_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Numerator and denominator coefficients in powers of ``zeta``."""
        one_minus = np.polynomial.Polynomial([1.0, -1.0])
        num = np.polynomial.Polynomial(self._num)(one_minus).coef
        den = np.polynomial.Polynomial(self._den)(one_minus).coef
        return num, den

    def _eval_w(self, w):
        num = np.polynomial.polynomial.polyval(w, self._num)
        if self.kind is Kind.TTR or self.kind is Kind.BDF2:
            return num
        den = np.polynomial.polynomial.polyval(w, self._den)
        if np.any(den == 0):
            raise PoleError("generating function evaluated at its pole zeta = -1")
        return num / den

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = self._eval_w(1.0 - zeta)
        return out if out.ndim else complex(out)

    def of_exp(self, z):
        """Evaluate ``delta(exp(-z))`` without forming ``exp(-z)`` naively."""
        z = np.asarray(z, dtype=complex)
        if self.kind is Kind.TR:
            out = 2.0 * np.tanh(z / 2.0)
        else:
            a, b = z.real, z.imag
            ea = np.exp(-a)
            w = (-np.expm1(-a) + 2.0 * ea * np.sin(b / 2.0) ** 2) + 1j * ea * np.sin(b)
            out = self._eval_w(w)
        return out if out.ndim else complex(out)


@dataclass(frozen=True)
class ExpansionReport:
    """Taylor coefficients of ``delta(exp(-z)) = e1 z + e2 z**2 + e3 z**3 + e4 z**4 + ...``."""

    e1: float
    e2: float
    e3: float
    e4: float

    @property
    def error_constant(self) -> float:
        return abs(self.e3)


@dataclass(frozen=True)
class TTRDesign:
    delta: GeneratingFunction
    report: ExpansionReport
    min_re: float
    feasible: bool


def bdf2() -> GeneratingFunction:
    return GeneratingFunction(Kind.BDF2)


def trapezoidal() -> GeneratingFunction:
    return GeneratingFunction(Kind.TR)


def ttr(coeffs=PUBLISHED_TTR_COEFFS) -> GeneratingFunction:
    return GeneratingFunction(Kind.TTR, tuple(coeffs))


def from_name(name: str) -> GeneratingFunction:
    """Look up a built-in method by name (``bdf2``, ``tr`` or ``ttr``)."""
    key = name.strip().lower()
    if key == "bdf2":
        return bdf2()
    if key in ("tr", "trapezoidal"):
        return trapezoidal()
    if key == "ttr":
        return ttr()
    raise ValueError(f"unknown method {name!r}; expected bdf2, tr or ttr")


def eval_delta(g: GeneratingFunction, zeta) -> complex:
    return g(zeta)


def _series_mul(a, b, n):
    return np.convolve(a, b)[:n]


def consistency_expansion(g: GeneratingFunction, terms: int = 6) -> ExpansionReport:
    """Expand ``delta(exp(-z))`` about ``z = 0`` by power-series composition."""
    # w(z) = 1 - exp(-z) = z - z^2/2 + z^3/6 - ...
    w = np.array([0.0] + [-((-1.0) ** k) / math.factorial(k) for k in range(1, terms)])
    num, den = g.w_coefficients()

    def compose(coeffs):
        out = np.zeros(terms)
        power = np.zeros(terms)
        power[0] = 1.0
        for c in coeffs:
            out += c * power
            power = _series_mul(power, w, terms)
        return out

    p, q = compose(num), compose(den)
    # series division p / q, q[0] != 0
    r = np.zeros(terms)
    for k in range(terms):
        r[k] = (p[k] - np.dot(r[:k], q[k:0:-1])) / q[0]
    return ExpansionReport(e1=float(r[1]), e2=float(r[2]), e3=float(r[3]), e4=float(r[4]))


def _unit_circle_samples(n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    return np.arange(n_samples) * (np.pi / (n_samples - 1))


def _re_delta_circle(g: GeneratingFunction, x: np.ndarray) -> np.ndarray:
    if g.kind is Kind.TR:
        x = x[np.abs(x - np.pi) > 0]
    return np.real(g.of_exp(1j * x))


def check_a_stability(g: GeneratingFunction, n_samples: int = 50_000) -> float:
    """Minimum of ``Re delta(exp(-i x))`` over ``n_samples`` points of ``[0, pi]``.

    The trapezoidal pole at ``x = pi`` is skipped.
    """
    return float(_re_delta_circle(g, _unit_circle_samples(n_samples)).min())


def design_ttr(J: int = 4, n_samples: int = 50_000, fixed: dict[int, float] | None = None) -> TTRDesign:
    """Optimize truncated-trapezoidal coefficients for the smallest error constant.

    Both ``e3 = -1/3 + c_2/4`` and ``Re delta(exp(-i x))`` are affine in the
    coefficients, so the constrained problem is a linear program over the
    sampled A-stability constraints.  Each constraint row is divided by the
    BDF2 real part ``(1 - cos x)**2`` so that rows near ``x = 0`` are not
    swamped by the solver tolerance.  The LP optimum is then pulled toward
    BDF2 by the smallest factor that restores feasibility exactly.

    Parameters
    ----------
    J : int
        Highest retained power is ``(1 - zeta)**(J + 1)``; ``J >= 2``.
    n_samples : int
        Number of equally spaced A-stability samples on ``[0, pi]``.
    fixed : dict, optional
        ``{j: c_j}`` coefficients held at the given values.

    Raises
    ------
    InfeasibleDesignError
        If free coefficients were optimized and the result is not A-stable.
    """
    if J < 2:
        raise ValueError("J must be >= 2")
    fixed = dict(fixed or {})
    for j, c in fixed.items():
        if not 2 <= j <= J:
            raise ValueError(f"fixed index {j} outside 2..{J}")
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"fixed c_{j}={c} outside [0, 1]")
    free = [j for j in range(2, J + 1) if j not in fixed]

    x = _unit_circle_samples(n_samples)[1:]
    w = 2.0 * np.sin(x / 2.0) ** 2 + 1j * np.sin(x)
    base = (1.0 - np.cos(x)) ** 2  # Re of the BDF2 part, > 0 on (0, pi]
    cols = {j: (2.0 ** (-j) * w ** (j + 1)).real / base for j in range(2, J + 1)}
    offset = np.ones_like(x) + sum(c * cols[j] for j, c in fixed.items())

    coeffs = {j: 0.0 for j in free}
    coeffs.update(fixed)
    if free:
        A = np.column_stack([cols[j] for j in free])
        objective = np.array([-1.0 if j == 2 else 0.0 for j in free])
        res = linprog(objective, A_ub=-A, b_ub=offset, bounds=[(0.0, 1.0)] * len(free), method="highs")
        if res.status != 0:
            raise InfeasibleDesignError(f"linear program failed: {res.message}")
        free_vals = np.clip(res.x, 0.0, 1.0)
        # contract toward the fixed part until every normalized row is >= 0
        g_free = A @ free_vals
        bad = offset + g_free < 0
        theta = 1.0
        if np.any(bad):
            theta = float(np.min(offset[bad] / -g_free[bad])) * (1.0 - 1e-12)
        for j, v in zip(free, free_vals):
            coeffs[j] = float(theta * v)

    delta = ttr(tuple(coeffs[j] for j in range(2, J + 1)))
    min_re = check_a_stability(delta, n_samples)
    feasible = min_re >= -A_STABILITY_TOL
    if free and not feasible:
        raise InfeasibleDesignError(f"optimized TTR is not A-stable (min Re = {min_re:.3e})")
    return TTRDesign(delta=delta, report=consistency_expansion(delta), min_re=min_re, feasible=feasible)


def stability_region_boundary(g: GeneratingFunction, n: int = 2048) -> np.ndarray:
    """Points ``delta(exp(i theta_k))`` for ``theta_k = 2 pi k / n``.

    For the trapezoidal rule the point ``theta = pi`` (the pole) is omitted.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    k = np.arange(n)
    if g.kind is Kind.TR and n % 2 == 0:
        k = k[k != n // 2]
    theta = 2.0 * np.pi * k / n
    return np.asarray(g.of_exp(-1j * theta))
