"""Reference solutions, incident fields and the energy error measure.

The disk reference is the free-space solution of ``u_tt = Laplace u`` with
``u(0) = exp(-2 |x|^2)`` and ``u_t(0) = 0``, written as a Hankel integral

``u(r, t) = 1/4 int_0^inf exp(-k^2 / 8) J0(k r) k cos(k t) dk``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sps

from .specfun import bessel_J0, bessel_J1, gauss_legendre

__all__ = [
    "K_MAX",
    "exact_disk_solution",
    "exact_disk_gradient",
    "DiskReference",
    "initial_disk_data",
    "GaussianPulse",
    "FieldKind",
    "IncidentField",
    "incident_traces",
    "lshape_sources",
    "energy_error",
    "energy_error_series",
    "SourceInsideDomainError",
]

K_MAX = 20.0  # exp(-K_MAX**2 / 8) < 1e-21
_GAUSS_PER_PANEL = 10


@lru_cache(maxsize=64)
def _k_grid(extent: float):
    """Composite Gauss nodes on ``(0, K_MAX)`` with panels no wider than ``pi / (2 (extent + 1))``."""
    width = np.pi / (2.0 * (extent + 1.0))
    n_panels = int(np.ceil(K_MAX / width))
    edges = np.linspace(0.0, K_MAX, n_panels + 1)
    g = gauss_legendre(_GAUSS_PER_PANEL)
    ks, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = g.mapped(a, b)
        ks.append(x)
        ws.append(w)
    k = np.concatenate(ks)
    w = np.concatenate(ws) * np.exp(-(k**2) / 8.0) * k / 4.0
    k.setflags(write=False)
    w.setflags(write=False)
    return k, w


def exact_disk_solution(r, t: float):
    """Disk reference ``u(r, t)``; vectorized in ``r``."""
    r = np.asarray(r, dtype=float)
    k, w = _k_grid(float(np.max(r, initial=0.0) + abs(t)))
    vals = (bessel_J0(np.multiply.outer(r, k)) * (w * np.cos(k * t))).sum(axis=-1)
    return vals


def exact_disk_gradient(r, t: float):
    """Radial derivative ``du/dr``; zero at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    k, w = _k_grid(float(np.max(r, initial=0.0) + abs(t)))
    return -(bessel_J1(np.multiply.outer(r, k)) * (w * k * np.cos(k * t))).sum(axis=-1)


class DiskReference:
    """Disk reference evaluated repeatedly at a fixed set of radii.

    The Bessel matrix ``J0(k r_i)`` over the distinct radii is built once;
    each time level is then one matrix-vector product.
    """

    def __init__(self, points, t_max: float):
        pts = np.asarray(points, dtype=float)
        r = np.hypot(pts[:, 0], pts[:, 1])
        self.radii, self._inverse = np.unique(np.round(r, 13), return_inverse=True)
        self.k, self.w = _k_grid(float(self.radii.max(initial=0.0) + t_max))
        self.t_max = float(t_max)
        self._J0 = bessel_J0(np.multiply.outer(self.radii, self.k))

    def __call__(self, t: float) -> np.ndarray:
        if t > self.t_max * (1 + 1e-12) + 1e-12:
            raise ValueError(f"t={t} beyond t_max={self.t_max}")
        return (self._J0 @ (self.w * np.cos(self.k * t)))[self._inverse]


def initial_disk_data():
    """``u0 = exp(-2|x|^2)`` with gradient, Laplacian and gradient of the Laplacian."""

    def u0(p):
        return np.exp(-2.0 * np.einsum("ij,ij->i", p, p))

    def grad_u0(p):
        return -4.0 * p * u0(p)[:, None]

    def lap_u0(p):
        r2 = np.einsum("ij,ij->i", p, p)
        return (16.0 * r2 - 8.0) * np.exp(-2.0 * r2)

    def grad_lap_u0(p):
        r2 = np.einsum("ij,ij->i", p, p)
        return p * ((64.0 - 64.0 * r2) * np.exp(-2.0 * r2))[:, None]

    return u0, grad_u0, lap_u0, grad_lap_u0


# -- incident fields -------------------------------------------------------


class SourceInsideDomainError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianPulse:
    """``g(t) = exp(-a (t - tc)^2)`` for ``t > 0`` and zero before.

    ``tc`` defaults to the smallest centre with ``g(0) <= 1e-14``.
    """

    a: float = 40.0
    tc: Optional[float] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        tc = np.sqrt(np.log(1e14) / self.a) if self.tc is None else float(self.tc)
        if np.exp(-self.a * tc**2) > 1e-14 * (1 + 1e-9):
            raise ValueError("pulse centre too close to t = 0")
        object.__setattr__(self, "tc", float(tc))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, np.exp(-self.a * (t - self.tc) ** 2), 0.0)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, -2.0 * self.a * (t - self.tc) * np.exp(-self.a * (t - self.tc) ** 2), 0.0)


class FieldKind(str, enum.Enum):
    NONE = "none"
    PLANE_WAVE = "plane_wave"
    POINT_SOURCES = "point_sources"


@dataclass(frozen=True)
class IncidentField:
    """Incident wave in free space (speed 1).

    ``PLANE_WAVE``: ``u = g(t - t0 - d . x)``.
    ``POINT_SOURCES``: sum over sources of the retarded potential of
    ``g(t - t_i)`` fired at ``x_i``.
    """

    kind: FieldKind = FieldKind.NONE
    pulse: GaussianPulse = field(default_factory=GaussianPulse)
    direction: tuple = (1.0, 0.0)
    t0: float = 0.0
    sources: Optional[np.ndarray] = None
    delays: Optional[np.ndarray] = None
    n_sigma_panels: int = 48
    n_sigma_gauss: int = 8

    @classmethod
    def none(cls) -> "IncidentField":
        return cls(FieldKind.NONE)

    @classmethod
    def plane_wave(cls, direction, t0, pulse: GaussianPulse | None = None):
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(FieldKind.PLANE_WAVE, pulse or GaussianPulse(), tuple(d), float(t0))

    @classmethod
    def point_sources(cls, sources, delays, pulse: GaussianPulse | None = None):
        src = np.atleast_2d(np.asarray(sources, dtype=float))
        dl = np.broadcast_to(np.asarray(delays, dtype=float), (len(src),)).copy()
        return cls(FieldKind.POINT_SOURCES, pulse or GaussianPulse(), sources=src, delays=dl)

    def check_outside(self, boundary_points) -> None:
        """Reject point sources inside or on the closed polygon ``boundary_points``.

        Raises
        ------
        SourceInsideDomainError
        """
        if self.kind is not FieldKind.POINT_SOURCES:
            return
        bad = _points_in_polygon(self.sources, np.asarray(boundary_points, dtype=float))
        if np.any(bad):
            raise SourceInsideDomainError(f"source {int(np.argmax(bad))} lies in the closed domain")

    def _sigma_rule(self, upper):
        """Composite Gauss nodes on ``(0, upper)`` for each entry of ``upper``."""
        g = gauss_legendre(self.n_sigma_gauss)
        m = self.n_sigma_panels
        base = (np.arange(m)[:, None] + 0.5 * (g.nodes[None, :] + 1.0)).ravel() / m
        wts = np.tile(0.5 * g.weights, m) / m
        return upper[..., None] * base, upper[..., None] * wts

    def evaluate(self, x, t: float, normals=None):
        """Field value, time derivative and (if ``normals``) normal derivative at points ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = len(x)
        if self.kind is FieldKind.NONE:
            z = np.zeros(n)
            return z, z.copy(), (z.copy() if normals is not None else None)
        if self.kind is FieldKind.PLANE_WAVE:
            d = np.asarray(self.direction)
            arg = t - self.t0 - x @ d
            val = self.pulse(arg)
            dt = self.pulse.d1(arg)
            dn = None if normals is None else -(np.asarray(normals) @ d) * dt
            return val, dt, dn
        val = np.zeros(n)
        dt = np.zeros(n)
        dn = np.zeros(n) if normals is not None else None
        for xi, ti in zip(self.sources, self.delays):
            diff = x - xi
            r = np.hypot(diff[:, 0], diff[:, 1])
            span = np.maximum(t - r - ti, 0.0)
            sig, w = self._sigma_rule(np.sqrt(span))
            arg = t - r[:, None] - sig**2 - ti
            q = 2.0 * r[:, None] + sig**2
            g = self.pulse(arg)
            g1 = self.pulse.d1(arg)
            val += (w * g / np.sqrt(q)).sum(axis=1) / np.pi
            dt += (w * g1 / np.sqrt(q)).sum(axis=1) / np.pi
            if normals is not None:
                dr = (w * (-g1 / np.sqrt(q) - g / q**1.5)).sum(axis=1) / np.pi
                rhat = diff / np.maximum(r, 1e-300)[:, None]
                dn += dr * np.einsum("ij,ij->i", rhat, np.asarray(normals))
        return val, dt, dn


def _points_in_polygon(points, poly) -> np.ndarray:
    """Even-odd rule; points on an edge count as inside."""
    pts = np.atleast_2d(points)
    inside = np.zeros(len(pts), dtype=bool)
    on_edge = np.zeros(len(pts), dtype=bool)
    n = len(poly)
    for k in range(n):
        a = poly[k]
        b = poly[(k + 1) % n]
        ab = b - a
        ap = pts - a
        cross = ab[0] * ap[:, 1] - ab[1] * ap[:, 0]
        dot = ap @ ab
        on_edge |= (np.abs(cross) <= 1e-12 * np.linalg.norm(ab)) & (dot >= 0) & (dot <= ab @ ab)
        cond = (a[1] > pts[:, 1]) != (b[1] > pts[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[0] + (pts[:, 1] - a[1]) * ab[0] / ab[1]
        inside ^= cond & (pts[:, 0] < xint)
    return inside | on_edge


def incident_traces(field_: IncidentField, points, normals, t: float):
    """``(beta0, beta1, d/dt beta0)`` at boundary points."""
    val, dt, dn = field_.evaluate(points, t, normals)
    return val, dn, dt


def lshape_sources(
    focus=(-1.5, 2.0), radius: float = 2.5, n: int = 9, angles=(60.0, 120.0), t_focus: float = 4.0
):
    """Sources on an arc around ``focus`` with delays that align arrivals there.

    The default arc lies within 30 degrees of the vertical, so rays into the
    speed-2 box above the focus stay below the critical angle.
    """
    ang = np.radians(np.linspace(angles[0], angles[1], n))
    f = np.asarray(focus, dtype=float)
    src = f + radius * np.column_stack([np.cos(ang), np.sin(ang)])
    delays = t_focus - np.linalg.norm(src - f, axis=1)
    return src, delays


# -- error measure -----------------------------------------------------------


def _gradient_form(ops) -> sps.spmatrix:
    """Stiffness with identity diffusion (the error's gradient seminorm)."""
    if ops.coeffs.kappa is None:
        return ops.K
    from .fem import CoefficientField, assemble_interior

    return assemble_interior(ops.mesh, CoefficientField(ops.coeffs.c)).K


def energy_error_series(u_traj: Sequence[np.ndarray], ref_traj: Sequence[np.ndarray], ops, dt: float):
    """Per-step energy error for ``n = 1 .. N``.

    ``|d_t (u_n - I u(t_n))| + |grad of the midpoint average of the same difference|``
    in ``L2``, with ``u_traj[n]`` and ``ref_traj[n]`` nodal vectors.
    """
    u = np.asarray(u_traj, dtype=float)
    ref = np.asarray(ref_traj, dtype=float)
    if u.shape != ref.shape:
        raise ValueError("trajectory shapes differ")
    e = u - ref
    de = (e[1:] - e[:-1]) / dt
    mid = 0.5 * (e[1:] + e[:-1])
    Kg = _gradient_form(ops)
    l2 = np.sqrt(np.maximum(np.einsum("ni,ni->n", de, (ops.M1 @ de.T).T), 0.0))
    h1 = np.sqrt(np.maximum(np.einsum("ni,ni->n", mid, (Kg @ mid.T).T), 0.0))
    return l2 + h1


def energy_error(u_traj, ref_traj, ops, dt: float) -> float:
    """Maximum over time levels of :func:`energy_error_series`."""
    series = energy_error_series(u_traj, ref_traj, ops, dt)
    return float(series.max()) if series.size else 0.0
