"""Leapfrog interior coupled to a convolution-quadrature boundary solve.

At each step ``n = 1 .. N-1`` the unknowns are ``u_{n+1}`` (interior,
P1), ``phi_n`` (panels, p0) and ``psi_n`` (boundary vertices, p1):

``M (u_{n+1} - 2 u_n + u_{n-1}) / dt^2 + K u_n + C^T phi_n = F_n + b1_n``

``-C (u_{n+1} - u_{n-1}) / (2 dt) + 1/2 I psi_n + [omega_0 x_n + h_n]_1 = -d0_n``

``-1/2 I^T phi_n + [omega_0 x_n + h_n]_2 = 0``

with ``x_n = (phi_n, psi_n)`` and history ``h_n = sum_{j<n} omega_{n-j} x_j``.
Eliminating ``u_{n+1}`` leaves a dense system in ``x_n`` whose matrix is
constant in ``n`` and is factorized once.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
from scipy.sparse.linalg import spsolve

from .bem import BoundarySpaces, CalderonAssembler, QuadratureOptions
from .cq import ContourParams, WeightSequence, apply_history, block_weights, discrete_derivative
from .fem import (
    CoefficientField,
    InteriorOperators,
    assemble_interior,
    cfl_timestep,
    discrete_energy,
    elliptic_projection,
    l2_projection,
    load_vector,
)
from .genfun import GeneratingFunction, Kind
from .mesh import TriangleMesh
from .reference import IncidentField
from .specfun import gauss_legendre

__all__ = [
    "ProblemData",
    "CoupledSystem",
    "TimeState",
    "Trajectory",
    "CFLWarning",
    "NumericalFailure",
    "initialize",
    "step",
    "run",
    "monolithic_step",
]

logger = logging.getLogger(__name__)


class CFLWarning(RuntimeWarning):
    pass


class NumericalFailure(ArithmeticError):
    """Non-finite state or failed factorization."""


PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class ProblemData:
    """Sources, incident field and initial data.

    Point functions take ``(n, 2)`` arrays.  ``lap_u0`` is
    ``div(kappa grad u0)``; the ``grad_*`` entries are used by the
    elliptic projection and may be ``None`` (``grad_accel0`` missing falls
    back to an L2 projection of the initial acceleration).
    """

    u0: Optional[PointFn] = None
    grad_u0: Optional[PointFn] = None
    v0: Optional[PointFn] = None
    grad_v0: Optional[PointFn] = None
    lap_u0: Optional[PointFn] = None
    grad_lap_u0: Optional[PointFn] = None
    f: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    incident: IncidentField = field(default_factory=IncidentField.none)
    analytic_dt_beta0: bool = True

    @property
    def has_boundary_data(self) -> bool:
        return self.incident.kind.value != "none"


@dataclass
class CoupledSystem:
    """Everything that stays fixed during time stepping."""

    ops: InteriorOperators
    spaces: BoundarySpaces
    genfun: GeneratingFunction
    dt: float
    N: int
    weights: WeightSequence
    schur_lu: tuple
    schur: np.ndarray
    Y: np.ndarray  # M^-1 C^T, dense nv x M2
    CY: np.ndarray  # C M^-1 C^T
    data: ProblemData
    boundary_quad: tuple
    dt_beta0_loads: Optional[np.ndarray] = None

    @property
    def M2(self) -> int:
        return self.spaces.M2

    @property
    def M3(self) -> int:
        return self.spaces.M3

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.N + 1)


@dataclass
class TimeState:
    """State after computing ``u_{n}``: ``u_curr = u_n``, ``u_prev = u_{n-1}``."""

    n: int
    u_prev: np.ndarray
    u_curr: np.ndarray
    x_hist: np.ndarray  # (N + 1, M2 + M3), rows 0 .. n-1 filled
    energies: list = field(default_factory=list)  # E_1 .. E_n
    identity_residuals: list = field(default_factory=list)
    identity_scales: list = field(default_factory=list)

    @property
    def phi_hist(self):
        return self.x_hist[: self.n]

    def split(self, M2):
        return self.x_hist[: self.n, :M2], self.x_hist[: self.n, M2:]


@dataclass
class Trajectory:
    times: np.ndarray
    u: np.ndarray  # (N + 1, nv)
    energies: np.ndarray  # E_1 .. E_N
    densities: np.ndarray  # (N, M2 + M3) for n = 0 .. N-1
    identity_residuals: np.ndarray
    identity_scales: np.ndarray
    stopped_early: bool = False

    def relative_identity_error(self) -> float:
        if not len(self.identity_residuals):
            return 0.0
        scale = np.maximum(self.identity_scales, np.finfo(float).tiny)
        return float(np.max(np.abs(self.identity_residuals) / scale))


def _zero(p):
    return np.zeros(len(p))


def _zero_grad(p):
    return np.zeros((len(p), 2))


def _boundary_quadrature(spaces: BoundarySpaces, n: int = 4):
    """Gauss points on every panel with the two hat-function values."""
    g = gauss_legendre(n)
    t = 0.5 * (g.nodes + 1.0)
    w = 0.5 * g.weights
    a, b = spaces.starts, spaces.ends
    pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
    wts = spaces.lengths[:, None] * w[None, :]
    normals = np.repeat(spaces.normals[:, None, :], n, axis=1)
    shape = np.stack([1.0 - t, t], axis=1)  # (q, 2)
    return pts, wts, normals, shape


def _boundary_loads(sys_or_spaces, quad, values):
    """Panel loads ``<v, z_i>`` (p0) and vertex loads ``<v, w_k>`` (p1)."""
    spaces = sys_or_spaces
    pts, wts, normals, shape = quad
    vals = values.reshape(wts.shape)
    p0 = (wts * vals).sum(axis=1)
    loc = np.einsum("pq,pq,qa->pa", wts, vals, shape)
    p1 = np.bincount(spaces.panels.ravel(), weights=loc.ravel(), minlength=spaces.M3)
    return p0, p1


def _traces(system_spaces, quad, incident: IncidentField, t: float):
    pts, wts, normals, shape = quad
    flat = pts.reshape(-1, 2)
    val, dtv, dn = (np.asarray(a) for a in incident.evaluate(flat, t, normals.reshape(-1, 2)))
    return val, dn, dtv


def _select_options(g: GeneratingFunction, options: QuadratureOptions | None):
    if options is not None:
        return options
    base = QuadratureOptions()
    return base.escalated() if g.kind is Kind.TR else base


def initialize(
    mesh: TriangleMesh,
    coeffs: CoefficientField | None,
    data: ProblemData,
    genfun: GeneratingFunction,
    T: float,
    dt: float | None = None,
    quadrature: QuadratureOptions | None = None,
    parallel: bool | int = False,
    weights: WeightSequence | None = None,
):
    """Assemble, compute CQ weights, factorize, and set ``u_0, u_1``.

    With ``dt`` omitted the CFL step ``2 / sqrt(lam_max)`` is rounded down
    so that ``N = ceil(T / dt)`` steps end exactly at ``T``.  A
    user-supplied ``dt`` above the CFL step triggers :class:`CFLWarning`.

    Returns
    -------
    (CoupledSystem, TimeState)
    """
    if not T > 0:
        raise ValueError("T must be positive")
    ops = assemble_interior(mesh, coeffs)
    spaces = BoundarySpaces.from_mesh(mesh)
    lam, dt_cfl = cfl_timestep(ops)
    if dt is None:
        N = max(2, math.ceil(T / dt_cfl - 1e-12))
        dt = T / N
    else:
        if dt > dt_cfl * (1 + 1e-12):
            warnings.warn(
                f"dt={dt:.6g} exceeds the CFL step {dt_cfl:.6g}; the discrete energy may be indefinite",
                CFLWarning,
                stacklevel=2,
            )
        N = max(2, math.ceil(T / dt - 1e-12))
    logger.info("initialize: nv=%d M2=%d dt=%.6g N=%d lam_max=%.6g", ops.n, spaces.M2, dt, N, lam)

    if weights is None:
        assembler = CalderonAssembler(spaces, _select_options(genfun, quadrature))
        weights = block_weights(assembler, genfun, ContourParams(N, dt), parallel=parallel, tag="calderon")
    if weights.N < N - 1:
        raise ValueError("too few CQ weights for the requested horizon")

    M2, M3 = spaces.M2, spaces.M3
    Mlu = ops.M_factor
    Ct = ops.C.T.toarray()
    Y = Mlu.solve(Ct)
    CY = ops.C @ Y
    schur = weights[0].copy()
    schur[:M2, :M2] += 0.5 * dt * CY
    schur[:M2, M2:] += 0.5 * ops.Ibd
    schur[M2:, :M2] -= 0.5 * ops.Ibd.T
    try:
        lu = sla.lu_factor(schur, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise NumericalFailure(f"Schur factorization failed: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise NumericalFailure("singular Schur matrix")

    quad = _boundary_quadrature(spaces)
    sys_ = CoupledSystem(ops, spaces, genfun, dt, N, weights, lu, schur, Y, CY, data, quad)

    if data.has_boundary_data and not data.analytic_dt_beta0:
        loads = np.array([_boundary_loads(spaces, quad, _traces(spaces, quad, data.incident, tn)[0])[0] for tn in sys_.times])
        sys_.dt_beta0_loads = discrete_derivative(genfun, dt, loads, +1)

    # initial data
    u0 = data.u0 or _zero
    gu0 = data.grad_u0 or _zero_grad
    v0 = data.v0 or _zero
    gv0 = data.grad_v0 or _zero_grad
    u0h = elliptic_projection(ops, u0, gu0)
    v0h = elliptic_projection(ops, v0, gv0)
    c = ops.coeffs

    def accel(p):
        lap = data.lap_u0(p) if data.lap_u0 is not None else np.zeros(len(p))
        src = data.f(p, 0.0) if data.f is not None else 0.0
        return c.speed(p) ** 2 * (lap + src)

    if data.lap_u0 is None and data.f is None:
        a0h = np.zeros(ops.n)
    elif data.grad_lap_u0 is not None and data.f is None and _is_constant_speed(ops):
        cc = float(c.speed(np.zeros((1, 2)))[0]) ** 2
        a0h = elliptic_projection(ops, lambda p: cc * data.lap_u0(p), lambda p: cc * data.grad_lap_u0(p))
    else:
        a0h = l2_projection(ops, accel)
    u1h = u0h + dt * v0h + 0.5 * dt**2 * a0h

    x_hist = np.zeros((N + 1, M2 + M3))
    state = TimeState(1, u0h, u1h, x_hist)
    state.energies.append(discrete_energy(ops, u1h, u0h, dt))
    return sys_, state


def _is_constant_speed(ops: InteriorOperators) -> bool:
    pts = ops.mesh.vertices
    sp = ops.coeffs.speed(pts)
    return bool(np.all(sp == sp[0]))


def _known_terms(sys_: CoupledSystem, state: TimeState):
    """Interior right side ``G`` and boundary right side ``(r1, r2)`` without the ``u_{n+1}`` coupling."""
    ops = sys_.ops
    dt = sys_.dt
    n = state.n
    tn = n * dt
    data = sys_.data
    G = ops.M @ (2.0 * state.u_curr - state.u_prev) / dt**2 - ops.K @ state.u_curr
    if data.f is not None:
        G = G + load_vector(ops, lambda p: data.f(p, tn))
    d0 = np.zeros(sys_.M2)
    if data.has_boundary_data:
        val, dn, dtv = _traces(sys_.spaces, sys_.boundary_quad, data.incident, tn)
        _, b1 = _boundary_loads(sys_.spaces, sys_.boundary_quad, dn)
        G = G + ops.E.T @ b1
        if sys_.dt_beta0_loads is not None:
            d0 = sys_.dt_beta0_loads[n]
        else:
            d0, _ = _boundary_loads(sys_.spaces, sys_.boundary_quad, dtv)
    hist = apply_history(sys_.weights, state.x_hist, n)
    r1 = -d0 - hist[: sys_.M2] - ops.C @ state.u_prev / (2.0 * dt)
    r2 = -hist[sys_.M2 :]
    return G, r1, r2, hist


def step(sys_: CoupledSystem, state: TimeState, record_identity: bool = True) -> TimeState:
    """Advance from ``u_n`` to ``u_{n+1}`` and store ``(phi_n, psi_n)``.

    Raises
    ------
    NumericalFailure
        If the new state is not finite.
    """
    n = state.n
    if n < 1 or n >= sys_.N:
        raise IndexError(f"step index n={n} outside 1..{sys_.N - 1}")
    dt = sys_.dt
    M2 = sys_.M2
    G, r1, r2, hist = _known_terms(sys_, state)
    MinvG = sys_.ops.solve_M(G)
    rhs = np.concatenate([r1 + 0.5 * dt * (sys_.ops.C @ MinvG), r2])
    if not np.all(np.isfinite(rhs)):
        raise NumericalFailure(f"non-finite right-hand side at step n={n}")
    x = sla.lu_solve(sys_.schur_lu, rhs, check_finite=False)
    u_next = dt**2 * (MinvG - sys_.Y @ x[:M2])
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u_next))):
        raise NumericalFailure(f"non-finite state at step n={n}")
    state.x_hist[n] = x
    E_next = discrete_energy(sys_.ops, u_next, state.u_curr, dt)
    if record_identity:
        boundary = float(x @ (sys_.weights[0] @ x + hist))
        dE = (E_next - state.energies[-1]) / dt
        state.identity_residuals.append(dE + boundary)
        state.identity_scales.append(max(abs(E_next), abs(state.energies[-1])) / dt + abs(boundary))
    state.energies.append(E_next)
    state.u_prev, state.u_curr = state.u_curr, u_next
    state.n = n + 1
    return state


def monolithic_step(sys_: CoupledSystem, state: TimeState):
    """Solve the full ``(nv + M2 + M3)`` system of step ``n`` directly.

    Returns ``(u_{n+1}, phi_n, psi_n)`` without modifying ``state``.
    """
    ops = sys_.ops
    dt = sys_.dt
    M2 = sys_.M2
    G, r1, r2, _ = _known_terms(sys_, state)
    w0 = sys_.weights[0]
    C = ops.C
    Z = None
    A = sps.bmat(
        [
            [ops.M / dt**2, C.T, sps.csr_matrix((ops.n, sys_.M3))],
            [-C / (2.0 * dt), sps.csr_matrix(w0[:M2, :M2]), sps.csr_matrix(w0[:M2, M2:] + 0.5 * ops.Ibd)],
            [Z, sps.csr_matrix(w0[M2:, :M2] - 0.5 * ops.Ibd.T), sps.csr_matrix(w0[M2:, M2:])],
        ],
        format="csc",
    )
    sol = spsolve(A, np.concatenate([G, r1, r2]))
    return sol[: ops.n], sol[ops.n : ops.n + M2], sol[ops.n + M2 :]


def run(
    sys_: CoupledSystem,
    state: TimeState,
    max_energy_ratio: float | None = None,
    record_identity: bool = True,
) -> Trajectory:
    """Step to ``t_N``, keeping every interior state.

    ``max_energy_ratio`` stops the run once ``|E_n| > ratio * |E_1|``
    (blow-up detection); the trajectory is then truncated.
    """
    us = [state.u_prev.copy(), state.u_curr.copy()]
    stopped = False
    E1 = abs(state.energies[0])
    while state.n < sys_.N:
        step(sys_, state, record_identity)
        us.append(state.u_curr.copy())
        if max_energy_ratio is not None and abs(state.energies[-1]) > max_energy_ratio * max(E1, np.finfo(float).tiny):
            stopped = True
            logger.info("energy ratio exceeded at n=%d", state.n)
            break
    n_done = len(us) - 1
    return Trajectory(
        times=sys_.dt * np.arange(n_done + 1),
        u=np.array(us),
        energies=np.array(state.energies),
        densities=state.x_hist[:n_done].copy(),
        identity_residuals=np.array(state.identity_residuals),
        identity_scales=np.array(state.identity_scales),
        stopped_early=stopped,
    )
