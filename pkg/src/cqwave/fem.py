"""P1 finite elements for the interior wave equation.

Matrices follow the convention ``(A)_{ij} = a(v_j, v_i)``:

* ``M``  weighted mass ``<c^-2 v_j, v_i>``,
* ``M1`` unweighted mass,
* ``K``  stiffness ``<kappa grad v_j, grad v_i>``,
* ``C``  trace coupling ``<z_i, v_j>_Gamma`` (boundary panels x mesh vertices),
* ``Ibd`` boundary mass ``<z_i, w_j>_Gamma`` (panels x boundary vertices).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import eigsh, splu

from .mesh import TriangleMesh

__all__ = [
    "CoefficientField",
    "InteriorOperators",
    "assemble_interior",
    "elliptic_projection",
    "l2_projection",
    "cfl_timestep",
    "discrete_energy",
    "nodal_interpolant",
    "DegenerateElementError",
]

logger = logging.getLogger(__name__)

# Strang-Fix 3-point rule (degree 2), barycentric coordinates; all points interior.
_Q2_BARY = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
_Q2_W = np.full(3, 1 / 3)

# Dunavant 6-point rule (degree 4).
_a1, _b1 = 0.445948490915965, 0.108103018168070
_a2, _b2 = 0.091576213509771, 0.816847572980459
_Q4_BARY = np.array(
    [
        [_a1, _a1, _b1],
        [_a1, _b1, _a1],
        [_b1, _a1, _a1],
        [_a2, _a2, _b2],
        [_a2, _b2, _a2],
        [_b2, _a2, _a2],
    ]
)
_Q4_W = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)


class DegenerateElementError(ValueError):
    pass


def _constant(value):
    return lambda pts: np.full(len(pts), float(value))


@dataclass(frozen=True)
class CoefficientField:
    """Wave speed ``c(x)`` and diffusion tensor ``kappa(x)``.

    ``c`` maps ``(n, 2)`` points to ``(n,)`` speeds; ``kappa`` maps points
    to ``(n, 2, 2)`` symmetric tensors, or is ``None`` for the identity.
    """

    c: Callable[[np.ndarray], np.ndarray] = field(default_factory=lambda: _constant(1.0))
    kappa: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def constant(cls, c: float = 1.0) -> "CoefficientField":
        if not c > 0:
            raise ValueError("wave speed must be positive")
        return cls(_constant(c))

    def speed(self, pts) -> np.ndarray:
        vals = np.asarray(self.c(np.asarray(pts, dtype=float)), dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("wave speed must be positive and finite")
        return vals

    def tensor(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.kappa is None:
            return np.broadcast_to(np.eye(2), (len(pts), 2, 2))
        k = np.asarray(self.kappa(pts), dtype=float)
        if k.shape != (len(pts), 2, 2):
            raise ValueError("kappa must return (n, 2, 2) tensors")
        if not np.allclose(k, np.swapaxes(k, 1, 2)):
            raise ValueError("kappa must be symmetric")
        if np.any(np.linalg.eigvalsh(k) <= 0):
            raise ValueError("kappa must be positive definite")
        return k


@dataclass
class InteriorOperators:
    """Assembled interior matrices and the geometry they were built from."""

    mesh: TriangleMesh
    coeffs: CoefficientField
    M: sps.csc_matrix
    M1: sps.csc_matrix
    K: sps.csc_matrix
    C: sps.csr_matrix
    Ibd: np.ndarray
    E: sps.csr_matrix  # boundary vertex -> mesh vertex injection, M3 x nv
    c_max: float
    _factors: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def M_factor(self):
        """Cached sparse LU of ``M`` (SPD, so the factorization is exact up to roundoff)."""
        if "M" not in self._factors:
            self._factors["M"] = splu(self.M.tocsc())
        return self._factors["M"]

    def solve_M(self, rhs):
        return self.M_factor.solve(np.asarray(rhs, dtype=float))

    def _grad_data(self):
        if "grad" not in self._factors:
            p = self.mesh.vertices[self.mesh.triangles]
            self._factors["grad"] = _element_gradients(p)
        return self._factors["grad"]


def _element_gradients(p):
    """Barycentric gradients ``(nt, 3, 2)`` and areas ``(nt,)``."""
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if np.any(det <= 0):
        raise DegenerateElementError(f"triangle {int(np.argmin(det))} is degenerate or clockwise")
    inv = np.empty((len(p), 2, 2))
    inv[:, 0, 0] = e2[:, 1] / det
    inv[:, 0, 1] = -e2[:, 0] / det
    inv[:, 1, 0] = -e1[:, 1] / det
    inv[:, 1, 1] = e1[:, 0] / det
    # rows of inv are grad(lambda_1), grad(lambda_2)
    g1 = inv[:, 0, :]
    g2 = inv[:, 1, :]
    grads = np.stack([-(g1 + g2), g1, g2], axis=1)
    return grads, 0.5 * det


def _quad_points(p, bary):
    return np.einsum("qk,tkd->tqd", bary, p)


def _scatter(tri, local, n):
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return sps.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsc()


def _boundary_maps(mesh: TriangleMesh):
    bv = mesh.boundary_vertices
    M3 = len(bv)
    nv = mesh.n_vertices
    local = {int(v): k for k, v in enumerate(bv)}
    E = sps.csr_matrix((np.ones(M3), (np.arange(M3), bv)), shape=(M3, nv))
    ends = mesh.boundary_edges
    L = np.linalg.norm(mesh.vertices[ends[:, 1]] - mesh.vertices[ends[:, 0]], axis=1)
    Ibd = np.zeros((len(ends), M3))
    for i, (a, b) in enumerate(ends):
        Ibd[i, local[int(a)]] += 0.5 * L[i]
        Ibd[i, local[int(b)]] += 0.5 * L[i]
    return E, Ibd


def assemble_interior(mesh: TriangleMesh, coeffs: CoefficientField | None = None) -> InteriorOperators:
    """Assemble ``M, M1, K, C, Ibd`` on a P1 mesh.

    The weight ``c^-2`` and ``kappa`` are sampled at the three interior
    points of a degree-2 rule, so a speed jump aligned with element edges
    is captured exactly.

    Raises
    ------
    DegenerateElementError
    """
    coeffs = coeffs or CoefficientField()
    p = mesh.vertices[mesh.triangles]
    grads, area = _element_gradients(p)
    nt = len(area)
    nv = mesh.n_vertices
    qp = _quad_points(p, _Q2_BARY).reshape(-1, 2)
    c = coeffs.speed(qp).reshape(nt, 3)
    kap = coeffs.tensor(qp).reshape(nt, 3, 2, 2).mean(axis=1)  # exact for affine kappa

    phi = _Q2_BARY  # (q, k) shape values at quadrature points
    mass_w = np.einsum("q,tq,qi,qj->tij", _Q2_W, c**-2, phi, phi) * area[:, None, None]
    mass_1 = np.einsum("q,qi,qj->ij", _Q2_W, phi, phi)[None] * area[:, None, None]
    stiff = np.einsum("tid,tde,tje->tij", grads, kap, grads) * area[:, None, None]

    M = _scatter(mesh.triangles, mass_w, nv)
    M1 = _scatter(mesh.triangles, mass_1, nv)
    K = _scatter(mesh.triangles, stiff, nv)
    E, Ibd = _boundary_maps(mesh)
    C = sps.csr_matrix(Ibd) @ E
    return InteriorOperators(mesh, coeffs, M, M1, K, C.tocsr(), Ibd, E, float(c.max()))


def _element_loads(ops: InteriorOperators, f_vals, bary, w):
    """``int f v_i`` for values ``f_vals`` of shape ``(nt, q)``."""
    _, area = ops._grad_data()
    loc = np.einsum("q,tq,qi->ti", w, f_vals, bary) * area[:, None]
    return np.bincount(ops.mesh.triangles.ravel(), weights=loc.ravel(), minlength=ops.n)


def load_vector(ops: InteriorOperators, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``<f, v_i>`` with the degree-4 rule."""
    p = ops.mesh.vertices[ops.mesh.triangles]
    qp = _quad_points(p, _Q4_BARY)
    vals = np.asarray(f(qp.reshape(-1, 2)), dtype=float).reshape(qp.shape[:2])
    return _element_loads(ops, vals, _Q4_BARY, _Q4_W)


def elliptic_projection(ops: InteriorOperators, u, grad_u) -> np.ndarray:
    """Coefficients of ``R_h u``: ``(K + M1) x = <kappa grad u, grad v> + <u, v>``.

    ``u`` maps ``(n, 2)`` points to values and ``grad_u`` to ``(n, 2)``
    gradients.  The right-hand side uses the degree-4 rule.
    """
    p = ops.mesh.vertices[ops.mesh.triangles]
    grads, area = ops._grad_data()
    qp = _quad_points(p, _Q4_BARY)
    flat = qp.reshape(-1, 2)
    uv = np.asarray(u(flat), dtype=float).reshape(qp.shape[:2])
    gu = np.asarray(grad_u(flat), dtype=float).reshape(qp.shape[:2] + (2,))
    kap = ops.coeffs.tensor(flat).reshape(qp.shape[:2] + (2, 2))
    flux = np.einsum("tqde,tqe->tqd", kap, gu)
    rhs_grad = np.einsum("q,tqd,tid->ti", _Q4_W, flux, grads) * area[:, None]
    rhs = np.bincount(ops.mesh.triangles.ravel(), weights=rhs_grad.ravel(), minlength=ops.n)
    rhs += _element_loads(ops, uv, _Q4_BARY, _Q4_W)
    A = (ops.K + ops.M1).tocsc()
    x = splu(A).solve(rhs)
    if not np.all(np.isfinite(x)):
        raise ArithmeticError("elliptic projection solve failed")
    return x


def l2_projection(ops: InteriorOperators, u) -> np.ndarray:
    """Coefficients of the unweighted L2 projection of ``u``."""
    rhs = load_vector(ops, u)
    return splu(ops.M1.tocsc()).solve(rhs)


def nodal_interpolant(mesh: TriangleMesh, u) -> np.ndarray:
    return np.asarray(u(mesh.vertices), dtype=float)


def cfl_timestep(ops: InteriorOperators, weighted: bool = True, tol: float = 1e-10):
    """Largest eigenvalue of ``K x = lam M x`` and ``dt = 2 / sqrt(lam)``.

    Uses ``M`` (weighted by ``c^-2``) when ``weighted``, else ``M1``.
    Small systems are solved densely; otherwise implicitly restarted
    Lanczos.

    Returns
    -------
    lam_max : float
    dt : float
    """
    B = ops.M if weighted else ops.M1
    if ops.n <= 400:
        from scipy.linalg import eigh

        lam = float(eigh(ops.K.toarray(), B.toarray(), eigvals_only=True)[-1])
    else:
        vals = eigsh(ops.K.tocsc(), k=1, M=B.tocsc(), which="LA", tol=tol, maxiter=20 * ops.n)[0]
        lam = float(vals[-1])
    if not lam > 0:
        raise ArithmeticError("non-positive largest eigenvalue")
    return lam, 2.0 / np.sqrt(lam)


def discrete_energy(ops: InteriorOperators, u_n, u_prev, dt: float) -> float:
    """``E_n = 1/2 |(u_n - u_prev) / (c dt)|^2 + 1/2 <kappa grad u_n, grad u_prev>``."""
    d = np.asarray(u_n) - np.asarray(u_prev)
    return float(0.5 * d @ (ops.M @ d) / dt**2 + 0.5 * np.asarray(u_n) @ (ops.K @ np.asarray(u_prev)))
