"""Galerkin boundary element operators of the modified Helmholtz equation.

Kernel ``G(r, s) = K_0(s r) / (2 pi)`` on a closed polygon.  Densities are
piecewise constant on panels (``p0``) or continuous piecewise linear on
the loop vertices (``p1``).

All four operators are assembled from panel-pair tensors

``L[i, j, a, b] = int_{panel i} int_{panel j} k(x, y) N_a(x) N_b(y) ds_y ds_x``

where ``N_0, N_1`` are the two linear shape functions of a panel (value 1
at its start and end vertex respectively).  Summing over a shape index
gives the piecewise-constant test or trial function.

Quadrature:

* regular pairs: tensor Gauss-Legendre whose order depends on the
  panel separation and on ``|s| * length``; pairs with
  ``Re(s) * dist > decay_cutoff`` are dropped (the kernel is below
  ``exp(-decay_cutoff)`` there);
* self pairs: the integrand depends on ``|u - v|`` only, so the double
  integral collapses to one integral in ``rho = |u - v|``.  The term
  ``-log rho`` is integrated by the log-weighted Gauss rule, the bounded
  remainder ``K_0(s L rho) + log rho`` by geometrically graded Gauss;
* pairs sharing a vertex: Duffy transformation of the two triangles of
  the parameter square, graded Gauss towards the shared corner.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special

from .mesh import TriangleMesh
from .specfun import UNDERFLOW_RE, gauss_legendre, log_weighted_rule

__all__ = [
    "BoundarySpaces",
    "QuadratureOptions",
    "CalderonBlock",
    "CalderonAssembler",
    "PanelTensors",
]

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
_ORDERS = (2, 3, 4, 6, 8, 10, 12, 16, 20, 24, 32, 40)
_CHUNK = 1_500_000  # max kernel evaluations per vectorized batch


@dataclass(frozen=True)
class BoundarySpaces:
    """Panels of a closed polygonal boundary with ``p0`` and ``p1`` DOFs.

    Attributes
    ----------
    nodes : (M3, 2) array
        Loop vertices; the ``p1`` DOF ``k`` sits at ``nodes[k]``.
    panels : (M2, 2) int array
        Start and end node of each panel; panel ``i`` is ``p0`` DOF ``i``.
    mesh_vertex : (M3,) int array or None
        Index of each node in the interior mesh, when built from one.
    """

    nodes: np.ndarray
    panels: np.ndarray
    mesh_vertex: Optional[np.ndarray] = None

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        panels = np.ascontiguousarray(self.panels, dtype=np.int64)
        if panels.shape[0] < 3:
            raise ValueError("need at least three panels")
        for arr in (nodes, panels):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "panels", panels)

    @classmethod
    def from_mesh(cls, mesh: TriangleMesh) -> "BoundarySpaces":
        bv = mesh.boundary_vertices
        local = {int(v): k for k, v in enumerate(bv)}
        panels = np.array([[local[int(a)], local[int(b)]] for a, b in mesh.boundary_edges])
        return cls(mesh.vertices[bv], panels, np.asarray(bv))

    @classmethod
    def from_polygon(cls, points) -> "BoundarySpaces":
        """Single counter-clockwise loop through ``points``."""
        pts = np.asarray(points, dtype=float)
        n = len(pts)
        panels = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
        return cls(pts, panels)

    @classmethod
    def circle(cls, R: float, n: int, phase: float = 0.0) -> "BoundarySpaces":
        theta = phase + TWO_PI * np.arange(n) / n
        return cls.from_polygon(np.column_stack([R * np.cos(theta), R * np.sin(theta)]))

    @property
    def M2(self) -> int:
        return self.panels.shape[0]

    @property
    def M3(self) -> int:
        return self.nodes.shape[0]

    @property
    def starts(self) -> np.ndarray:
        return self.nodes[self.panels[:, 0]]

    @property
    def ends(self) -> np.ndarray:
        return self.nodes[self.panels[:, 1]]

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ends - self.starts, axis=1)

    @property
    def tangents(self) -> np.ndarray:
        t = self.ends - self.starts
        return t / np.linalg.norm(t, axis=1)[:, None]

    @property
    def normals(self) -> np.ndarray:
        """Outward unit normals (right of the traversal direction)."""
        t = self.tangents
        return np.column_stack([t[:, 1], -t[:, 0]])

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.starts + self.ends)

    def incidence(self, a: int) -> np.ndarray:
        """Dense ``M2 x M3`` matrix mapping panel shape ``a`` to its node."""
        P = np.zeros((self.M2, self.M3))
        P[np.arange(self.M2), self.panels[:, a]] = 1.0
        return P

    def arclength_derivative(self) -> np.ndarray:
        """Dense ``M2 x M3`` matrix: panel-wise derivative of a ``p1`` function."""
        inv = 1.0 / self.lengths
        D = np.zeros((self.M2, self.M3))
        rows = np.arange(self.M2)
        D[rows, self.panels[:, 0]] -= inv
        D[rows, self.panels[:, 1]] += inv
        return D

    def mass_p0(self) -> np.ndarray:
        return np.diag(self.lengths)

    def mass_p0p1(self) -> np.ndarray:
        """``(I)_{ij} = <z_i, w_j>``, shape ``M2 x M3``."""
        half = 0.5 * self.lengths[:, None]
        return half * (self.incidence(0) + self.incidence(1))

    def mass_p1(self) -> np.ndarray:
        L = self.lengths
        P0, P1 = self.incidence(0), self.incidence(1)
        return (
            P0.T @ (L[:, None] / 3 * P0)
            + P1.T @ (L[:, None] / 3 * P1)
            + P0.T @ (L[:, None] / 6 * P1)
            + P1.T @ (L[:, None] / 6 * P0)
        )


@dataclass(frozen=True)
class QuadratureOptions:
    """Quadrature orders of the panel-pair integrals.

    ``n_far``/``n_mid``/``n_near`` apply to non-touching pairs whose
    separation relative to the longer panel exceeds ``far_ratio``,
    ``mid_ratio``, or neither.  The order is raised to
    ``osc_factor * |s| * length + 2`` when the kernel oscillates or decays
    across a panel, capped at ``n_max``.
    """

    n_far: int = 4
    n_mid: int = 8
    n_near: int = 12
    far_ratio: float = 3.0
    mid_ratio: float = 1.0
    osc_factor: float = 0.6
    n_max: int = 40
    decay_cutoff: float = 40.0
    near_decay_cutoff: float = 28.0
    graded_levels: int = 10
    grading: float = 0.2
    n_graded: int = 8
    n_duffy_eta: int = 8
    n_log: int = 4

    def escalated(self) -> "QuadratureOptions":
        """Near-field orders for trapezoidal-rule CQ, whose frequencies reach far into the right half plane."""
        return replace(self, n_mid=12, n_near=20, n_graded=10, n_duffy_eta=10, graded_levels=12)


def _round_order(n: int) -> int:
    for k in _ORDERS:
        if n <= k:
            return k
    return _ORDERS[-1]


def _graded_rule(levels: int, sigma: float, n: int):
    """Composite Gauss on (0, 1) geometrically graded towards 0."""
    g = gauss_legendre(n)
    edges = np.concatenate([[0.0], sigma ** np.arange(levels, 0, -1), [1.0]])
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = g.mapped(a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _kv_masked(order, z):
    out = np.zeros(z.shape, dtype=complex)
    ok = z.real <= UNDERFLOW_RE
    if np.all(ok):
        return special.kv(order, z)
    out[ok] = special.kv(order, z[ok])
    return out


def _split_edges(a: float, b: float, width: float) -> np.ndarray:
    """Equally spaced edges on ``(a, b)`` with pieces no wider than ``width``."""
    k = max(1, int(np.ceil((b - a) / width)))
    return np.linspace(a, b, k + 1)


def _composite(g, edges):
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = g.mapped(a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _self_H(r):
    """``H_ab(rho) = int_0^{1-rho} N_a(t) N_b(t+rho) + N_a(t+rho) N_b(t) dt``, shape ``(2, 2, len(r))``."""
    g = gauss_legendre(2)
    r = np.asarray(r)
    tt = (0.5 * (g.nodes[:, None] + 1.0)) * (1.0 - r)[None, :]
    wt = (0.5 * g.weights[:, None]) * (1.0 - r)[None, :]
    A1 = np.stack([1.0 - tt, tt])
    A2 = np.stack([1.0 - (tt + r[None, :]), tt + r[None, :]])
    return np.einsum("aqr,bqr,qr->abr", A1, A2, wt) + np.einsum("aqr,bqr,qr->abr", A2, A1, wt)


@dataclass
class PanelTensors:
    """Local shape tensors of the three kernels, each ``(M2, M2, 2, 2)``.

    ``V``: single layer; ``D``: double layer ``d/dnu_y G``;
    ``A``: adjoint double layer ``d/dnu_x G``.
    """

    s: complex
    V: np.ndarray
    D: np.ndarray
    A: np.ndarray


@dataclass
class CalderonBlock:
    """Galerkin Calderon matrix ``[[s V, K], [-Kt, W / s]]`` at frequency ``s``."""

    s: complex
    sV: np.ndarray
    K: np.ndarray
    Kt: np.ndarray
    W_over_s: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.sV, self.K], [-self.Kt, self.W_over_s]])

    @property
    def shape(self):
        n = self.sV.shape[0] + self.W_over_s.shape[0]
        return (n, n)


class CalderonAssembler:
    """Assembles the boundary operators at arbitrary ``Re s > 0``.

    Geometry-only data (pair classes, incidence matrices) are computed
    once.  Instances hold no mutable state after construction, so calls
    at distinct frequencies may run concurrently.
    """

    def __init__(self, spaces: BoundarySpaces, options: QuadratureOptions | None = None):
        self.spaces = spaces
        self.options = options or QuadratureOptions()
        sp = spaces
        M2 = sp.M2
        self._a = sp.starts
        self._e = sp.ends - sp.starts
        self._L = sp.lengths
        self._nu = sp.normals
        self._P = (sp.incidence(0), sp.incidence(1))
        self._Dd = sp.arclength_derivative()
        self._NN = self._nu @ self._nu.T

        # pair classification
        pan = sp.panels
        share = (
            (pan[:, None, 0] == pan[None, :, 0])
            | (pan[:, None, 0] == pan[None, :, 1])
            | (pan[:, None, 1] == pan[None, :, 0])
            | (pan[:, None, 1] == pan[None, :, 1])
        )
        eye = np.eye(M2, dtype=bool)
        adjacent = share & ~eye
        self._adj_pairs = np.argwhere(adjacent)
        regular = ~share
        ii, jj = np.nonzero(regular)
        mid = sp.midpoints
        Lmax = np.maximum(self._L[ii], self._L[jj])
        dist = np.linalg.norm(mid[ii] - mid[jj], axis=1) - 0.5 * (self._L[ii] + self._L[jj])
        dist = np.maximum(dist, 0.0)
        self._reg_i, self._reg_j = ii, jj
        self._reg_dist = dist
        self._reg_Lmax = Lmax
        ratio = dist / Lmax
        o = self.options
        self._reg_ngeom = np.where(
            ratio > o.far_ratio, o.n_far, np.where(ratio > o.mid_ratio, o.n_mid, o.n_near)
        )
        self._adj_geom = self._adjacent_geometry()
        self._adj_rmin = self._adjacent_min_distance()

    # -- adjacent-pair geometry -------------------------------------------------
    def _adjacent_geometry(self):
        """Shared corner ``c`` and outgoing edge vectors for each adjacent pair."""
        pan = self.spaces.panels
        nodes = self.spaces.nodes
        out = []
        for i, j in self._adj_pairs:
            common = set(pan[i].tolist()) & set(pan[j].tolist())
            c = min(common)  # two-panel loops are excluded, so a single shared node
            i_starts = pan[i, 0] == c
            j_starts = pan[j, 0] == c
            ei = nodes[pan[i, 1] if i_starts else pan[i, 0]] - nodes[c]
            ej = nodes[pan[j, 1] if j_starts else pan[j, 0]] - nodes[c]
            out.append((ei, ej, i_starts, j_starts))
        if not out:
            return None
        ei = np.array([o[0] for o in out])
        ej = np.array([o[1] for o in out])
        i_starts = np.array([o[2] for o in out])
        j_starts = np.array([o[3] for o in out])
        return ei, ej, i_starts, j_starts

    def _adjacent_min_distance(self) -> float:
        """Smallest ``|u e_i - v e_j|`` with ``max(u, v) = 1`` over adjacent pairs; ``r >= rmin * xi``."""
        if self._adj_geom is None:
            return 0.0
        ei, ej, _, _ = self._adj_geom
        t = np.linspace(0.0, 1.0, 65)[None, :, None]
        d1 = np.linalg.norm(ei[:, None, :] - t * ej[:, None, :], axis=2)
        d2 = np.linalg.norm(t * ei[:, None, :] - ej[:, None, :], axis=2)
        return float(0.99 * min(d1.min(), d2.min()))

    # -- kernels ----------------------------------------------------------------
    @staticmethod
    def _kernels(s, diff, nu_x, nu_y):
        """Single layer, double layer and adjoint double layer kernels.

        ``diff = x - y`` with trailing axis 2; normals broadcast against it.
        """
        r = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
        z = s * r
        k0 = _kv_masked(0, z)
        k1 = _kv_masked(1, z)
        G = k0 / TWO_PI
        common = (s / TWO_PI) * k1 / r
        dn_y = diff[..., 0] * nu_y[..., 0] + diff[..., 1] * nu_y[..., 1]
        dn_x = diff[..., 0] * nu_x[..., 0] + diff[..., 1] * nu_x[..., 1]
        return G, common * dn_y, -common * dn_x

    # -- pair integrals ---------------------------------------------------------
    def _regular(self, s, T):
        o = self.options
        n_osc = np.ceil(o.osc_factor * abs(s) * self._reg_Lmax).astype(int) + 2
        n = np.minimum(np.maximum(self._reg_ngeom, n_osc), o.n_max)
        keep = s.real * self._reg_dist <= o.decay_cutoff
        n_round = np.array([_round_order(k) for k in n]) if n.size else n
        for order in np.unique(n_round[keep]):
            sel = np.nonzero(keep & (n_round == order))[0]
            g = gauss_legendre(int(order))
            t = 0.5 * (g.nodes + 1.0)
            w = 0.5 * g.weights
            shape = np.column_stack([1.0 - t, t]) * w[:, None]  # (n, 2)
            chunk = max(1, _CHUNK // (order * order))
            for start in range(0, len(sel), chunk):
                idx = sel[start : start + chunk]
                i, j = self._reg_i[idx], self._reg_j[idx]
                x = self._a[i, None, :] + t[None, :, None] * self._e[i, None, :]
                y = self._a[j, None, :] + t[None, :, None] * self._e[j, None, :]
                diff = x[:, :, None, :] - y[:, None, :, :]
                nu_x = self._nu[i][:, None, None, :]
                nu_y = self._nu[j][:, None, None, :]
                G, Dk, Ak = self._kernels(s, diff, nu_x, nu_y)
                scale = (self._L[i] * self._L[j])[:, None, None]
                for name, F in (("V", G), ("D", Dk), ("A", Ak)):
                    T[name][i, j] = scale * np.einsum("puv,ua,vb->pab", F, shape, shape, optimize=True)

    def _self(self, s, T):
        """Self pairs: 1D integral in ``rho`` split at ``rho* = min(1, 1 / |s L|)``.

        ``int_0^1 K0(s L rho) H(rho)`` is written as
        ``int_0^rho* (K0 + log rho) H + int_rho*^1 K0 H + int_rho*^1 log(rho) H - int_0^1 log(rho) H``;
        the first piece is regular and graded, the second is refined to the
        kernel scale and truncated where it has decayed, and the last uses
        the log-weighted rule.
        """
        o = self.options
        L = self._L
        sL = abs(s) * L.max()
        rstar = min(1.0, 1.0 / sL) if sL > 0 else 1.0
        rho, wr = _graded_rule(o.graded_levels, o.grading, o.n_graded)
        rho, wr = rho * rstar, wr * rstar
        lw = log_weighted_rule(o.n_log)
        H_g = _self_H(rho)
        H_l = _self_H(lw.nodes)
        z = s * L[:, None] * rho[None, :]
        bracket = _kv_masked(0, z) + np.log(rho)[None, :]
        smooth = np.einsum("pr,abr,r->pab", bracket, H_g, wr)
        logpart = np.einsum("abr,r->ab", H_l, lw.weights)  # int -log(rho) H dr
        if rstar < 1.0:
            # remaining interval: pieces of width ~ 2 / |s L|, dropped once decayed
            stop = min(1.0, o.near_decay_cutoff / max(s.real * L.min(), 1e-300))
            if stop > rstar:
                xs, ws = _composite(gauss_legendre(o.n_graded), _split_edges(rstar, stop, 2.0 / sL))
                k0 = _kv_masked(0, s * L[:, None] * xs[None, :])
                smooth = smooth + np.einsum("pr,abr,r->pab", k0, _self_H(xs), ws)
            n_geo = max(1, int(np.ceil(np.log2(1.0 / rstar))))
            xl, wl = _composite(gauss_legendre(8), rstar ** (1.0 - np.arange(n_geo + 1) / n_geo))
            smooth = smooth + np.einsum("r,abr,r->ab", np.log(xl), _self_H(xl), wl)[None]
        val = (L**2)[:, None, None] * (smooth + logpart[None]) / TWO_PI
        idx = np.arange(self.spaces.M2)
        T["V"][idx, idx] = val
        T["D"][idx, idx] = 0.0
        T["A"][idx, idx] = 0.0

    def _adjacent_rule(self, s):
        """Duffy rule on the unit square for frequency ``s``.

        ``xi`` (distance from the shared corner) is graded towards 0 and
        then split into pieces of width ``<= 2 / (|s| L)``; the ray
        direction ``eta`` is split into ``ceil(|s| L xi_max / 2)`` pieces
        on each ``xi`` piece.  Pieces where the kernel has decayed below
        ``exp(-near_decay_cutoff)`` are dropped.
        """
        o = self.options
        sL = abs(s) * self._L.max()
        edges = np.concatenate([[0.0], o.grading ** np.arange(o.graded_levels, 0, -1), [1.0]])
        if sL > 2.0:
            fine = [edges[:1]]
            for lo, hi in zip(edges[:-1], edges[1:]):
                fine.append(_split_edges(lo, hi, 2.0 / sL)[1:])
            edges = np.concatenate(fine)
        stop = o.near_decay_cutoff / max(s.real * self._adj_rmin, 1e-300)
        if stop < 1.0:
            edges = np.append(edges[edges < stop], stop)
        gx = gauss_legendre(o.n_graded)
        ge = gauss_legendre(o.n_duffy_eta)
        X, E, W = [], [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, wx = gx.mapped(lo, hi)
            m = max(1, int(np.ceil(sL * hi / 2.0)))
            e, we = _composite(ge, np.linspace(0.0, 1.0, m + 1))
            X.append(np.repeat(x, len(e)))
            E.append(np.tile(e, len(x)))
            W.append(np.outer(wx * x, we).ravel())  # Duffy Jacobian x
        X, E, W = np.concatenate(X), np.concatenate(E), np.concatenate(W)
        # two triangles: v <= u and u <= v (u along panel i, v along panel j)
        U = np.concatenate([X, X * E])
        V = np.concatenate([X * E, X])
        return U, V, np.concatenate([W, W])

    def _adjacent(self, s, T):
        if self._adj_geom is None:
            return
        ei, ej, i_starts, j_starts = self._adj_geom
        U, Vv, Wq = self._adjacent_rule(s)
        chunk = max(1, _CHUNK // len(U))
        for start in range(0, len(self._adj_pairs), chunk):
            sl = slice(start, start + chunk)
            pi_, pj_ = self._adj_pairs[sl, 0], self._adj_pairs[sl, 1]
            diff = U[None, :, None] * ei[sl, None, :] - Vv[None, :, None] * ej[sl, None, :]
            nu_x = self._nu[pi_][:, None, :]
            nu_y = self._nu[pj_][:, None, :]
            G, Dk, Ak = self._kernels(s, diff, nu_x, nu_y)
            # native panel parameters
            ti = np.where(i_starts[sl, None], U[None, :], 1.0 - U[None, :])
            tj = np.where(j_starts[sl, None], Vv[None, :], 1.0 - Vv[None, :])
            Ni = np.stack([1.0 - ti, ti], axis=-1)  # (P, q, 2)
            Nj = np.stack([1.0 - tj, tj], axis=-1)
            scale = (self._L[pi_] * self._L[pj_])[:, None, None]
            for name, F in (("V", G), ("D", Dk), ("A", Ak)):
                T[name][pi_, pj_] = scale * np.einsum("pq,pqa,pqb->pab", F * Wq, Ni, Nj, optimize=True)

    # -- public API -------------------------------------------------------------
    def tensors(self, s: complex) -> PanelTensors:
        """Local shape tensors at frequency ``s``.

        Raises
        ------
        ValueError
            If ``Re s <= 0``.
        """
        s = complex(s)
        if not s.real > 0:
            raise ValueError(f"boundary operators need Re s > 0, got s = {s}")
        M2 = self.spaces.M2
        T = {k: np.zeros((M2, M2, 2, 2), dtype=complex) for k in ("V", "D", "A")}
        self._regular(s, T)
        self._self(s, T)
        self._adjacent(s, T)
        return PanelTensors(s, T["V"], T["D"], T["A"])

    def _sum_scatter(self, L, test_p1: bool, trial_p1: bool):
        P = self._P
        if not test_p1 and not trial_p1:
            return L.sum(axis=(2, 3))
        if not test_p1:
            Lb = L.sum(axis=2)
            return sum(Lb[:, :, b] @ P[b] for b in range(2))
        if not trial_p1:
            La = L.sum(axis=3)
            return sum(P[a].T @ La[:, :, a] for a in range(2))
        return sum(P[a].T @ L[:, :, a, b] @ P[b] for a in range(2) for b in range(2))

    def single_layer(self, s, t: PanelTensors | None = None, p1: bool = False):
        t = t or self.tensors(s)
        return self._sum_scatter(t.V, p1, p1)

    def double_layer(self, s, t=None, test_p1: bool = False):
        """``<z_i, K(s) w_j>`` with ``p1`` trial; ``p0`` test unless ``test_p1``."""
        t = t or self.tensors(s)
        return self._sum_scatter(t.D, test_p1, True)

    def adjoint_double_layer(self, s, t=None, trial_p1: bool = False):
        """``<w_i, Kt(s) z_j>`` with ``p1`` test; ``p0`` trial unless ``trial_p1``."""
        t = t or self.tensors(s)
        return self._sum_scatter(t.A, True, trial_p1)

    def hypersingular(self, s, t=None):
        """``<W(s) w_j, w_i>`` by integration by parts, ``M3 x M3``."""
        t = t or self.tensors(s)
        s = complex(s)
        V00 = t.V.sum(axis=(2, 3))
        Dd = self._Dd
        vec = self._sum_scatter(t.V * self._NN[:, :, None, None], True, True)
        return Dd.T @ V00 @ Dd + s * s * vec

    def calderon(self, s) -> CalderonBlock:
        s = complex(s)
        if s == 0:
            raise ValueError("s must be non-zero")
        t = self.tensors(s)
        return CalderonBlock(
            s,
            s * self.single_layer(s, t),
            self.double_layer(s, t),
            self.adjoint_double_layer(s, t),
            self.hypersingular(s, t) / s,
        )

    def calderon_matrix(self, s) -> np.ndarray:
        """Dense ``(M2 + M3)`` square Calderon matrix; suitable as a block-weights assembler."""
        return self.calderon(s).matrix

    __call__ = calderon_matrix


def assemble_V(s, spaces: BoundarySpaces, options=None):
    return CalderonAssembler(spaces, options).single_layer(s)


def assemble_K(s, spaces: BoundarySpaces, options=None):
    return CalderonAssembler(spaces, options).double_layer(s)


def assemble_Kt(s, spaces: BoundarySpaces, options=None):
    return CalderonAssembler(spaces, options).adjoint_double_layer(s)


def assemble_W(s, spaces: BoundarySpaces, options=None):
    return CalderonAssembler(spaces, options).hypersingular(s)


def assemble_calderon(s, spaces: BoundarySpaces, options=None) -> CalderonBlock:
    return CalderonAssembler(spaces, options).calderon(s)


__all__ += ["assemble_V", "assemble_K", "assemble_Kt", "assemble_W", "assemble_calderon"]
