"""Triangulations of the disk and the L-shape with ordered boundary loops."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "TriangleMesh",
    "MeshError",
    "MeshFormatError",
    "LSHAPE_CORNERS",
    "generate_disk",
    "generate_lshape",
    "refine_uniform",
    "load_mesh",
    "save_mesh",
    "boundary_loop_from_triangles",
]

LSHAPE_CORNERS = np.array(
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 3.0), (-3.0, 3.0), (-3.0, 1.0), (-1.0, 1.0)]
)


class MeshError(ValueError):
    """Mesh violates a structural invariant."""


class MeshFormatError(MeshError):
    """Malformed mesh file; ``lineno`` is 1-based."""

    def __init__(self, msg, path=None, lineno=None):
        where = f"{path}:{lineno}: " if lineno is not None else (f"{path}: " if path else "")
        super().__init__(where + msg)
        self.path = path
        self.lineno = lineno


def _edge_keys(tri: np.ndarray) -> np.ndarray:
    """Directed edges (a->b, b->c, c->a) of each triangle, shape ``(3 nt, 2)``."""
    return np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])


def boundary_loop_from_triangles(tri: np.ndarray) -> np.ndarray:
    """Boundary edges of a CCW triangulation chained into closed loops.

    A directed triangle edge whose reverse is not a triangle edge lies on the
    boundary, with the domain on its left.  Loops are concatenated; each
    starts at its smallest vertex index.
    """
    directed = _edge_keys(np.asarray(tri))
    present = {(int(a), int(b)) for a, b in directed}
    bnd = [(a, b) for (a, b) in present if (b, a) not in present]
    succ = {}
    for a, b in bnd:
        if a in succ:
            raise MeshError(f"boundary vertex {a} has two outgoing boundary edges")
        succ[a] = b
    loops = []
    remaining = set(succ)
    while remaining:
        start = min(remaining)
        loop = []
        v = start
        while True:
            remaining.discard(v)
            w = succ[v]
            loop.append((v, w))
            v = w
            if v == start:
                break
            if v not in succ:
                raise MeshError("boundary loop does not close")
        loops.extend(loop)
    return np.array(loops, dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class TriangleMesh:
    """Conforming P1 triangulation.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    boundary_edges : (nb, 2) int array
        Ordered so that consecutive edges share a vertex and each loop is
        traversed counter-clockwise (outward normal on the right).
    circle_radius : float or None
        Set for disk meshes; boundary midpoints created by refinement are
        projected to this circle.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    circle_radius: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name, dtype in (("vertices", float), ("triangles", np.int64), ("boundary_edges", np.int64)):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_boundary_edges(self) -> int:
        return self.boundary_edges.shape[0]

    @property
    def boundary_vertices(self) -> np.ndarray:
        """Boundary vertex indices in loop order."""
        return self.boundary_edges[:, 0]

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def area(self) -> float:
        return float(self.signed_areas().sum())

    def edges(self) -> np.ndarray:
        """Unique undirected edges sorted lexicographically, shape ``(ne, 2)``."""
        if "edges" not in self._cache:
            e = np.sort(_edge_keys(self.triangles), axis=1)
            self._cache["edges"] = np.unique(e, axis=0)
        return self._cache["edges"]

    def edge_lengths(self) -> np.ndarray:
        e = self.edges()
        return np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)

    @property
    def h(self) -> float:
        """Largest edge length."""
        return float(self.edge_lengths().max())

    @property
    def h_min(self) -> float:
        return float(self.edge_lengths().min())

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.vertices[self.triangles]
        angles = []
        for k in range(3):
            u = p[:, (k + 1) % 3] - p[:, k]
            v = p[:, (k + 2) % 3] - p[:, k]
            cos = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return float(np.min(angles))

    def boundary_normals(self) -> np.ndarray:
        """Outward unit normals of the boundary edges (right of traversal)."""
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        t = b - a
        t /= np.linalg.norm(t, axis=1)[:, None]
        return np.column_stack([t[:, 1], -t[:, 0]])

    def validate(self) -> None:
        """Check the structural invariants.

        Raises
        ------
        MeshError
        """
        nv = self.n_vertices
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= nv):
            raise MeshError("triangle index out of range")
        if np.any(self.signed_areas() <= 0):
            bad = int(np.argmin(self.signed_areas()))
            raise MeshError(f"triangle {bad} has non-positive signed area")
        directed = _edge_keys(self.triangles)
        und = np.sort(directed, axis=1)
        _, counts = np.unique(und, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two triangles")
        expected = boundary_loop_from_triangles(self.triangles)
        got = {tuple(e) for e in self.boundary_edges.tolist()}
        if got != {tuple(e) for e in expected.tolist()} or len(got) != self.n_boundary_edges:
            raise MeshError("boundary edges do not match the triangulation boundary")
        # consecutive edges share a vertex within each loop
        be = self.boundary_edges
        start = 0
        for i in range(len(be)):
            nxt = i + 1
            closes = be[i, 1] == be[start, 0]
            if closes:
                start = nxt
                continue
            if nxt >= len(be) or be[nxt, 0] != be[i, 1]:
                raise MeshError(f"boundary edge {i} is not followed by a connected edge")


def generate_disk(R: float, level: int, base_rings: int = 1) -> TriangleMesh:
    """Concentric-ring triangulation of the disk of radius ``R``.

    Ring ``k`` (``k = 1 .. n``, ``n = base_rings * 2**level``) has radius
    ``R k / n`` and ``6 k`` equally spaced vertices; each of the six
    sectors of the annulus between rings ``k - 1`` and ``k`` is zipped with
    ``2 k - 1`` triangles.  Boundary vertices lie on the circle.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if level < 0 or base_rings < 1:
        raise ValueError("level must be >= 0 and base_rings >= 1")
    n = base_rings * 2**level
    pts = [np.zeros((1, 2))]
    offsets = [0]
    count = 1
    for k in range(1, n + 1):
        theta = 2.0 * np.pi * np.arange(6 * k) / (6 * k)
        r = R * k / n
        ring = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        if k == n:
            ring *= R / np.linalg.norm(ring, axis=1)[:, None]
        pts.append(ring)
        offsets.append(count)
        count += 6 * k
    verts = np.concatenate(pts)

    def ring_index(k, j):
        if k == 0:
            return 0
        return offsets[k] + (j % (6 * k))

    tris = []
    for k in range(1, n + 1):
        for s in range(6):
            inner = [ring_index(k - 1, (k - 1) * s + i) for i in range(k)]
            outer = [ring_index(k, k * s + i) for i in range(k + 1)]
            for i in range(k):
                tris.append((inner[i], outer[i], outer[i + 1]))
            for i in range(k - 1):
                tris.append((inner[i], outer[i + 1], inner[i + 1]))
    tris = np.array(tris, dtype=np.int64)
    bnd = np.array(
        [(ring_index(n, j), ring_index(n, j + 1)) for j in range(6 * n)], dtype=np.int64
    )
    return TriangleMesh(verts, tris, bnd, circle_radius=float(R))


def generate_lshape(level: int) -> TriangleMesh:
    """Uniform triangulation of the L-shape with corners :data:`LSHAPE_CORNERS`.

    Squares of side ``2**-level`` are each split into two triangles along
    the same diagonal.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    m = 2**level
    h = 1.0 / m
    nx, ny = 4 * m, 4 * m  # grid over [-3, 1] x [-1, 3]
    x0, y0 = -3.0, -1.0

    def inside(cx, cy):
        return (-1 < cx < 1 and -1 < cy < 3) or (-3 < cx < 1 and 1 < cy < 3)

    cells = [
        (i, j)
        for j in range(ny)
        for i in range(nx)
        if inside(x0 + (i + 0.5) * h, y0 + (j + 0.5) * h)
    ]
    index = {}
    verts = []

    def vid(i, j):
        key = (i, j)
        if key not in index:
            index[key] = len(verts)
            verts.append((x0 + i * h, y0 + j * h))
        return index[key]

    tris = []
    for i, j in cells:
        a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
        tris.append((a, b, c))
        tris.append((a, c, d))
    tris = np.array(tris, dtype=np.int64)
    return TriangleMesh(np.array(verts), tris, boundary_loop_from_triangles(tris))


def refine_uniform(m: TriangleMesh) -> TriangleMesh:
    """Red refinement: every triangle is split into four.

    New vertices are edge midpoints, numbered after the old vertices in the
    order of :meth:`TriangleMesh.edges`.  For disk meshes the boundary
    midpoints are projected onto the circle.
    """
    edges = m.edges()
    nv = m.n_vertices
    lookup = {(int(a), int(b)): nv + k for k, (a, b) in enumerate(edges)}

    def mid(a, b):
        return lookup[(a, b) if a < b else (b, a)]

    midpoints = 0.5 * (m.vertices[edges[:, 0]] + m.vertices[edges[:, 1]])
    verts = np.concatenate([m.vertices, midpoints])
    tris = []
    for a, b, c in m.triangles.tolist():
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    bnd = []
    for a, b in m.boundary_edges.tolist():
        ab = mid(a, b)
        bnd.extend([(a, ab), (ab, b)])
    bnd = np.array(bnd, dtype=np.int64)
    if m.circle_radius is not None:
        new_b = bnd[1::2, 0]
        verts[new_b] *= m.circle_radius / np.linalg.norm(verts[new_b], axis=1)[:, None]
    return TriangleMesh(verts, np.array(tris, dtype=np.int64), bnd, m.circle_radius)


def save_mesh(mesh: TriangleMesh, path) -> None:
    """Write the plain-text mesh format (0-based indices, 17 significant digits)."""
    lines = [f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_boundary_edges}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines += [f"{i} {j}" for i, j in mesh.boundary_edges]
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh to {os.fspath(path)}: {exc}") from exc


def load_mesh(path, circle_radius: Optional[float] = None) -> TriangleMesh:
    """Read a mesh written by :func:`save_mesh` and validate it.

    Raises
    ------
    MeshFormatError
        On malformed content, with the offending line number.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise MeshFormatError("empty file", path, 1)

    def parse(lineno, conv, width):
        if lineno > len(raw):
            raise MeshFormatError("unexpected end of file", path, lineno)
        parts = raw[lineno - 1].split()
        if len(parts) != width:
            raise MeshFormatError(f"expected {width} fields, got {len(parts)}", path, lineno)
        try:
            return [conv(p) for p in parts]
        except ValueError as exc:
            raise MeshFormatError(str(exc), path, lineno) from None

    nv, nt, nb = parse(1, int, 3)
    if min(nv, nt, nb) < 0:
        raise MeshFormatError("negative count", path, 1)
    line = 2
    verts = []
    for _ in range(nv):
        verts.append(parse(line, float, 2))
        line += 1
    tris = []
    for _ in range(nt):
        t = parse(line, int, 3)
        if min(t) < 0 or max(t) >= nv:
            raise MeshFormatError("vertex index out of range", path, line)
        tris.append(t)
        line += 1
    bnd = []
    for _ in range(nb):
        e = parse(line, int, 2)
        if min(e) < 0 or max(e) >= nv:
            raise MeshFormatError("vertex index out of range", path, line)
        bnd.append(e)
        line += 1
    extra = [k for k in range(line, len(raw) + 1) if raw[k - 1].strip()]
    if extra:
        raise MeshFormatError("trailing content", path, extra[0])
    mesh = TriangleMesh(
        np.array(verts, dtype=float).reshape(-1, 2),
        np.array(tris, dtype=np.int64).reshape(-1, 3),
        np.array(bnd, dtype=np.int64).reshape(-1, 2),
        circle_radius,
    )
    try:
        mesh.validate()
    except MeshError as exc:
        raise MeshFormatError(f"invalid mesh: {exc}", path) from exc
    return mesh
