"""Experiment drivers behind the command-line interface."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import genfun as gf
from .config import ExperimentConfig
from .cq import ContourParams, convolve, discrete_derivative, scalar_weights
from .fem import CoefficientField, assemble_interior, cfl_timestep, elliptic_projection
from .mesh import generate_disk, generate_lshape
from .reference import (
    DiskReference,
    GaussianPulse,
    IncidentField,
    energy_error,
    initial_disk_data,
    lshape_sources,
)
from .stepper import CFLWarning, ProblemData, initialize, run

__all__ = [
    "write_csv",
    "write_snapshot",
    "disk_problem",
    "disk_level_error",
    "run_convergence_disk",
    "run_lshape_focus",
    "run_cq_selftest",
    "run_design_ttr",
    "run_stability_region",
    "lshape_speed",
    "LShapeResult",
]

logger = logging.getLogger(__name__)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "FAIL"
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> Path:
    """Write a CSV file with ``# comment`` lines first; floats use 17 significant digits."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_snapshot(path, vertices, values) -> Path:
    """Plain-text nodal grid: ``index x y value`` per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for i, ((x, y), v) in enumerate(zip(vertices, values)):
            fh.write(f"{i} {x:.17g} {y:.17g} {v:.17g}\n")
    return path


# -- disk convergence ------------------------------------------------------


def disk_problem() -> ProblemData:
    u0, g0, l0, gl0 = initial_disk_data()
    return ProblemData(u0=u0, grad_u0=g0, lap_u0=l0, grad_lap_u0=gl0)


@dataclass
class DiskLevelResult:
    level: int
    h: float
    dt: float
    N: int
    error: float
    max_energy_ratio: float
    identity_error: float
    warnings: list


def disk_level_error(
    level: int,
    method: str,
    T: float,
    base_rings: int = 4,
    radius: float = 3.0,
    quadrature=None,
) -> DiskLevelResult:
    """Run the disk problem on one level and measure the energy error."""
    mesh = generate_disk(radius, level, base_rings)
    g = gf.from_name(method)
    data = disk_problem()
    if T == 0:
        ops = assemble_interior(mesh)
        _, dt = cfl_timestep(ops)
        u0h = elliptic_projection(ops, data.u0, data.grad_u0)
        e = u0h - data.u0(mesh.vertices)
        err = float(np.sqrt(max(e @ (ops.K @ e), 0.0)))
        return DiskLevelResult(level, mesh.h, dt, 0, err, 1.0, 0.0, [])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CFLWarning)
        sys_, state = initialize(mesh, None, data, g, T, quadrature=quadrature)
        traj = run(sys_, state)
    ref = DiskReference(mesh.vertices, T)
    exact = np.array([ref(t) for t in traj.times])
    err = energy_error(traj.u, exact, sys_.ops, sys_.dt)
    ratio = float(np.max(traj.energies) / traj.energies[0])
    return DiskLevelResult(
        level, mesh.h, sys_.dt, sys_.N, err, ratio, traj.relative_identity_error(), [str(w.message) for w in caught]
    )


def observed_orders(errors, dts):
    """``log(e_{k-1} / e_k) / log(dt_{k-1} / dt_k)``; NaN for the first level and equal steps."""
    out = [float("nan")]
    for k in range(1, len(errors)):
        if dts[k - 1] == dts[k]:
            out.append(float("nan"))
            continue
        out.append(math.log(errors[k - 1] / errors[k]) / math.log(dts[k - 1] / dts[k]))
    return out


def run_convergence_disk(cfg: ExperimentConfig, write: bool = True):
    """Energy error per level and observed order; CSV ``convergence_disk_<method>.csv``."""
    results = [
        disk_level_error(l, cfg.method, cfg.T, cfg.base_rings, cfg.radius, cfg.quadrature_options())
        for l in sorted(cfg.levels)
    ]
    orders = observed_orders([r.error for r in results], [r.dt for r in results]) if cfg.T > 0 else [float("nan")] * len(results)
    rows = [(r.level, r.h, r.dt, r.error, o) for r, o in zip(results, orders)]
    comments = [f"method={cfg.method} T={cfg.T!r} base_rings={cfg.base_rings} radius={cfg.radius!r}"]
    for r in results:
        comments += [f"level {r.level}: {w}" for w in r.warnings]
    if write:
        write_csv(
            Path(cfg.output_dir) / f"convergence_disk_{cfg.method}.csv",
            ["level", "h", "dt", "energy_error", "observed_order"],
            rows,
            comments,
        )
    return rows


# -- L-shape focusing ------------------------------------------------------


FAST_BOX = ((-2.5, 1.0), (1.5, 2.5))


def lshape_speed(variable: bool = True):
    """Wave speed 2 in the box ``(-2.5, 1) x (1.5, 2.5)`` and 1 elsewhere."""
    (x0, x1), (y0, y1) = FAST_BOX

    def c(p):
        p = np.asarray(p)
        inside = (p[:, 0] > x0) & (p[:, 0] < x1) & (p[:, 1] > y0) & (p[:, 1] < y1)
        return np.where(inside & variable, 2.0, 1.0)

    return CoefficientField(c)


@dataclass
class LShapeResult:
    times: np.ndarray
    energies: np.ndarray
    peak_value: float
    peak_point: np.ndarray
    peak_time: float
    focus: np.ndarray
    first_arrival: float
    max_before_arrival: float
    stopped_early: bool

    @property
    def peak_distance(self) -> float:
        return float(np.linalg.norm(self.peak_point - self.focus))


def run_lshape_focus(cfg: ExperimentConfig, write: bool = True) -> LShapeResult:
    focus = np.array([-1.5, 2.0])
    mesh = generate_lshape(cfg.lshape_level)
    src, delays = lshape_sources(focus, cfg.source_radius, cfg.n_sources, t_focus=cfg.t_focus)
    incident = IncidentField.point_sources(src, delays, GaussianPulse(cfg.pulse_a))
    incident.check_outside(mesh.vertices[mesh.boundary_vertices])
    data = ProblemData(incident=incident)
    coeffs = lshape_speed(cfg.variable_speed)
    g = gf.from_name(cfg.method)
    sys_, state = initialize(mesh, coeffs, data, g, cfg.lshape_T, quadrature=cfg.quadrature_options())
    traj = run(sys_, state, max_energy_ratio=cfg.max_energy_ratio)

    bpts = mesh.vertices[mesh.boundary_vertices]
    dist = np.min(np.linalg.norm(bpts[:, None, :] - src[None, :, :], axis=2))
    first_arrival = float(dist + delays.min())
    before = traj.times < first_arrival
    max_before = float(np.abs(traj.u[before]).max()) if np.any(before) else 0.0
    amp = np.abs(traj.u)
    n_pk, v_pk = np.unravel_index(np.argmax(amp), amp.shape)
    result = LShapeResult(
        traj.times,
        traj.energies,
        float(traj.u[n_pk, v_pk]),
        mesh.vertices[v_pk].copy(),
        float(traj.times[n_pk]),
        focus,
        first_arrival,
        max_before,
        traj.stopped_early,
    )
    if write:
        out = Path(cfg.output_dir)
        write_csv(
            out / f"lshape_energy_{cfg.method}.csv",
            ["n", "t", "energy"],
            [(n + 1, (n + 1) * sys_.dt, e) for n, e in enumerate(traj.energies)],
            [f"method={cfg.method} level={cfg.lshape_level} dt={sys_.dt!r} N={sys_.N}"],
        )
        for ts in cfg.snapshot_times:
            n = int(round(ts / sys_.dt))
            if 0 <= n < len(traj.u):
                write_snapshot(out / f"lshape_{cfg.method}_t{n * sys_.dt:.4f}.txt", mesh.vertices, traj.u[n])
        write_csv(
            out / f"lshape_summary_{cfg.method}.csv",
            ["quantity", "value"],
            [
                ("peak_value", result.peak_value),
                ("peak_x", result.peak_point[0]),
                ("peak_y", result.peak_point[1]),
                ("peak_time", result.peak_time),
                ("peak_distance_to_focus", result.peak_distance),
                ("first_arrival", result.first_arrival),
                ("max_before_arrival", result.max_before_arrival),
                ("max_energy", float(np.max(traj.energies))),
            ],
        )
    return result


# -- CQ self test ----------------------------------------------------------


def run_cq_selftest(cfg: ExperimentConfig, write: bool = True, echo: bool = False):
    """Scalar CQ checks; rows ``(check, method, value, tolerance, passed)``."""
    N = cfg.selftest_N
    p = ContourParams(N, 1.0)
    tol = 10.0 * p.contour_error
    rows = []
    methods = {"bdf2": gf.bdf2(), "tr": gf.trapezoidal(), "ttr": gf.ttr()}

    w = scalar_weights(lambda s: s, methods["bdf2"], p)
    target = np.zeros(N + 1)
    target[:3] = (1.5, -2.0, 0.5)
    rows.append(("weights of s", "bdf2", float(np.abs(w.weights - target).max()), tol))

    for name, g in methods.items():
        one = scalar_weights(lambda s: np.ones_like(s), g, p)
        e0 = np.zeros(N + 1)
        e0[0] = 1.0
        rows.append(("weights of 1", name, float(np.abs(one.weights - e0).max()), tol))
        ws = scalar_weights(lambda s: s, g, p)
        wi = scalar_weights(lambda s: 1.0 / s, g, p)
        comp = np.convolve(ws.weights, wi.weights)[: N + 1]
        rows.append(("composition s * 1/s", name, float(np.abs(comp - e0).max()), tol))
        x = np.sin(np.arange(N + 1) * 0.1)
        rt = discrete_derivative(g, p.dt, discrete_derivative(g, p.dt, x, -1), +1)
        rows.append(("derivative round trip", name, float(np.abs(rt - x).max()), 1e-10))
        integ = convolve(wi, x)
        rec = discrete_derivative(g, p.dt, x, -1)
        rows.append(("1/s weights vs recursion", name, float(np.abs(integ - rec).max()), tol * N))

    rows = [(c, m, v, t, bool(v <= t)) for c, m, v, t in rows]
    if echo:
        for c, m, v, t, ok in rows:
            print(f"{'pass' if ok else 'FAIL'}  {c:<28s} {m:<5s} {v:.3e} <= {t:.3e}")
    if write:
        write_csv(Path(cfg.output_dir) / "cq_selftest.csv", ["check", "method", "value", "tolerance", "passed"], rows)
    return rows


# -- TTR design and stability regions ---------------------------------------


def _ttr_row(label, g):
    rep = gf.consistency_expansion(g)
    c = list(g.ttr_coeffs) + [float("nan")] * max(0, 3 - len(g.ttr_coeffs))
    return (label, *c[:3], 1.0 / rep.error_constant, rep.e4, gf.check_a_stability(g, 50_000))


def run_design_ttr(cfg: ExperimentConfig, write: bool = True):
    """Rows ``(source, c2, c3, c4, 1/|e3|, e4, min Re delta)`` for the published and designed coefficients."""
    design = gf.design_ttr(cfg.ttr_J, cfg.ttr_samples)
    rows = [_ttr_row("published", gf.ttr()), _ttr_row("designed", design.delta)]
    if write:
        write_csv(
            Path(cfg.output_dir) / "design_ttr.csv",
            ["source", "c2", "c3", "c4", "inv_abs_e3", "e4", "min_re_delta"],
            rows,
            [f"J={cfg.ttr_J} n_samples={cfg.ttr_samples} feasible={design.feasible}"],
        )
    return rows


def run_stability_region(cfg: ExperimentConfig, write: bool = True):
    """Boundary curves ``delta(exp(-i theta))`` of the three methods."""
    rows = []
    n = cfg.stability_points
    for name in ("bdf2", "tr", "ttr"):
        g = gf.from_name(name)
        z = gf.stability_region_boundary(g, n)
        theta = 2.0 * np.pi * np.arange(n) / n
        if len(z) != n:  # the trapezoidal pole at theta = pi is skipped
            theta = theta[~np.isclose(theta, np.pi)]
        rows += [(name, k, float(th), float(v.real), float(v.imag)) for k, (th, v) in enumerate(zip(theta, z))]
    if write:
        write_csv(Path(cfg.output_dir) / "stability_region.csv", ["method", "k", "theta", "re", "im"], rows)
    return rows
