import warnings

import numpy as np
import pytest

from cqwave import genfun as gf
from cqwave.mesh import generate_disk, generate_lshape
from cqwave.reference import GaussianPulse, IncidentField, initial_disk_data
from cqwave.stepper import (
    CFLWarning,
    NumericalFailure,
    ProblemData,
    initialize,
    monolithic_step,
    run,
    step,
)


def disk_data():
    u0, g0, l0, gl0 = initial_disk_data()
    return ProblemData(u0=u0, grad_u0=g0, lap_u0=l0, grad_lap_u0=gl0)


@pytest.fixture(scope="module")
def small_disk():
    return initialize(generate_disk(3.0, 1, 2), None, disk_data(), gf.bdf2(), 1.5)


def test_setup_shapes(small_disk):
    sys_, state = small_disk
    assert sys_.weights.weights.shape == (sys_.N + 1, sys_.M2 + sys_.M3, sys_.M2 + sys_.M3)
    assert sys_.N * sys_.dt == pytest.approx(1.5)
    assert state.n == 1 and len(state.energies) == 1


def test_schur_matches_monolithic():
    sys_, state = initialize(generate_disk(3.0, 1, 2), None, disk_data(), gf.ttr(), 1.5)
    for _ in range(4):
        u_ref, phi_ref, psi_ref = monolithic_step(sys_, state)
        step(sys_, state)
        x = state.x_hist[state.n - 1]
        assert np.linalg.norm(state.u_curr - u_ref) <= 1e-10 * np.linalg.norm(u_ref)
        xr = np.concatenate([phi_ref, psi_ref])
        assert np.linalg.norm(x - xr) <= 1e-10 * max(np.linalg.norm(xr), 1e-300)


def test_energy_identity_and_passivity():
    sys_, state = initialize(generate_disk(3.0, 1, 2), None, disk_data(), gf.bdf2(), 3.0)
    traj = run(sys_, state)
    assert traj.relative_identity_error() < 1e-9
    # the boundary absorbs: energy never exceeds its initial value
    assert traj.energies.max() <= traj.energies[0] * (1 + 1e-9)
    assert traj.energies[-1] < 0.5 * traj.energies[0]
    assert traj.u.shape == (sys_.N + 1, sys_.ops.n)
    assert not traj.stopped_early


def test_zero_data_gives_zero_solution():
    sys_, state = initialize(generate_disk(1.0, 1), None, ProblemData(), gf.bdf2(), 0.5)
    traj = run(sys_, state)
    assert np.all(traj.u == 0.0)


def test_cfl_violation_warns_and_grows():
    mesh = generate_disk(3.0, 1, 2)
    sys0, _ = initialize(mesh, None, disk_data(), gf.bdf2(), 1.0)
    with pytest.warns(CFLWarning):
        sys_, state = initialize(
            mesh, None, disk_data(), gf.bdf2(), 40.0, dt=1.5 * sys0.dt
        )
    traj = run(sys_, state, max_energy_ratio=1e6)
    assert traj.stopped_early
    assert abs(traj.energies[-1]) > 1e6 * abs(traj.energies[0])


def test_precomputed_weights_are_reused(small_disk):
    sys_, _ = small_disk
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sys2, state2 = initialize(
            generate_disk(3.0, 1, 2), None, disk_data(), gf.bdf2(), 1.5, weights=sys_.weights
        )
    assert sys2.weights is sys_.weights


def test_too_few_weights_rejected(small_disk):
    sys_, _ = small_disk
    with pytest.raises(ValueError):
        initialize(generate_disk(3.0, 1, 2), None, disk_data(), gf.bdf2(), 1.5, dt=sys_.dt / 3, weights=sys_.weights)


def test_step_index_checked(small_disk):
    sys_, state = initialize(generate_disk(1.0, 1), None, ProblemData(), gf.bdf2(), 0.3)
    state.n = sys_.N
    with pytest.raises(IndexError):
        step(sys_, state)


def test_invalid_horizon():
    with pytest.raises(ValueError):
        initialize(generate_disk(1.0, 1), None, ProblemData(), gf.bdf2(), 0.0)


def test_non_finite_state_raises():
    sys_, state = initialize(generate_disk(1.0, 1), None, ProblemData(), gf.bdf2(), 0.5)
    state.u_curr = state.u_curr + np.nan
    with pytest.raises(NumericalFailure):
        step(sys_, state)


def _plane_wave_runs(level, analytic):
    # enters at x = -3 after t = 0.5, so zero initial data is exact
    inc = IncidentField.plane_wave((1.0, 0.0), 3.5, GaussianPulse(4.0))
    mesh = generate_lshape(level)
    sys_, state = initialize(mesh, None, ProblemData(incident=inc, analytic_dt_beta0=analytic), gf.bdf2(), 3.0)
    traj = run(sys_, state)
    exact = np.array([inc.evaluate(mesh.vertices, t)[0] for t in traj.times])
    return traj, exact


def test_plane_wave_transparent_and_dt_beta0_variants():
    err, gap = [], []
    for level in (1, 2):
        a, exact = _plane_wave_runs(level, True)
        b, _ = _plane_wave_runs(level, False)
        assert np.all(a.u[a.times <= 0.5] == 0.0)
        err.append(np.abs(a.u - exact).max())
        gap.append(np.abs(a.u - b.u).max())
    # unit speed everywhere: the total field is the incident wave
    assert err[1] < 0.05 and err[0] / err[1] > 3.0
    # analytic and discrete time derivative of the trace differ by O(dt^2)
    assert gap[0] / gap[1] > 3.5


def test_point_sources_silent_before_arrival():
    mesh = generate_lshape(1)
    inc = IncidentField.point_sources([[-1.5, 5.0]], [0.0], GaussianPulse(20.0))
    sys_, state = initialize(mesh, None, ProblemData(incident=inc), gf.bdf2(), 3.0)
    traj = run(sys_, state)
    arrival = 2.0  # distance from the source to the top edge y = 3
    assert np.all(traj.u[traj.times <= arrival] == 0.0)
    assert np.abs(traj.u).max() > 0.0
