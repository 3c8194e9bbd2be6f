import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import DX, point_record
from sasmig import (
    ConfigurationError,
    InvalidArgumentError,
    MigrationConfig,
    MigrationState,
    NumericalError,
    SasRecord,
    alg1_step,
    backproject,
    make_grid,
    migrate_alg1,
    prepare_boundary,
    psf_metrics,
)
from sasmig.migrate15 import StepPlan, default_focus_rows, make_plan


def dense_shifted(n, gamma):
    H = np.diag(np.full(n, 2.0)) - np.eye(n, k=1) - np.eye(n, k=-1)
    H[0, 0] = H[-1, -1] = 1.0
    return np.eye(n) + gamma * H


def dense_alg1_step(u, v, b, n, M, gamma, dt):
    """Reference step written straight from the scheme with dense inverses."""
    nz, nx = u.shape
    u, v = u.copy(), v.copy()
    active = min(n + 1, M, nz)
    vhat = np.vstack([b[None, :], v[:-1]])
    Ainv = np.linalg.inv(dense_shifted(nx, gamma))
    for j in range(active):
        un = Ainv @ (u[j] + dt * vhat[j])
        v[j] = (un - u[j]) / dt
        u[j] = un
    return u, v


def plan_for(grid, M=None, gamma=None):
    g = 0.5 * (grid.dz / grid.dx) ** 2 if gamma is None else gamma
    return StepPlan(grid, grid.dz, np.full(grid.nz, g), None, grid.nz if M is None else M)


@pytest.mark.parametrize("n,M", [(0, 3), (1, 3), (5, 3), (5, 2), (1, 1)])
def test_step_matches_dense_oracle(rng, n, M):
    g = make_grid(4, 3, 0.5, 0.3)
    plan = plan_for(g, M)
    u, v, b = rng.standard_normal((3, 4)), rng.standard_normal((3, 4)), rng.standard_normal(4)
    ref_u, ref_v = dense_alg1_step(u, v, b, n, M, plan.gamma_u[0], plan.dt)
    st_ = alg1_step(MigrationState(g, u.copy(), v.copy(), n), b, plan)
    np.testing.assert_allclose(st_.u, ref_u, rtol=0, atol=1e-12)
    np.testing.assert_allclose(st_.v, ref_v, rtol=0, atol=1e-12)
    assert st_.n == n + 1


def test_first_step_from_rest_touches_row_zero_only():
    g = make_grid(4, 3, 0.5, 0.3)
    plan = plan_for(g)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        s = alg1_step(MigrationState.zeros(g), e, plan)
        assert not s.u[1:].any() and not s.v[1:].any()
        # recover the transported value: (I + gamma H) u_new = dt * vhat
        vhat = dense_shifted(4, plan.gamma_u[0]) @ s.u[0] / plan.dt
        np.testing.assert_allclose(vhat, e, atol=1e-12)


def test_zero_in_zero_out():
    g = make_grid(5, 4, 1.0, 1.0)
    s = alg1_step(MigrationState.zeros(g), np.zeros(5), plan_for(g))
    assert not s.u.any() and not s.v.any()


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_step_linear(a, c, seed, n):
    r = np.random.default_rng(seed)
    g = make_grid(6, 5, 0.4, 0.2)
    plan = plan_for(g, M=4)
    X = [r.standard_normal((5, 6)), r.standard_normal((5, 6)), r.standard_normal(6)]
    Y = [r.standard_normal((5, 6)), r.standard_normal((5, 6)), r.standard_normal(6)]
    mix = alg1_step(MigrationState(g, a * X[0] + c * Y[0], a * X[1] + c * Y[1], n), a * X[2] + c * Y[2], plan)
    sx = alg1_step(MigrationState(g, X[0].copy(), X[1].copy(), n), X[2], plan)
    sy = alg1_step(MigrationState(g, Y[0].copy(), Y[1].copy(), n), Y[2], plan)
    np.testing.assert_allclose(mix.u, a * sx.u + c * sy.u, rtol=0, atol=1e-12 * 10)
    np.testing.assert_allclose(mix.v, a * sx.v + c * sy.v, rtol=0, atol=1e-12 * 10)


def test_frozen_rows_bit_identical(rng):
    g = make_grid(8, 10, 0.5, 0.5)
    plan = plan_for(g, M=4)
    s = MigrationState(g, rng.standard_normal((10, 8)), rng.standard_normal((10, 8)), 0)
    snapshot = s.copy()
    for n in range(7):
        before = s.copy()
        s = alg1_step(s, rng.standard_normal(8), plan)
        k = min(n + 1, 4)
        np.testing.assert_array_equal(s.u[k:], before.u[k:])
        np.testing.assert_array_equal(s.v[k:], before.v[k:])
    np.testing.assert_array_equal(s.u[4:], snapshot.u[4:])


def test_boundary_shape_checked():
    g = make_grid(5, 4, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        alg1_step(MigrationState.zeros(g), np.zeros(4), plan_for(g))


def test_nonfinite_aborts_with_diagnostics():
    g = make_grid(5, 4, 1.0, 1.0)
    b = np.zeros(5)
    b[2] = np.inf
    with pytest.raises(NumericalError) as exc:
        alg1_step(MigrationState.zeros(g), b, plan_for(g))
    assert exc.value.diagnostics["step"] == 0
    assert exc.value.diagnostics["row"] == 0


def energy1(s, dx, dz):
    du = np.diff(s.u, axis=1) / dx
    return ((du**2).sum() + 2.0 * (s.v**2).sum()) * dx * dz


@pytest.mark.parametrize("dx,dz", [(1.0, 1.0), (0.02, 0.01), (0.01, 0.02)])
def test_energy_bound(dx, dz):
    r = np.random.default_rng(7)
    g = make_grid(32, 32, dx, dz)
    plan = plan_for(g)
    for _ in range(5):
        s = MigrationState.zeros(g)
        injected = 0.0
        for b in r.standard_normal((48, 32)):
            s = alg1_step(s, b, plan)
            injected += (b**2).sum() * dx * plan.dt
        assert energy1(s, dx, dz) <= (1 + 1e-9) * injected


# boundary preparation

def _record(data, dt=2 * 0.05 / 1500.0):
    return SasRecord(np.asarray(data, dtype=float), dt=dt, dx_track=0.05, c=1500.0)


def test_boundary_of_constant_and_zero_traces():
    g = make_grid(4, 8, 0.05, 0.05)
    cfg = MigrationConfig(g)
    assert not prepare_boundary(_record(np.full((4, 20), 3.0)), cfg).any()
    assert not prepare_boundary(_record(np.zeros((4, 20))), cfg).any()


def test_boundary_of_ramp():
    g = make_grid(4, 8, 0.05, 0.05)
    # record sampled exactly at the normalised step 2 dz / c
    ramp = np.tile(np.arange(20.0), (4, 1))
    bnd = prepare_boundary(_record(ramp), MigrationConfig(g))
    assert bnd.shape == (19, 4)
    np.testing.assert_allclose(bnd, 1.0 / 0.05, rtol=1e-12)


def test_boundary_is_time_reversed():
    g = make_grid(2, 8, 0.05, 0.05)
    data = np.zeros((2, 20))
    data[:, 3] = 1.0
    bnd = prepare_boundary(_record(data), MigrationConfig(g))
    # the step into sample 3 arrives near the end of the reversed sequence
    rows = np.flatnonzero(np.abs(bnd[:, 0]) > 0)
    np.testing.assert_array_equal(rows, [19 - 4, 19 - 3])


def test_boundary_needs_two_steps():
    g = make_grid(2, 8, 0.05, 0.05)
    with pytest.raises(InvalidArgumentError):
        prepare_boundary(_record(np.zeros((2, 2))), MigrationConfig(g))


# full migration

def test_zero_record_zero_image():
    g = make_grid(16, 16, DX, DX)
    rec = SasRecord(np.zeros((16, 64)), DX / 1500.0, DX)
    assert not migrate_alg1(rec, MigrationConfig(g)).values.any()


def test_wide_variant_rejected():
    g = make_grid(16, 16, DX, DX)
    rec = SasRecord(np.zeros((16, 64)), DX / 1500.0, DX)
    with pytest.raises(ConfigurationError):
        migrate_alg1(rec, MigrationConfig(g, variant="45"))


def test_two_scatterers_focus(small_scene):
    scat, rec, grid = small_scene
    img = migrate_alg1(rec, MigrationConfig(grid))
    bp = backproject(rec, grid)
    for x, z, _ in scat:
        truth = np.array(grid.nearest_pixel(x, z))
        peak = np.array(psf_metrics(img, (x, z)).peak_pixel)
        assert np.abs(peak - truth).max() <= 1
        assert np.abs(peak - np.array(psf_metrics(bp, (x, z)).peak_pixel)).max() <= 1


def test_migration_linear_in_record(small_scene):
    _, rec, grid = small_scene
    other = point_record([(0.6, 0.3, -0.5)])
    cfg = MigrationConfig(grid)
    combo = SasRecord(2.0 * rec.data - 3.0 * other.data, rec.dt, rec.dx_track, rec.t0, rec.c)
    lhs = migrate_alg1(combo, cfg).values
    rhs = 2.0 * migrate_alg1(rec, cfg).values - 3.0 * migrate_alg1(other, cfg).values
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(rhs).max()


def test_shift_equivariance():
    grid = make_grid(64, 64, DX, DX)
    cfg = MigrationConfig(grid)
    peaks = []
    for m in (0, 7):
        x = 0.5 + m * DX
        img = migrate_alg1(point_record([(x, 0.6)]), cfg)
        peaks.append(np.array(psf_metrics(img, (x, 0.6)).peak_pixel))
    np.testing.assert_array_equal(peaks[1] - peaks[0], [7, 0])


def test_focus_rows_limit_and_warning():
    grid = make_grid(16, 16, DX, DX)
    rec = SasRecord(np.ones((16, 8)), DX / 1500.0, DX)
    with pytest.warns(RuntimeWarning, match="never focus"):
        migrate_alg1(rec, MigrationConfig(grid, focus_rows=16))


def test_uniform_layers_match_constant_speed(small_scene):
    _, rec, grid = small_scene
    a = migrate_alg1(rec, MigrationConfig(grid)).values
    b = migrate_alg1(rec, MigrationConfig(grid, c_profile=[(0.0, 1500.0), (0.7, 1500.0)])).values
    np.testing.assert_array_equal(a, b)


def test_slow_layer_delays_deep_focus():
    grid = make_grid(64, 64, DX, DX)
    z_true = 0.9
    # echo timed as if the water were slower below 0.5 m
    rec = point_record([(0.6, z_true)])
    fast = psf_metrics(migrate_alg1(rec, MigrationConfig(grid)), (0.6, z_true), radius=0.3)
    slow = MigrationConfig(grid, c_profile=[(0.0, 1500.0), (0.5, 1300.0)])
    s = psf_metrics(migrate_alg1(rec, slow), (0.6, z_true), radius=0.3)
    assert s.peak_pixel[1] < fast.peak_pixel[1]


def test_output_grid_resampling(small_scene):
    _, rec, grid = small_scene
    full = migrate_alg1(rec, MigrationConfig(grid)).values
    coarse = make_grid(32, 32, 2 * DX, 2 * DX)
    sub = migrate_alg1(rec, MigrationConfig(coarse, dz=DX)).values
    np.testing.assert_allclose(sub, full[::2, ::2], rtol=0, atol=1e-12 * np.abs(full).max())


def test_default_focus_rows():
    # half-beam 0.15625 rad, 2 m deep, 2 cm pixels
    assert default_focus_rows(120e3, 0.04, 1500.0, 2.0, 0.02, 500) == int(np.ceil(np.tan(0.15625) * 100))
    assert default_focus_rows(120e3, 0.04, 1500.0, 2.0, 0.02, 5) == 5


def test_plan_uses_c_tilde():
    grid = make_grid(8, 8, 0.04, 0.02)
    rec = SasRecord(np.zeros((8, 8)), 1e-5, 0.04)
    plan = make_plan(rec, MigrationConfig(grid))
    np.testing.assert_allclose(plan.gamma_u, 0.5 * 0.25)
    assert plan.dt == 0.02 and plan.gamma_v is None
