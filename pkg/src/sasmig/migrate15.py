"""Two-step splitting migration of the 15-degree one-way equation.

Time is normalised by ``c_ref / 2`` and reversed, and traces are resampled
so that one normalised step equals the range pitch ``dz``.  Each step
shifts the time-derivative field one row down (injecting the boundary
derivative at row 0) and then runs one implicit cross-range solve per
active row.  Only rows ``j < min(n + 1, M)`` are active at step ``n``; all
other rows are left bit-identical.

This module also hosts the pieces shared with the wide-angle scheme:
boundary preparation, the per-run :class:`StepPlan`, and output sampling.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigurationError, InvalidArgumentError, NumericalError
from .forward import beam_width
from .grid import Field2D, Grid2D, MigrationConfig, SasRecord
from .tridiag import solve_rows

__all__ = [
    "MigrationState",
    "StepPlan",
    "make_plan",
    "prepare_boundary",
    "alg1_step",
    "migrate_alg1",
    "default_focus_rows",
    "reference_speed",
]


@dataclass
class MigrationState:
    """Working fields ``u`` (wavefield) and ``v`` (its time derivative).

    Arrays are ``(nz, nx)``.  Steps take ownership of the arrays and update
    them in place; copy a state first if you need to keep it.
    """

    grid: Grid2D
    u: np.ndarray
    v: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, grid: Grid2D) -> "MigrationState":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape), 0)

    def copy(self) -> "MigrationState":
        return MigrationState(self.grid, self.u.copy(), self.v.copy(), self.n)

    def image(self) -> Field2D:
        return Field2D(self.grid, self.u)


@dataclass(frozen=True)
class StepPlan:
    """Per-run constants of the discrete scheme.

    ``dt`` is the normalised step (equal to ``dz``).  ``gamma_u`` holds the
    per-row weight of the solve paired with the transported field (``c~^2/2``
    in the 15-degree scheme, ``alpha c~^2`` in the wide-angle one) and
    ``gamma_v`` the weight of the wide-angle ``beta`` solve.  ``shift`` is
    ``None`` for an exact one-row shift, else the per-row fractional shift.
    """

    grid: Grid2D
    dt: float
    gamma_u: np.ndarray
    gamma_v: np.ndarray | None
    focus_rows: int
    shift: np.ndarray | None = None

    def active_rows(self, n: int) -> int:
        return min(n + 1, self.focus_rows, self.grid.nz)


def reference_speed(record: SasRecord, config: MigrationConfig) -> float:
    """Normalising speed: the record's ``c`` or the fastest layer."""
    if config.c_profile is None:
        return record.c
    if config.layered:
        return max(c for _, c in config.c_profile)
    return float(config.c_profile)


def default_focus_rows(
    frequency: float,
    aperture: float,
    c: float,
    z_max: float,
    dx: float,
    nz: int,
    alpha_w: float = 1.0,
) -> int:
    """Cross-range pixels spanned by half the beam at depth ``z_max``.

    ``ceil(tan(theta / 2) * z_max / dx)`` clamped to ``[1, nz]``.
    """
    theta = beam_width(frequency, aperture, c, alpha_w)
    m = math.ceil(math.tan(0.5 * theta) * z_max / dx)
    return int(min(max(m, 1), nz))


def _computation_grid(record: SasRecord, config: MigrationConfig) -> Grid2D:
    out = config.output_grid
    z_last = out.z0 + (out.nz - 1) * out.dz
    if z_last < 0:
        raise ConfigurationError("output grid lies entirely above the sonar path")
    nz = int(math.ceil(z_last / config.dz - 1e-9)) + 1
    if record.n_traces < 2:
        raise InvalidArgumentError("migration needs at least two traces", field="n_traces")
    return Grid2D(record.n_traces, nz, record.dx_track, config.dz, 0.0, 0.0)


def _same_rows(out: Grid2D, dz: float) -> bool:
    return out.z0 == 0.0 and out.dz == dz


def _resample(record: SasRecord, times: np.ndarray) -> np.ndarray:
    """Linear interpolation of every trace at ``times``; zero outside the record."""
    pos = (times - record.t0) / record.dt
    ns = record.n_samples
    inside = (pos >= 0) & (pos <= ns - 1)
    k = np.clip(np.floor(pos).astype(np.int64), 0, max(ns - 2, 0))
    w = pos - k
    d = record.data
    if ns == 1:
        out = np.repeat(d[:, :1], times.size, axis=1) * (pos == 0)
    else:
        out = d[:, k] * (1.0 - w) + d[:, k + 1] * w
    out[:, ~inside] = 0.0
    return out


def prepare_boundary(record: SasRecord, config: MigrationConfig) -> np.ndarray:
    """Boundary derivative sequence, shape ``(N_t, n_traces)``.

    Row ``n`` is ``(S(t_{N_t - n}) - S(t_{N_t - n - 1})) / dz`` where
    ``t_m = 2 m dz / c_ref``: the reversed traces, differenced in normalised
    time.
    """
    c_ref = reference_speed(record, config)
    dt_phys = 2.0 * config.dz / c_ref
    t_last = record.t0 + (record.n_samples - 1) * record.dt
    n_t = int(math.ceil(t_last / dt_phys - 1e-9))
    if n_t < 2:
        raise InvalidArgumentError(
            f"record spans {n_t} normalised step(s); at least 2 are needed", field="n_samples")
    s = _resample(record, dt_phys * np.arange(n_t + 1))
    return np.ascontiguousarray(((s[:, 1:] - s[:, :-1]) / config.dz)[:, ::-1].T)


def make_plan(record: SasRecord, config: MigrationConfig, grid: Grid2D | None = None) -> StepPlan:
    grid = _computation_grid(record, config) if grid is None else grid
    c_ref = reference_speed(record, config)
    ctilde2 = (grid.dz / grid.dx) ** 2
    ratio = config.speed_at(grid.z, record.c) / c_ref
    shift = ratio.copy() if config.layered else None
    m = grid.nz if config.focus_rows is None else min(config.focus_rows, grid.nz)
    if config.wide:
        gamma_u = config.alpha * ctilde2 * ratio**2
        gamma_v = config.beta * ctilde2 * ratio**2
    else:
        gamma_u = 0.5 * ctilde2 * ratio**2
        gamma_v = None
    return StepPlan(grid, grid.dz, gamma_u, gamma_v, m, shift)


def _shift_down(field: np.ndarray, inject: np.ndarray, rows: int, shift: np.ndarray | None) -> np.ndarray:
    """Rows ``0..rows-1`` of ``field`` moved one step deeper, ``inject`` entering row 0."""
    out = np.empty((rows, field.shape[1]))
    if shift is None:
        out[0] = inject
        out[1:] = field[: rows - 1]
    else:
        s = shift[:rows, None]
        out[0] = s[0] * inject + (1.0 - s[0]) * field[0]
        out[1:] = s[1:] * field[: rows - 1] + (1.0 - s[1:]) * field[1:rows]
    return out


def _check_finite(block: np.ndarray, step: int, what: str) -> None:
    if not np.all(np.isfinite(block)):
        bad = np.argwhere(~np.isfinite(block))[0]
        raise NumericalError(
            f"non-finite {what} at step {step}, row {int(bad[0])}",
            {"step": step, "row": int(bad[0]), "column": int(bad[1]), "field": what},
        )


def alg1_step(state: MigrationState, boundary, plan: StepPlan) -> MigrationState:
    """Advance one normalised time step of the 15-degree scheme (in place)."""
    b = np.asarray(boundary, dtype=np.float64)
    if b.shape != (state.grid.nx,):
        raise InvalidArgumentError(f"boundary has shape {b.shape}, expected ({state.grid.nx},)", field="boundary")
    rows = plan.active_rows(state.n)
    u, v = state.u, state.v
    vhat = _shift_down(v, b, rows, plan.shift)
    u_old = u[:rows]
    u_new = solve_rows(u_old + plan.dt * vhat, plan.gamma_u[:rows])
    _check_finite(u_new, state.n, "u")
    v[:rows] = (u_new - u_old) / plan.dt
    u[:rows] = u_new
    state.n += 1
    return state


def _warn_short(n_t: int, plan: StepPlan) -> None:
    if n_t < plan.focus_rows:
        warnings.warn(
            f"record spans {n_t} steps but M = {plan.focus_rows}; rows at or below {n_t} never focus",
            RuntimeWarning,
            stacklevel=3,
        )


def sample_output(values: np.ndarray, grid: Grid2D, out: Grid2D) -> np.ndarray:
    """Place a computation-grid image on the requested output grid."""
    if out.nx == grid.nx and out.dx == grid.dx and out.x0 == grid.x0 and _same_rows(out, grid.dz):
        return values[: out.nz].copy()
    interp = RegularGridInterpolator((grid.z, grid.x), values, bounds_error=False, fill_value=0.0)
    zz, xx = np.meshgrid(out.z, out.x, indexing="ij")
    return interp(np.stack([zz.ravel(), xx.ravel()], axis=1)).reshape(out.shape)


def migrate_alg1(record: SasRecord, config: MigrationConfig) -> Field2D:
    if config.variant != "15":
        raise ConfigurationError(f"migrate_alg1 runs the 15-degree scheme, got variant {config.variant!r}")
    bnd = prepare_boundary(record, config)
    plan = make_plan(record, config)
    _warn_short(bnd.shape[0], plan)
    state = MigrationState.zeros(plan.grid)
    for row in bnd:
        state = alg1_step(state, row, plan)
    return Field2D(config.output_grid, sample_output(state.u, plan.grid, config.output_grid))
