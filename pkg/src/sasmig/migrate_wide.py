"""Three-step splitting migration of the wide-angle (rational) one-way equation.

The state carries the transported field ``F``, the wavefield ``u`` and the
remainder ``vt = v - F``.  One step is

1. shift ``F`` one row down, injecting ``boundary - vt[0]`` at row 0;
2. ``u_hat = (I + alpha c~^2 H)^{-1} (u + dt F_hat)``, ``F = (u_hat - u) / dt``;
3. ``u = (I + beta c~^2 H)^{-1} (u_hat + dt vt)``, ``vt = (u - u_hat) / dt``;

on the active rows only.  Step 2 integrates ``u_t = F, F_t = alpha u_xx`` and
step 3 integrates ``u_t = vt, vt_t = beta u_xx``, so with ``beta = 0`` the
remainder stays zero and the scheme is the 15-degree one with ``c~^2/2``
replaced by ``alpha c~^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidArgumentError
from .grid import Field2D, Grid2D, MigrationConfig, SasRecord
from .migrate15 import (
    StepPlan,
    migrate_alg1,
    _check_finite,
    _shift_down,
    _warn_short,
    make_plan,
    prepare_boundary,
    sample_output,
)
from .tridiag import solve_rows

__all__ = ["WideState", "alg2_step", "migrate_alg2", "migrate"]


@dataclass
class WideState:
    """``F``, ``u`` and ``vt`` as ``(nz, nx)`` arrays, updated in place by steps."""

    grid: Grid2D
    F: np.ndarray
    u: np.ndarray
    vt: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, grid: Grid2D) -> "WideState":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape), np.zeros(grid.shape), 0)

    def copy(self) -> "WideState":
        return WideState(self.grid, self.F.copy(), self.u.copy(), self.vt.copy(), self.n)

    @property
    def v(self) -> np.ndarray:
        return self.vt + self.F

    def image(self) -> Field2D:
        return Field2D(self.grid, self.u)


def alg2_step(state: WideState, boundary, plan: StepPlan) -> WideState:
    """Advance one normalised step of the wide-angle scheme (in place).

    ``plan.gamma_u`` is the per-row ``alpha c~^2`` and ``plan.gamma_v`` the
    per-row ``beta c~^2``.
    """
    if plan.gamma_v is None:
        raise ConfigurationError("alg2_step needs a wide-angle plan (beta weights missing)")
    b = np.asarray(boundary, dtype=np.float64)
    if b.shape != (state.grid.nx,):
        raise InvalidArgumentError(f"boundary has shape {b.shape}, expected ({state.grid.nx},)", field="boundary")
    rows = plan.active_rows(state.n)
    F, u, vt = state.F, state.u, state.vt
    dt = plan.dt

    F_hat = _shift_down(F, b - vt[0], rows, plan.shift)
    u_old = u[:rows]
    u_hat = solve_rows(u_old + dt * F_hat, plan.gamma_u[:rows])
    _check_finite(u_hat, state.n, "u_hat")
    F[:rows] = (u_hat - u_old) / dt

    u_new = solve_rows(u_hat + dt * vt[:rows], plan.gamma_v[:rows])
    _check_finite(u_new, state.n, "u")
    vt[:rows] = (u_new - u_hat) / dt
    u[:rows] = u_new
    state.n += 1
    return state


def migrate_alg2(record: SasRecord, config: MigrationConfig) -> Field2D:
    if not config.wide:
        raise ConfigurationError("migrate_alg2 needs variant 45, 65 or custom")
    bnd = prepare_boundary(record, config)
    plan = make_plan(record, config)
    _warn_short(bnd.shape[0], plan)
    state = WideState.zeros(plan.grid)
    for row in bnd:
        state = alg2_step(state, row, plan)
    return Field2D(config.output_grid, sample_output(state.u, plan.grid, config.output_grid))


def migrate(record: SasRecord, config: MigrationConfig) -> Field2D:
    """Run whichever scheme ``config.variant`` calls for."""
    return migrate_alg2(record, config) if config.wide else migrate_alg1(record, config)
