"""Discrete-domain types: grids, fields, SAS records and run configuration.

Conventions
-----------
The sonar path is the line ``z = 0`` and ``z`` grows away from it.
Field values are stored as ``(nz, nx)`` arrays, so the flattened C-order
buffer uses the row-major address ``i + j * nx``.  SAS data is stored as
``(n_traces, n_samples)``, trace-major.  Everything is SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidArgumentError

__all__ = [
    "Grid2D",
    "Field2D",
    "SasRecord",
    "Scatterer",
    "PulseSpec",
    "MigrationConfig",
    "EnhanceConfig",
    "make_grid",
    "as_scatterers",
    "ANGLE_VARIANTS",
]

# (alpha, beta) of the rational dispersion approximation for each named variant
ANGLE_VARIANTS: dict[str, tuple[float, float | None]] = {
    "15": (0.5, None),
    "45": (0.5, 0.25),
    "65": (0.478, 0.376),
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise InvalidArgumentError(f"{field_name}: {message}", field=field_name)


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


@dataclass(frozen=True)
class Grid2D:
    """Regular (x, z) raster; pixel ``(i, j)`` is centred at ``(x0 + i dx, z0 + j dz)``."""

    nx: int
    nz: int
    dx: float
    dz: float
    x0: float = 0.0
    z0: float = 0.0

    def __post_init__(self):
        _require(_is_int(self.nx) and self.nx >= 2, "nx", f"must be an integer >= 2, got {self.nx!r}")
        _require(_is_int(self.nz) and self.nz >= 1, "nz", f"must be an integer >= 1, got {self.nz!r}")
        for name in ("dx", "dz"):
            val = getattr(self, name)
            _require(math.isfinite(val) and val > 0, name, f"must be positive and finite, got {val!r}")
        for name in ("x0", "z0"):
            val = getattr(self, name)
            _require(math.isfinite(val), name, f"must be finite, got {val!r}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "nz", int(self.nz))
        for name in ("dx", "dz", "x0", "z0"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(nz, nx)`` of fields on this grid."""
        return (self.nz, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.nz

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def z(self) -> np.ndarray:
        return self.z0 + self.dz * np.arange(self.nz)

    def center(self, i: int, j: int) -> tuple[float, float]:
        return (self.x0 + i * self.dx, self.z0 + j * self.dz)

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.nz):
            raise InvalidArgumentError(f"pixel ({i}, {j}) outside {self.nx}x{self.nz} grid", field="index")
        return i + j * self.nx

    def unindex(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.size:
            raise InvalidArgumentError(f"address {k} outside [0, {self.size})", field="index")
        j, i = divmod(k, self.nx)
        return (i, j)

    def nearest_pixel(self, x: float, z: float) -> tuple[int, int]:
        i = int(round((x - self.x0) / self.dx))
        j = int(round((z - self.z0) / self.dz))
        return (min(max(i, 0), self.nx - 1), min(max(j, 0), self.nz - 1))


def make_grid(nx: int, nz: int, dx: float, dz: float, x0: float = 0.0, z0: float = 0.0) -> Grid2D:
    return Grid2D(nx, nz, dx, dz, x0, z0)


@dataclass(frozen=True)
class Field2D:
    """Scalar field on a :class:`Grid2D`; ``values`` has shape ``(nz, nx)``."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            _require(vals.size == self.grid.size, "values", f"length {vals.size} != nx*nz = {self.grid.size}")
            vals = vals.reshape(self.grid.shape)
        _require(vals.shape == self.grid.shape, "values", f"shape {vals.shape} != {self.grid.shape}")
        _require(bool(np.all(np.isfinite(vals))), "values", "contains non-finite entries")
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros(grid.shape))

    def flat(self) -> np.ndarray:
        """Row-major buffer, element ``i + j * nx``."""
        return self.values.ravel()

    def with_values(self, values: np.ndarray) -> "Field2D":
        return Field2D(self.grid, values)


@dataclass(frozen=True)
class SasRecord:
    """Echo data ``SAS(x_i, t0 + n dt)`` with ``x_i = i * dx_track``."""

    data: np.ndarray
    dt: float
    dx_track: float
    t0: float = 0.0
    c: float = 1500.0

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        _require(d.ndim == 2, "data", f"must be 2-D (n_traces, n_samples), got ndim={d.ndim}")
        _require(d.shape[0] >= 1, "n_traces", "must be positive")
        _require(d.shape[1] >= 1, "n_samples", "must be positive")
        _require(bool(np.all(np.isfinite(d))), "data", "contains non-finite samples")
        for name in ("dt", "dx_track", "c"):
            val = getattr(self, name)
            _require(math.isfinite(val) and val > 0, name, f"must be positive and finite, got {val!r}")
        _require(math.isfinite(self.t0), "t0", "must be finite")
        object.__setattr__(self, "data", _frozen(d))
        for name in ("dt", "dx_track", "t0", "c"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def n_traces(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.dx_track * np.arange(self.n_traces)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def header(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "n_samples": self.n_samples,
            "dt": self.dt,
            "dx_track": self.dx_track,
            "t0": self.t0,
            "c": self.c,
        }


@dataclass(frozen=True)
class Scatterer:
    x: float
    z: float
    amplitude: float = 1.0

    def __post_init__(self):
        _require(math.isfinite(self.x), "x", "must be finite")
        _require(math.isfinite(self.z) and self.z > 0, "z", f"scatterer must lie below the path (z > 0), got {self.z!r}")
        _require(math.isfinite(self.amplitude), "amplitude", "must be finite")


def as_scatterers(items: Iterable) -> tuple[Scatterer, ...]:
    """Accept ``Scatterer`` objects or ``(x, z[, amplitude])`` tuples."""
    out = []
    for it in items:
        out.append(it if isinstance(it, Scatterer) else Scatterer(*it))
    return tuple(out)


@dataclass(frozen=True)
class PulseSpec:
    """Carrier at ``frequency`` Hz under a symmetric envelope of total length ``duration`` s."""

    frequency: float
    envelope: str = "gaussian"
    duration: float = 1e-3

    def __post_init__(self):
        _require(math.isfinite(self.frequency) and self.frequency > 0, "frequency", "must be positive")
        _require(self.envelope in ("gaussian", "raised_cosine"), "envelope",
                 f"must be 'gaussian' or 'raised_cosine', got {self.envelope!r}")
        _require(math.isfinite(self.duration) and self.duration > 0, "duration", "must be positive")


Layers = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class MigrationConfig:
    """Settings shared by both migration algorithms.

    ``variant`` is one of ``"15"``, ``"45"``, ``"65"`` or ``"custom"``.  The
    named wide-angle variants always bind their tabulated ``(alpha, beta)``;
    ``"15"`` uses the two-step scheme and ignores ``beta``.

    ``c_profile`` is either a constant speed or a sequence of ``(z_top, c)``
    layers sorted by ``z_top``; ``None`` means "use the record's speed".
    ``focus_rows`` (the focusing count M) defaults to every depth row.
    """

    output_grid: Grid2D
    dz: float | None = None
    variant: str = "15"
    alpha: float | None = None
    beta: float | None = None
    focus_rows: int | None = None
    c_profile: float | Sequence[tuple[float, float]] | None = None

    def __post_init__(self):
        v = str(self.variant)
        if v.startswith("deg"):
            v = v[3:]
        if v not in ("15", "45", "65", "custom"):
            raise InvalidArgumentError(f"variant: unknown angle variant {self.variant!r}", field="variant")
        object.__setattr__(self, "variant", v)
        if v == "custom":
            if self.alpha is None or self.beta is None:
                raise InvalidArgumentError("custom variant needs both alpha and beta", field="alpha")
        else:
            alpha, beta = ANGLE_VARIANTS[v]
            object.__setattr__(self, "alpha", alpha)
            object.__setattr__(self, "beta", beta)
        _require(math.isfinite(self.alpha) and self.alpha > 0, "alpha", f"must be positive, got {self.alpha!r}")
        if self.beta is not None:
            _require(math.isfinite(self.beta) and self.beta >= 0, "beta", f"must be >= 0, got {self.beta!r}")

        dz = self.output_grid.dz if self.dz is None else self.dz
        _require(math.isfinite(dz) and dz > 0, "dz", f"must be positive, got {dz!r}")
        object.__setattr__(self, "dz", float(dz))

        if self.focus_rows is not None:
            _require(_is_int(self.focus_rows) and self.focus_rows >= 1, "M", "must be a positive integer")
            if self.focus_rows > self.output_grid.nz:
                raise ConfigurationError(
                    f"M = {self.focus_rows} exceeds the output grid depth nz = {self.output_grid.nz}")

        prof = self.c_profile
        if prof is not None and not isinstance(prof, (int, float, np.floating, np.integer)):
            layers = tuple((float(z), float(c)) for z, c in prof)
            if not layers:
                raise InvalidArgumentError("c_profile: empty layer list", field="c_profile")
            tops = [z for z, _ in layers]
            if tops != sorted(tops):
                raise InvalidArgumentError("c_profile: layers must be sorted by z_top", field="c_profile")
            for _, c in layers:
                _require(math.isfinite(c) and c > 0, "c_profile", f"speeds must be positive, got {c!r}")
            object.__setattr__(self, "c_profile", layers if len(layers) > 1 else layers[0][1])
        elif prof is not None:
            _require(math.isfinite(prof) and prof > 0, "c_profile", f"speed must be positive, got {prof!r}")
            object.__setattr__(self, "c_profile", float(prof))

    @property
    def wide(self) -> bool:
        return self.variant != "15"

    @property
    def layered(self) -> bool:
        return isinstance(self.c_profile, tuple)

    def speed_at(self, z: np.ndarray, default: float) -> np.ndarray:
        """Sound speed at depths ``z``; layers extend upward from the first ``z_top``."""
        z = np.asarray(z, dtype=np.float64)
        if self.c_profile is None:
            return np.full(z.shape, float(default))
        if not self.layered:
            return np.full(z.shape, self.c_profile)
        tops = np.array([t for t, _ in self.c_profile])
        speeds = np.array([c for _, c in self.c_profile])
        k = np.searchsorted(tops, z, side="right") - 1
        return speeds[np.clip(k, 0, len(speeds) - 1)]


@dataclass(frozen=True)
class EnhanceConfig:
    """Regularisation weight, weight-function variant and solver tolerances.

    ``variant`` is ``"gaussian"``, ``"bv"`` or ``"hybrid"`` (the latter uses
    ``delta``).
    """

    beta: float
    variant: str = "bv"
    delta: float = 0.25
    epsilon: float = 1e-8
    max_iters: int = 500
    linear_tol: float = 1e-10
    fixedpoint_tol: float = 1e-6

    def __post_init__(self):
        _require(math.isfinite(self.beta) and self.beta >= 0, "beta", f"must be >= 0, got {self.beta!r}")
        _require(self.variant in ("gaussian", "bv", "hybrid"), "variant",
                 f"must be gaussian, bv or hybrid, got {self.variant!r}")
        if self.variant == "hybrid":
            _require(0 < self.delta < 1, "delta", f"must lie in (0, 1), got {self.delta!r}")
        _require(self.epsilon > 0, "epsilon", "must be positive")
        _require(_is_int(self.max_iters) and self.max_iters >= 1, "max_iters", "must be a positive integer")
        _require(self.linear_tol > 0, "linear_tol", "must be positive")
        _require(self.fixedpoint_tol > 0, "fixedpoint_tol", "must be positive")
