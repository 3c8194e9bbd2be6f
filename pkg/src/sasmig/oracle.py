"""Delay-and-sum reference imager and point-spread metrics.

The imager shares nothing with the wave-equation path beyond the two-way
travel-time model, which makes it a usable cross-check for peak locations.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError, NotFoundError
from .forward import travel_time
from .grid import Field2D, Grid2D, SasRecord

__all__ = ["PsfReport", "backproject", "detect", "psf_metrics"]


@dataclass(frozen=True)
class PsfReport:
    peak_pixel: tuple[int, int]
    peak_value: float
    width_x_3db: float
    width_z_3db: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["peak_pixel"] = list(self.peak_pixel)
        return d


def backproject(record: SasRecord, grid: Grid2D) -> Field2D:
    """``image(x, z) = sum_i data_i(travel_time(x_i, 0, x, z, c))``.

    Samples are linearly interpolated; delays outside the record add zero.
    """
    xx = grid.x[None, :]
    zz = grid.z[:, None]
    image = np.zeros(grid.shape)
    ns = record.n_samples
    for i, xi in enumerate(record.x):
        pos = (travel_time(xi, 0.0, xx, zz, record.c) - record.t0) / record.dt
        inside = (pos >= 0) & (pos <= ns - 1)
        k = np.clip(np.floor(pos).astype(np.int64), 0, max(ns - 2, 0))
        w = pos - k
        trace = record.data[i]
        if ns == 1:
            vals = np.where(pos == 0, trace[0], 0.0)
        else:
            vals = trace[k] * (1.0 - w) + trace[k + 1] * w
        image += np.where(inside, vals, 0.0)
    return Field2D(grid, image)


def detect(image: Field2D | np.ndarray) -> np.ndarray:
    """Rectified magnitude of an image."""
    vals = image.values if isinstance(image, Field2D) else np.asarray(image, dtype=np.float64)
    return np.abs(vals)


def _half_width(profile: np.ndarray, k: int, level: float, direction: int) -> float:
    """Distance in samples from ``k`` to the first crossing of ``level``."""
    prev = profile[k]
    step = 1
    while 0 <= k + direction * step < profile.size:
        cur = profile[k + direction * step]
        if cur <= level:
            return step - 1 + (prev - level) / (prev - cur)
        prev = cur
        step += 1
    # never crossed: the lobe runs to the edge
    return float(step - 1)


def psf_metrics(image: Field2D, near: tuple[float, float], radius: float | None = None) -> PsfReport:
    """Peak and -3 dB widths of the detected image around ``near = (x, z)``.

    The peak is the largest magnitude inside a square window of half-size
    ``radius`` metres (default: four pixels of the coarser pitch), and must
    be a strict local maximum not sitting on the window edge.  Widths are
    measured where the magnitude first drops to ``peak / sqrt(2)`` and are
    never reported below one pixel pitch.
    """
    g = image.grid
    mag = detect(image)
    if radius is None:
        radius = 4.0 * max(g.dx, g.dz)
    if not radius > 0:
        raise InvalidArgumentError("radius must be positive", field="radius")
    ic, jc = g.nearest_pixel(*near)
    ri = max(1, int(math.ceil(radius / g.dx)))
    rj = max(1, int(math.ceil(radius / g.dz)))
    i_lo, i_hi = max(ic - ri, 0), min(ic + ri, g.nx - 1)
    j_lo, j_hi = max(jc - rj, 0), min(jc + rj, g.nz - 1)
    win = mag[j_lo : j_hi + 1, i_lo : i_hi + 1]
    if win.max() <= win.min():
        raise NotFoundError(f"no local maximum within {radius:g} m of {near}")
    jj, ii = np.unravel_index(int(np.argmax(win)), win.shape)
    i, j = i_lo + ii, j_lo + jj
    peak = mag[j, i]
    # a maximum pinned to the window edge is only a local max if the image ends there
    on_edge = (ii == 0 and i > 0) or (ii == win.shape[1] - 1 and i < g.nx - 1) or \
              (jj == 0 and j > 0) or (jj == win.shape[0] - 1 and j < g.nz - 1)
    if on_edge:
        nbr = mag[max(j - 1, 0) : j + 2, max(i - 1, 0) : i + 2]
        if nbr.max() > peak:
            raise NotFoundError(f"no local maximum within {radius:g} m of {near}")
    level = peak / math.sqrt(2.0)
    row, col = mag[j, :], mag[:, i]
    wx = (_half_width(row, i, level, -1) + _half_width(row, i, level, +1)) * g.dx
    wz = (_half_width(col, j, level, -1) + _half_width(col, j, level, +1)) * g.dz
    return PsfReport((int(i), int(j)), float(peak), max(wx, g.dx), max(wz, g.dz))
