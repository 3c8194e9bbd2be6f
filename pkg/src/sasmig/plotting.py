"""Figure rendering for images and point-spread reports.

Figures are built on :class:`matplotlib.figure.Figure` directly, so nothing
here touches pyplot state or needs an interactive backend.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .grid import Field2D
from .oracle import PsfReport, detect

__all__ = ["image_figure", "psf_figure", "save_figure"]


def _extent(field: Field2D):
    g = field.grid
    x, z = g.x, g.z
    return (x[0] - 0.5 * g.dx, x[-1] + 0.5 * g.dx, z[-1] + 0.5 * g.dz, z[0] - 0.5 * g.dz)


def _db(mag: np.ndarray, floor_db: float) -> np.ndarray:
    top = mag.max()
    if top <= 0:
        return np.full(mag.shape, -floor_db)
    with np.errstate(divide="ignore"):
        out = 20.0 * np.log10(mag / top)
    return np.maximum(out, -floor_db)


def image_figure(field: Field2D, title: str | None = None, db_range: float | None = 40.0,
                 marks=()) -> Figure:
    """Detected image in range/cross-range coordinates.

    With ``db_range`` set the magnitude is shown in dB below the peak,
    clipped at ``-db_range``; ``None`` shows linear magnitude.  ``marks`` is
    an iterable of ``(x, z)`` positions drawn as crosses.
    """
    mag = detect(field)
    fig = Figure(figsize=(6.0, 5.0))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    if db_range is None:
        im = ax.imshow(mag, extent=_extent(field), aspect="auto", cmap="gray")
        label = "|u|"
    else:
        im = ax.imshow(_db(mag, db_range), extent=_extent(field), aspect="auto",
                       cmap="gray", vmin=-db_range, vmax=0.0)
        label = "dB"
    fig.colorbar(im, ax=ax, label=label)
    for x, z in marks:
        ax.plot([x], [z], "r+", markersize=10, markeredgewidth=1.5)
    ax.set_xlabel("cross-range x [m]")
    ax.set_ylabel("range z [m]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def psf_figure(field: Field2D, report: PsfReport, title: str | None = None) -> Figure:
    """Cross-range and range cuts through the peak with the -3 dB level marked."""
    g = field.grid
    mag = detect(field)
    i, j = report.peak_pixel
    level = report.peak_value / np.sqrt(2.0)
    fig = Figure(figsize=(8.0, 3.2))
    FigureCanvasAgg(fig)
    for k, (coord, cut, width, name) in enumerate(
        ((g.x, mag[j, :], report.width_x_3db, "x"), (g.z, mag[:, i], report.width_z_3db, "z"))
    ):
        ax = fig.add_subplot(1, 2, k + 1)
        ax.plot(coord, cut, "k-", lw=1)
        ax.axhline(level, color="r", ls="--", lw=0.8)
        ax.set_xlabel(f"{name} [m]")
        ax.set_title(f"-3 dB width {width:.4g} m", fontsize=9)
        centre = coord[i if name == "x" else j]
        ax.set_xlim(centre - 6 * width, centre + 6 * width)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def save_figure(fig: Figure, path, dpi: int = 150) -> None:
    fig.savefig(path, dpi=dpi)
