import numpy as np

from sasmig import Field2D, make_grid, psf_metrics
from sasmig.plotting import image_figure, psf_figure, save_figure


def _bump():
    g = make_grid(40, 30, 0.02, 0.02)
    xx, zz = np.meshgrid(g.x, g.z)
    return Field2D(g, np.exp(-((xx - 0.4) ** 2 + (zz - 0.3) ** 2) / 0.002) * np.cos(60 * zz))


def test_image_figure_png(tmp_path):
    f = _bump()
    fig = image_figure(f, title="bump", marks=[(0.4, 0.3)])
    ax = fig.axes[0]
    lo, hi = ax.images[0].get_clim()
    assert (lo, hi) == (-40.0, 0.0)
    x0, x1, z1, z0 = ax.images[0].get_extent()
    assert x0 < f.grid.x[0] < x1 and z0 < f.grid.z[0] and z1 > f.grid.z[-1]
    save_figure(fig, tmp_path / "img.png")
    assert (tmp_path / "img.png").read_bytes()[:4] == b"\x89PNG"


def test_linear_and_zero_images(tmp_path):
    save_figure(image_figure(_bump(), db_range=None), tmp_path / "lin.png")
    save_figure(image_figure(Field2D.zeros(make_grid(4, 4, 1.0, 1.0))), tmp_path / "zero.png")
    assert (tmp_path / "zero.png").stat().st_size > 0


def test_psf_figure(tmp_path):
    f = _bump()
    rep = psf_metrics(f, (0.4, 0.3))
    fig = psf_figure(f, rep)
    assert len(fig.axes) == 2
    level = fig.axes[0].lines[1].get_ydata()[0]
    assert np.isclose(level, rep.peak_value / np.sqrt(2))
    save_figure(fig, tmp_path / "psf.png")
