"""Command-line front end: simulate, migrate, enhance, analyse.

Exit status is 0 on success, 1 for usage errors, 2 for bad input data or
configuration and 3 for numerical failures.  Reports go to stdout as JSON,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings

from . import io, tridiag
from .enhance import enhance_report, normalize_detected
from .errors import NumericalError, SasError
from .forward import synthesize_sas
from .grid import ANGLE_VARIANTS, EnhanceConfig, Grid2D, MigrationConfig, PulseSpec
from .migrate15 import default_focus_rows
from .migrate_wide import migrate
from .oracle import psf_metrics

__all__ = ["main"]

log = logging.getLogger("sasmig")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _floats(n_min: int, n_max: int):
    def parse(text: str) -> tuple[float, ...]:
        try:
            vals = tuple(float(t) for t in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
        if not n_min <= len(vals) <= n_max:
            raise argparse.ArgumentTypeError(f"expected {n_min}..{n_max} values, got {len(vals)}")
        return vals
    return parse


def _focus_count(text: str):
    if text in ("all", "auto"):
        return text
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"M must be a positive integer, 'all' or 'auto', got {text!r}")
    if m < 1:
        raise argparse.ArgumentTypeError("M must be positive")
    return m


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads for row solves (default: all cores)")

    p = _Parser(prog="sasmig", description="SAS wave-equation migration toolkit", parents=[common])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", parents=[common], help="synthesize a SAS record from point scatterers")
    s.add_argument("scatterers", help="CSV of x,z[,amplitude] lines")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--n-traces", type=int, default=128)
    s.add_argument("--dx-track", type=float, default=0.02, help="along-track trace spacing [m]")
    s.add_argument("--n-samples", type=int, default=512)
    s.add_argument("--dt", type=float, default=None, help="sample period [s] (default: dx_track / c)")
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--c", type=float, default=1500.0)
    s.add_argument("--freq", type=float, default=7500.0, help="carrier frequency [Hz]")
    s.add_argument("--envelope", choices=("gaussian", "raised_cosine"), default="gaussian")
    s.add_argument("--duration", type=float, default=None, help="envelope length [s] (default: 2 / freq)")

    m = sub.add_parser("migrate", parents=[common], help="migrate a SAS record into an image")
    m.add_argument("input")
    m.add_argument("-o", "--output", required=True)
    m.add_argument("--variant", choices=("15", "45", "65", "custom"), default="15")
    m.add_argument("--alpha", type=float, default=None)
    m.add_argument("--beta", type=float, default=None)
    m.add_argument("--M", dest="focus", type=_focus_count, default="all",
                   help="focusing steps per row: an integer, 'all' or 'auto' (beam cone; needs --freq, --aperture)")
    m.add_argument("--freq", type=float, default=None, help="carrier frequency for --M auto [Hz]")
    m.add_argument("--aperture", type=float, default=None, help="physical aperture D for --M auto [m]")
    m.add_argument("--alpha-w", type=float, default=1.0)
    m.add_argument("--dz", type=float, default=None, help="range step of the scheme [m] (default: output dz)")
    m.add_argument("--grid", type=_floats(4, 6), default=None, metavar="NX,NZ,DX,DZ[,X0,Z0]",
                   help="output grid (default: one column per trace down to the last echo)")
    m.add_argument("--c", type=float, default=None, help="constant sound speed (default: record's)")
    m.add_argument("--layers", default=None, help="CSV of z_top,c lines for a layered medium")
    m.add_argument("--figure", default=None, help="also render the image to this file")

    e = sub.add_parser("enhance", parents=[common], help="variational enhancement of an image")
    e.add_argument("input")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--beta", type=float, default=1e-3)
    e.add_argument("--phi", choices=("gaussian", "bv", "hybrid"), default="bv")
    e.add_argument("--delta", type=float, default=0.25)
    e.add_argument("--eps", type=float, default=1e-8)
    e.add_argument("--tol", type=float, default=1e-6, help="fixed-point residual tolerance (relative)")
    e.add_argument("--linear-tol", type=float, default=1e-10)
    e.add_argument("--max-iters", type=int, default=500)
    e.add_argument("--raw", action="store_true", help="skip detection and [0, 1] scaling of the input")

    q = sub.add_parser("psf", parents=[common], help="peak and -3 dB widths near a point")
    q.add_argument("input")
    q.add_argument("--near", type=_floats(2, 2), required=True, metavar="X,Z")
    q.add_argument("--radius", type=float, default=None, help="search half-size [m]")
    q.add_argument("--figure", default=None, help="also render the range/cross-range cuts")

    i = sub.add_parser("info", parents=[common], help="print the header of a SASR or FLD2 file")
    i.add_argument("input")

    x = sub.add_parser("export", parents=[common], help="write an image as 16-bit PGM")
    x.add_argument("input")
    x.add_argument("-o", "--output", required=True)
    x.add_argument("--fixed", type=_floats(2, 2), default=None, metavar="LO,HI",
                   help="fixed mapping range instead of min/max")
    x.add_argument("--signed", action="store_true", help="export signed values instead of the magnitude")
    x.add_argument("--figure", default=None, help="also render a dB image to this file")
    x.add_argument("--db-range", type=float, default=40.0)
    return p


def _cmd_simulate(a) -> int:
    scat = io.read_scatterers(a.scatterers)
    dt = a.dx_track / a.c if a.dt is None else a.dt
    duration = 2.0 / a.freq if a.duration is None else a.duration
    pulse = PulseSpec(a.freq, a.envelope, duration)
    rec = synthesize_sas(scat, a.n_traces, a.dx_track, a.n_samples, dt, a.t0, pulse, a.c)
    io.write_sas(rec, a.output)
    log.info("wrote %d x %d record to %s", rec.n_traces, rec.n_samples, a.output)
    return EXIT_OK


def _default_grid(rec, dz: float, c: float) -> Grid2D:
    z_max = 0.5 * c * (rec.t0 + (rec.n_samples - 1) * rec.dt)
    nz = max(int(math.floor(z_max / dz + 1e-9)) + 1, 1)
    return Grid2D(rec.n_traces, nz, rec.dx_track, dz)


def _cmd_migrate(a) -> int:
    rec = io.read_sas(a.input)
    if a.variant in ("45", "65") and (a.alpha is not None or a.beta is not None):
        alpha, beta = ANGLE_VARIANTS[a.variant]
        log.warning("variant %s binds alpha=%g, beta=%g; ignoring --alpha/--beta", a.variant, alpha, beta)
    if a.variant == "15" and (a.alpha is not None or a.beta is not None):
        log.warning("variant 15 uses the two-step scheme; ignoring --alpha/--beta")
    if a.variant == "custom" and (a.alpha is None or a.beta is None):
        raise _UsageError("sasmig migrate: error: --variant custom needs --alpha and --beta")

    c = rec.c if a.c is None else a.c
    if a.grid is None:
        grid = _default_grid(rec, a.dz if a.dz is not None else rec.dx_track, c)
    else:
        g = a.grid
        if g[0] != int(g[0]) or g[1] != int(g[1]):
            raise _UsageError("sasmig migrate: error: --grid nx and nz must be integers")
        grid = Grid2D(int(g[0]), int(g[1]), *g[2:])

    if a.focus == "all":
        focus = None
    elif a.focus == "auto":
        if a.freq is None or a.aperture is None:
            raise _UsageError("sasmig migrate: error: --M auto needs --freq and --aperture")
        z_max = grid.z0 + (grid.nz - 1) * grid.dz
        focus = default_focus_rows(a.freq, a.aperture, c, z_max, rec.dx_track, grid.nz, a.alpha_w)
        log.info("M = %d from the beam cone", focus)
    else:
        focus = a.focus

    profile = io.read_layers(a.layers) if a.layers else a.c
    wide_custom = a.variant == "custom"
    cfg = MigrationConfig(grid, dz=a.dz, variant=a.variant,
                          alpha=a.alpha if wide_custom else None,
                          beta=a.beta if wide_custom else None,
                          focus_rows=focus, c_profile=profile)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        image = migrate(rec, cfg)
    for w in caught:
        log.warning("%s", w.message)
    io.write_field(image, a.output)
    if a.figure:
        from .plotting import image_figure, save_figure
        save_figure(image_figure(image, title=f"variant {cfg.variant}"), a.figure)
    return EXIT_OK


def _cmd_enhance(a) -> int:
    field = io.read_field(a.input)
    src = field if a.raw else normalize_detected(field)
    cfg = EnhanceConfig(a.beta, a.phi, delta=a.delta, epsilon=a.eps, max_iters=a.max_iters,
                        linear_tol=a.linear_tol, fixedpoint_tol=a.tol)
    res = enhance_report(src, cfg)
    io.write_field(res.image, a.output)
    print(json.dumps({"iterations": res.iterations, "residual": res.residual,
                      "converged": res.converged}, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def _cmd_psf(a) -> int:
    field = io.read_field(a.input)
    rep = psf_metrics(field, a.near, a.radius)
    print(json.dumps(rep.to_dict(), sort_keys=True))
    if a.figure:
        from .plotting import psf_figure, save_figure
        save_figure(psf_figure(field, rep), a.figure)
    return EXIT_OK


def _cmd_info(a) -> int:
    print(json.dumps(io.read_header(a.input), sort_keys=True))
    return EXIT_OK


def _cmd_export(a) -> int:
    field = io.read_field(a.input)
    img = field if a.signed else field.with_values(abs(field.values))
    norm = "minmax" if a.fixed is None else ("fixed", *a.fixed)
    io.export_pgm(img, a.output, norm)
    if a.figure:
        from .plotting import image_figure, save_figure
        save_figure(image_figure(field, db_range=a.db_range), a.figure)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "migrate": _cmd_migrate,
    "enhance": _cmd_enhance,
    "psf": _cmd_psf,
    "info": _cmd_info,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("sasmig: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    threads = getattr(args, "threads", None)
    previous = tridiag.get_threads()
    try:
        if threads is not None:
            if threads < 1:
                raise _UsageError("sasmig: error: --threads must be positive")
            tridiag.set_threads(threads)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"sasmig: numerical failure: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(json.dumps(diag, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_NUMERIC
    except (SasError, OSError, ValueError) as exc:
        print(f"sasmig: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    finally:
        tridiag.set_threads(previous)
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
