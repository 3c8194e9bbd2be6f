"""Stop-and-Go forward model plus the beam-width and dispersion formulas."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import ConfigurationError, DispersionError, InvalidArgumentError
from .grid import PulseSpec, SasRecord, as_scatterers

__all__ = ["travel_time", "pulse_waveform", "synthesize_sas", "beam_width", "kz_dispersion"]


def travel_time(x, z, x0, z0, c):
    """Two-way delay between ``(x, z)`` and ``(x0, z0)``: ``2 r / c``.

    Broadcasts over array arguments.
    """
    if np.any(np.asarray(c) <= 0):
        raise InvalidArgumentError(f"c must be positive, got {c!r}", field="c")
    return 2.0 / c * np.hypot(np.subtract(x, x0), np.subtract(z, z0))


def pulse_waveform(t, pulse: PulseSpec) -> np.ndarray:
    """Transmitted pulse centred on ``t = 0``; zero outside ``|t| <= duration/2``.

    The gaussian envelope has ``sigma = duration / 6`` so the cut falls at 3 sigma.
    """
    t = np.asarray(t, dtype=np.float64)
    half = 0.5 * pulse.duration
    if pulse.envelope == "gaussian":
        sigma = pulse.duration / 6.0
        env = np.exp(-0.5 * (t / sigma) ** 2)
    else:
        env = 0.5 * (1.0 + np.cos(np.pi * t / half))
    env = np.where(np.abs(t) <= half, env, 0.0)
    return env * np.cos(2.0 * np.pi * pulse.frequency * t)


def synthesize_sas(
    scatterers: Iterable,
    n_traces: int,
    dx_track: float,
    n_samples: int,
    dt: float,
    t0: float,
    pulse: PulseSpec,
    c: float,
) -> SasRecord:
    """Echoes of point reflectors seen from ``x_i = i * dx_track`` on ``z = 0``.

    ``data[i, n] = sum_k a_k * p(t_n - tau_ik) / R_ik`` with the two-way delay
    ``tau_ik`` and one-way range ``R_ik``.  The pulse is evaluated in closed
    form at the fractional delay, so superposition and translation by whole
    trace spacings hold to rounding.
    """
    if not (isinstance(n_traces, (int, np.integer)) and n_traces >= 1):
        raise InvalidArgumentError(f"n_traces must be a positive integer, got {n_traces!r}", field="n_traces")
    if not (isinstance(n_samples, (int, np.integer)) and n_samples >= 1):
        raise InvalidArgumentError(f"n_samples must be a positive integer, got {n_samples!r}", field="n_samples")
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt!r}", field="dt")
    if not c > 0:
        raise InvalidArgumentError(f"c must be positive, got {c!r}", field="c")
    if not dt < 1.0 / (2.0 * pulse.frequency):
        raise ConfigurationError(
            f"dt = {dt:g} s violates the carrier Nyquist limit 1/(2f) = {1 / (2 * pulse.frequency):g} s")
    scat = as_scatterers(scatterers)

    xs = dx_track * np.arange(n_traces)
    t = t0 + dt * np.arange(n_samples)
    half = 0.5 * pulse.duration
    data = np.zeros((n_traces, n_samples))
    for s in scat:
        tau = travel_time(xs, 0.0, s.x, s.z, c)
        r = 0.5 * c * tau
        for i in range(n_traces):
            lo = int(np.searchsorted(t, tau[i] - half, side="left"))
            hi = int(np.searchsorted(t, tau[i] + half, side="right"))
            if hi <= lo:
                continue
            data[i, lo:hi] += s.amplitude * pulse_waveform(t[lo:hi] - tau[i], pulse) / r[i]
    return SasRecord(data, dt=dt, dx_track=dx_track, t0=t0, c=c)


def beam_width(f: float, D: float, c: float, alpha_w: float = 1.0) -> float:
    """Main-lobe width ``alpha_w * c / (f D)`` in radians."""
    for name, val in (("f", f), ("D", D), ("c", c)):
        if not val > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {val!r}", field=name)
    if alpha_w < 0:
        raise InvalidArgumentError(f"alpha_w must be >= 0, got {alpha_w!r}", field="alpha_w")
    return alpha_w * c / (f * D)


def kz_dispersion(k, kx, variant: str = "exact", alpha: float | None = None, beta: float | None = None):
    """Vertical wavenumber ``kz(k, kx)`` under one of three approximations.

    ``exact``     ``k sqrt(1 - s^2)``
    ``taylor15``  ``k (1 - s^2 / 2)``
    ``rational``  ``k (1 - alpha s^2 / (1 - beta s^2))``

    with ``s = kx / k``.  Scalars in, scalar out; arrays broadcast.
    """
    k = np.asarray(k, dtype=np.float64)
    kx = np.asarray(kx, dtype=np.float64)
    if np.any(k <= 0):
        raise InvalidArgumentError("k must be positive", field="k")
    s = kx / k
    s2 = s * s
    if variant == "exact":
        if np.any(np.abs(kx) > k):
            raise DispersionError("evanescent wave: |kx| > k has no real kz", field="kx")
        out = k * np.sqrt(1.0 - s2)
    elif variant == "taylor15":
        out = k * (1.0 - 0.5 * s2)
    elif variant == "rational":
        if alpha is None or beta is None:
            raise InvalidArgumentError("rational variant needs alpha and beta", field="variant")
        denom = 1.0 - beta * s2
        if np.any(denom == 0):
            raise DispersionError("pole of the rational approximation: 1 - beta s^2 = 0", field="kx")
        out = k * (1.0 - alpha * s2 / denom)
    else:
        raise InvalidArgumentError(f"unknown dispersion variant {variant!r}", field="variant")
    return float(out) if out.ndim == 0 else out

