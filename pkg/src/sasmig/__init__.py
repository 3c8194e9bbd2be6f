"""Synthetic aperture sonar imaging with one-way wave equations.

Forward simulation of point scenes, two- and three-step splitting migration
(15-degree and rational wide-angle), a delay-and-sum reference imager, and
BV-type variational enhancement of the detected image.
"""

from .enhance import EnhanceResult, energy, enhance, enhance_report, normalize_detected, phi, phi_prime
from .errors import (
    ConfigurationError,
    DispersionError,
    InvalidArgumentError,
    NotFoundError,
    NumericalError,
    ParseError,
    SasError,
    SolverError,
)
from .forward import beam_width, kz_dispersion, pulse_waveform, synthesize_sas, travel_time
from .grid import (
    ANGLE_VARIANTS,
    EnhanceConfig,
    Field2D,
    Grid2D,
    MigrationConfig,
    PulseSpec,
    SasRecord,
    Scatterer,
    make_grid,
)
from .io import export_pgm, read_field, read_header, read_layers, read_sas, read_scatterers, write_field, write_sas
from .migrate15 import MigrationState, alg1_step, migrate_alg1, prepare_boundary
from .migrate_wide import WideState, alg2_step, migrate, migrate_alg2
from .oracle import PsfReport, backproject, psf_metrics
from .tridiag import TridiagSystem, apply_H, get_threads, set_threads, solve_shifted

__version__ = "0.1.0"
