"""Desk-scale lab for radially symmetric 2D Vlasov-Maxwell focusing runs."""

from .params import FocusingParams, RunConfig, load_config
from .initdata import BumpProfile, CutoffChi, MarkerEnsemble, f0_eval, sample_markers
from .fields import RadialGrid, SourceHistory, fields_from_p, gauss_er, step_p
from .particles import deposit, free_streaming_radius, push, support_extent
from .bounds import TrajectoryEnvelope, envelope_coeffs, envelope_eval
from .driver import DiagnosticsRecord, RunResult, growth_report, run, sweep

__version__ = "0.1.0"

__all__ = [
    "FocusingParams", "RunConfig", "load_config",
    "BumpProfile", "CutoffChi", "MarkerEnsemble", "f0_eval", "sample_markers",
    "RadialGrid", "SourceHistory", "fields_from_p", "gauss_er", "step_p",
    "deposit", "free_streaming_radius", "push", "support_extent",
    "TrajectoryEnvelope", "envelope_coeffs", "envelope_eval",
    "DiagnosticsRecord", "RunResult", "growth_report", "run", "sweep",
    "__version__",
]
