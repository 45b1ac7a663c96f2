"""Desk-scale numerical laboratory for unconditional convex bodies: thin-shell
concentration, smoothed central-limit errors, transport duality and Neumann
spectra."""

__version__ = "0.1.0"

from .bodies import AxisSection, BodySpec, axis_section, contains, isotropic_scale
from .estimators import EstimateWithCI, WeightVector
from .sampler import RNG_ID, SampleMatrix, sample_counterexample, sample_exact, sample_hit_and_run

__all__ = [
    "__version__", "AxisSection", "BodySpec", "axis_section", "contains",
    "isotropic_scale", "EstimateWithCI", "WeightVector", "RNG_ID",
    "SampleMatrix", "sample_counterexample", "sample_exact", "sample_hit_and_run",
]
