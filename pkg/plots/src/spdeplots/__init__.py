"""Offline plotting for the SPDE lab CSV outputs (fields.csv / energy.csv)."""

from .io import SchemaError, read_energy, read_fields
from .render import PlotJob, ScalingResult, SurfaceResult, render_scaling, render_surface

__version__ = "0.1.0"
