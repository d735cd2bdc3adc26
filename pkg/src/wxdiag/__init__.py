"""wxdiag: verification and diagnostics engine for gridded weather forecasts."""

from . import (
    balance,
    composite,
    consensus,
    dynamics,
    extremes,
    grid,
    io,
    skill,
    spectral,
    synth,
)
from .errors import WxdiagError

__version__ = "0.1.0"

__all__ = [
    "balance",
    "composite",
    "consensus",
    "dynamics",
    "extremes",
    "grid",
    "io",
    "skill",
    "spectral",
    "synth",
    "WxdiagError",
    "__version__",
]
