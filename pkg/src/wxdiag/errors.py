"""Exception types raised by the diagnostics engine.

Every operation documents which of these it can raise; all inherit from
WxdiagError so callers can catch the whole family at once.
"""


class WxdiagError(Exception):
    """Base class for all wxdiag errors."""


class InvalidField(WxdiagError):
    """Field values are non-finite or have the wrong shape."""


class GridMismatch(WxdiagError):
    """Two fields do not share the same grid."""


class GridTooCoarse(WxdiagError):
    """Grid does not support the requested spectral range."""


class ShellMismatch(WxdiagError):
    """Two spectra do not share the same wavenumber support."""


class InsufficientSpectrum(WxdiagError):
    """No usable shells remain after filtering."""


class NonpositiveEnergy(WxdiagError):
    """Power-law fit requested over shells with nonpositive energy."""


class InsufficientEnsemble(WxdiagError):
    """Fewer than two ensemble members supplied."""


class InconsistentVariance(WxdiagError):
    """Conditional variance exceeds the truth spectrum."""


class DegenerateAnomaly(WxdiagError):
    """Anomaly field has zero variance; correlation undefined."""


class InsufficientHistory(WxdiagError):
    """Climatology window has no samples or spans fewer than two years."""


class InsufficientSamples(WxdiagError):
    """A confidence interval needs at least two samples."""


class DegenerateErrors(WxdiagError):
    """All model error fields are identically zero; ECR undefined."""


class DegenerateField(WxdiagError):
    """A field required to have variance is constant."""


class InvalidSeries(WxdiagError):
    """A log-space fit received nonpositive values or too few leads."""


class MissingComponent(WxdiagError):
    """A wind component is missing for a requested lead."""


class DegenerateFlow(WxdiagError):
    """Vorticity is identically zero; non-divergence ratio undefined."""


class DegenerateShear(WxdiagError):
    """Actual wind shear is identically zero; thermal ratio undefined."""


class DegenerateThickness(WxdiagError):
    """Geopotential thickness is identically zero."""


class IncompleteBalance(WxdiagError):
    """A balance sub-score is missing from the composite."""


class NoExtremes(WxdiagError):
    """Exceedance mask is empty; extreme metrics not scored."""


class InsufficientTail(WxdiagError):
    """Fewer than two populated bins in the tail curve."""


class OutOfRangeMetric(WxdiagError):
    """A composite input lies outside [0, 1]."""


class DegenerateRanks(WxdiagError):
    """All models tied under all weighting schemes."""


class InvalidInformationBudget(WxdiagError):
    """Information budget must be positive."""


class ConfigError(WxdiagError):
    """Malformed run configuration or manifest."""
