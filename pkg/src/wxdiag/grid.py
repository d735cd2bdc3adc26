"""Equiangular latitude-longitude grid, area weighting and field containers.

Grids and fields are immutable after construction (arrays are set
read-only), so they are safe to share across evaluation workers.
Latitudes are normalized to ascending order internally; a flag records
the source ordering so file writers can preserve it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
import numpy as np

from .errors import GridMismatch, InvalidField

EARTH_RADIUS_M = 6.371e6

# Canonical variable tags used by the batch pipeline. Individual fields may
# carry other tags (e.g. u850 for the balance diagnostics).
VARIABLES = ("z500", "t2m", "u500", "v500", "t850", "q700")

BANDS = ("tropics", "extratropics", "polar")


def is_temperature_variable(variable: str) -> bool:
    """Temperature tags (t2m, t850, ...) get the 0.5 K climatology floor."""
    return variable.startswith("t")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LatLonGrid:
    """Regular lat-lon grid with cosine-latitude area weights.

    lats: latitudes in degrees, strictly monotone, length >= 3.
    lons: longitudes in degrees, uniform spacing, span < 360, length >= 4.
    radius_m: sphere radius in meters.
    source_descending: True if the grid came from a file with descending
        latitudes; writers use it to restore file order.
    """

    lats: np.ndarray
    lons: np.ndarray
    radius_m: float = EARTH_RADIUS_M
    source_descending: bool = field(default=False, compare=False)

    def __post_init__(self):
        lats = np.asarray(self.lats, dtype=float)
        lons = np.asarray(self.lons, dtype=float)
        if lats.ndim != 1 or lons.ndim != 1:
            raise InvalidField("lats and lons must be one-dimensional")
        if lats.size < 3 or lons.size < 4:
            raise InvalidField("grid needs nlat >= 3 and nlon >= 4")
        if np.any(lats < -90.0) or np.any(lats > 90.0):
            raise InvalidField("latitudes must lie in [-90, 90]")
        dlat = np.diff(lats)
        if np.all(dlat > 0):
            descending = False
        elif np.all(dlat < 0):
            descending = True
            lats = lats[::-1]
        else:
            raise InvalidField("latitudes must be strictly monotone")
        dlon = np.diff(lons)
        if not np.allclose(dlon, dlon[0], rtol=1e-9, atol=1e-9) or dlon[0] <= 0:
            raise InvalidField("longitudes must have uniform positive spacing")
        if lons[-1] - lons[0] >= 360.0:
            raise InvalidField("longitude span must be < 360 degrees")
        if self.radius_m <= 0:
            raise InvalidField("radius must be positive")
        object.__setattr__(self, "lats", _readonly(lats))
        object.__setattr__(self, "lons", _readonly(lons))
        object.__setattr__(self, "source_descending", bool(descending or self.source_descending))

    @property
    def nlat(self) -> int:
        return self.lats.size

    @property
    def nlon(self) -> int:
        return self.lons.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nlat, self.nlon)

    def lat_radians(self) -> np.ndarray:
        return np.deg2rad(self.lats)

    def lon_radians(self) -> np.ndarray:
        return np.deg2rad(self.lons)

    def cos_lat(self) -> np.ndarray:
        """cos(phi) per latitude row; exactly zero at the poles."""
        c = np.cos(np.deg2rad(self.lats))
        c[np.abs(self.lats) == 90.0] = 0.0
        c[c < 0.0] = 0.0
        return c

    def area_weights(self) -> np.ndarray:
        """(nlat, nlon) area weights w = cos(phi), normalized to mean 1."""
        c = self.cos_lat()
        w = np.repeat(c[:, None], self.nlon, axis=1)
        return w / w.mean()

    def coriolis(self, omega: float = 7.2921e-5) -> np.ndarray:
        """Coriolis parameter f = 2 * omega * sin(phi) per latitude row."""
        return 2.0 * omega * np.sin(self.lat_radians())

    def same_geometry(self, other: "LatLonGrid") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.lats, other.lats)
            and np.array_equal(self.lons, other.lons)
        )


def uniform_grid(nlat: int, nlon: int, radius_m: float = EARTH_RADIUS_M) -> LatLonGrid:
    """Cell-centered equiangular grid without pole rows.

    This is the default oracle geometry: cos(phi) > 0 everywhere, so
    synthetic generators can divide by sqrt(cos phi) safely.
    """
    lats = -90.0 + (np.arange(nlat) + 0.5) * 180.0 / nlat
    lons = np.arange(nlon) * 360.0 / nlon
    return LatLonGrid(lats=lats, lons=lons, radius_m=radius_m)


@dataclass(frozen=True)
class ScalarField:
    """One 2D variable on a grid at one (model, variable, init, lead)."""

    grid: LatLonGrid
    values: np.ndarray
    variable: str
    model: str = ""
    init_time: datetime | None = None
    lead_hours: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise InvalidField(
                f"values shape {v.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidField("field contains non-finite values")
        if self.lead_hours < 0:
            raise InvalidField("lead_hours must be nonnegative")
        if not self.variable:
            raise InvalidField("variable tag must be non-empty")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def valid_time(self) -> datetime | None:
        if self.init_time is None:
            return None
        from datetime import timedelta

        return self.init_time + timedelta(hours=int(self.lead_hours))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(
            grid=self.grid,
            values=values,
            variable=self.variable,
            model=self.model,
            init_time=self.init_time,
            lead_hours=self.lead_hours,
        )


def band_mask(grid: LatLonGrid, band: str) -> np.ndarray:
    """Boolean (nlat, nlon) mask for one latitude band.

    tropics: |phi| < 20; extratropics: 20 <= |phi| < 60; polar: |phi| >= 60.
    The three masks partition every grid.
    """
    if band not in BANDS:
        raise ValueError(f"unknown band {band!r}; expected one of {BANDS}")
    a = np.abs(grid.lats)
    if band == "tropics":
        rows = a < 20.0
    elif band == "extratropics":
        rows = (a >= 20.0) & (a < 60.0)
    else:
        rows = a >= 60.0
    return np.repeat(rows[:, None], grid.nlon, axis=1)


def area_weighted_mean(field: ScalarField | np.ndarray, grid: LatLonGrid | None = None,
                       mask: np.ndarray | None = None) -> float:
    """Area-weighted global mean: sum(w * v) / sum(w) over the mask.

    Accepts either a ScalarField or a bare (nlat, nlon) array plus grid.
    """
    if isinstance(field, ScalarField):
        values, g = field.values, field.grid
    else:
        if grid is None:
            raise ValueError("grid required when passing a bare array")
        values, g = np.asarray(field, dtype=float), grid
    if values.shape != g.shape:
        raise InvalidField(f"values shape {values.shape} does not match grid {g.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidField("field contains non-finite values")
    w = g.area_weights()
    if mask is not None:
        w = np.where(mask, w, 0.0)
    denom = w.sum()
    if denom <= 0.0:
        raise InvalidField("mask selects no weighted area")
    return float((w * values).sum() / denom)
