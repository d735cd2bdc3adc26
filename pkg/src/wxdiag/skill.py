"""Deterministic skill metrics, climatology and confidence intervals.

RMSE and ACC follow the WeatherBench-compatible conventions: cos(phi)
area weighting everywhere and uncentered anomaly correlation by default.
Climatology pools a 15-day day-of-year window per grid point (wrapping
across the year boundary, with day 366 sharing the Feb-29 window) and
floors sigma at 0.5 K for temperature variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import (
    DegenerateAnomaly,
    GridMismatch,
    InsufficientHistory,
    InsufficientSamples,
)
from .grid import LatLonGrid, ScalarField, area_weighted_mean, is_temperature_variable

Z_90 = 1.645  # 90% two-sided normal quantile used for all intervals

TEMPERATURE_SIGMA_FLOOR_K = 0.5
DOY_SLOTS = 366
CLIM_WINDOW_DAYS = 15

# Cumulative month lengths in a leap calendar; (month, day) -> 1..366 with
# Feb 29 = 60, so dates align across leap and non-leap years.
_CUM_DAYS = np.cumsum([0, 31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30])


def day_of_year_366(when: datetime) -> int:
    return int(_CUM_DAYS[when.month - 1] + when.day)


@dataclass
class Climatology:
    """Per grid point, per day-of-year (and hour) mean and spread."""

    grid: LatLonGrid
    variable: str
    mu: dict[int, np.ndarray]      # hour -> (366, nlat, nlon)
    sigma: dict[int, np.ndarray]   # hour -> (366, nlat, nlon)
    sigma_floor: float

    def hours(self) -> list[int]:
        return sorted(self.mu)

    def _resolve_hour(self, hour: int) -> int:
        if hour in self.mu:
            return hour
        if len(self.mu) == 1:
            return next(iter(self.mu))
        raise InsufficientHistory(
            f"climatology has no hour {hour:02d} (available: {self.hours()})"
        )

    def lookup(self, when: datetime) -> tuple[np.ndarray, np.ndarray]:
        """(mu, sigma) 2D slices for the DOY and hour of `when`."""
        hour = self._resolve_hour(when.hour)
        idx = day_of_year_366(when) - 1
        return self.mu[hour][idx], self.sigma[hour][idx]

    @classmethod
    def constant(cls, grid: LatLonGrid, variable: str, mu: float | np.ndarray,
                 sigma: float | np.ndarray, hour: int = 0) -> "Climatology":
        """Uniform-in-time climatology, mainly for synthetic tests."""
        floor = TEMPERATURE_SIGMA_FLOOR_K if is_temperature_variable(variable) else 0.0
        mu2 = np.broadcast_to(np.asarray(mu, dtype=float), grid.shape)
        sg2 = np.maximum(np.broadcast_to(np.asarray(sigma, dtype=float), grid.shape), floor)
        shape = (DOY_SLOTS,) + grid.shape
        return cls(
            grid=grid,
            variable=variable,
            mu={hour: np.broadcast_to(mu2, shape).copy()},
            sigma={hour: np.broadcast_to(sg2, shape).copy()},
            sigma_floor=floor,
        )


@dataclass
class MetricSeries:
    """One metric vs lead for one (model, variable)."""

    model: str
    variable: str
    leads: list[int]
    mean: list[float]
    ci_half_width: list[float]
    n: list[int]
    metric: str = "rmse"

    def __post_init__(self):
        sizes = {len(self.leads), len(self.mean), len(self.ci_half_width), len(self.n)}
        if len(sizes) != 1:
            raise ValueError("MetricSeries columns must have equal length")
        if any(h < 0 for h in self.ci_half_width):
            raise ValueError("ci_half_width must be nonnegative")
        if any(k < 1 for k in self.n):
            raise ValueError("n must be >= 1 wherever a mean is defined")


def _check_pair(forecast: ScalarField, verify: ScalarField) -> LatLonGrid:
    if not forecast.grid.same_geometry(verify.grid):
        raise GridMismatch("forecast and verification grids differ")
    return forecast.grid


def rmse(forecast: ScalarField, verify: ScalarField, mask: np.ndarray | None = None) -> float:
    """Area-weighted RMSE over the mask (default: global)."""
    grid = _check_pair(forecast, verify)
    sq = (forecast.values - verify.values) ** 2
    return float(np.sqrt(area_weighted_mean(sq, grid, mask=mask)))


def acc(forecast: ScalarField, verify: ScalarField, clim: Climatology,
        centered: bool = False) -> float:
    """Anomaly correlation coefficient in [-1, 1].

    Uncentered by default: ACC = sum(w f'a') / sqrt(sum(w f'^2) sum(w a'^2))
    with anomalies taken against the climatological mean for the valid
    time's day-of-year. `centered=True` additionally removes the
    area-weighted mean of each anomaly field first.
    """
    grid = _check_pair(forecast, verify)
    if not grid.same_geometry(clim.grid):
        raise GridMismatch("climatology grid differs from field grid")
    when = forecast.valid_time or verify.valid_time
    if when is None:
        raise ValueError("ACC needs init_time set to resolve the day of year")
    mu, _ = clim.lookup(when)
    fa = forecast.values - mu
    va = verify.values - mu
    w = grid.area_weights()
    if centered:
        fa = fa - (w * fa).sum() / w.sum()
        va = va - (w * va).sum() / w.sum()
    f2 = float((w * fa * fa).sum())
    v2 = float((w * va * va).sum())
    if f2 == 0.0 or v2 == 0.0:
        raise DegenerateAnomaly("zero anomaly variance")
    return float((w * fa * va).sum() / np.sqrt(f2 * v2))


def _ring_window_sums(per_doy: np.ndarray, half: int) -> np.ndarray:
    """Sum per_doy over the wrapping window [d-half, d+half] for each slot."""
    out = np.zeros_like(per_doy)
    for off in range(-half, half + 1):
        out += np.roll(per_doy, -off, axis=0)
    return out


def compute_climatology(history: list[ScalarField],
                        window_days: int = CLIM_WINDOW_DAYS,
                        sigma_floor: float | None = None) -> Climatology:
    """Climatology from >= 2 years of fields at matching valid hours.

    For each day-of-year d, mu and sigma pool every sample whose DOY lies
    within [d-7, d+7] (wrapping) at the same hour; sigma uses the n-1
    denominator and is floored per variable class.
    """
    if not history:
        raise InsufficientHistory("empty history")
    grid = history[0].grid
    variable = history[0].variable
    for f in history[1:]:
        if not grid.same_geometry(f.grid):
            raise GridMismatch("history fields are on different grids")
        if f.variable != variable:
            raise InsufficientHistory("history mixes variables")
    times = [f.valid_time for f in history]
    if any(t is None for t in times):
        raise InsufficientHistory("history fields need valid times")
    if len({t.year for t in times}) < 2:
        raise InsufficientHistory("climatology needs at least two years of data")
    if sigma_floor is None:
        sigma_floor = TEMPERATURE_SIGMA_FLOOR_K if is_temperature_variable(variable) else 0.0
    half = window_days // 2

    by_hour: dict[int, list[int]] = {}
    for i, t in enumerate(times):
        by_hour.setdefault(t.hour, []).append(i)

    mu_out: dict[int, np.ndarray] = {}
    sigma_out: dict[int, np.ndarray] = {}
    shape = (DOY_SLOTS,) + grid.shape
    for hour, idxs in sorted(by_hour.items()):
        count = np.zeros(DOY_SLOTS)
        s1 = np.zeros(shape)
        s2 = np.zeros(shape)
        for i in idxs:
            d = day_of_year_366(times[i]) - 1
            v = history[i].values
            count[d] += 1
            s1[d] += v
            s2[d] += v * v
        n_win = _ring_window_sums(count, half)
        if np.any(n_win < 2):
            bad = int(np.argmin(n_win)) + 1
            raise InsufficientHistory(
                f"DOY {bad} window has {int(n_win[bad - 1])} samples at hour {hour:02d}"
            )
        s1_win = _ring_window_sums(s1, half)
        s2_win = _ring_window_sums(s2, half)
        n3 = n_win[:, None, None]
        mu = s1_win / n3
        var = np.maximum(s2_win - n3 * mu * mu, 0.0) / (n3 - 1.0)
        mu_out[hour] = mu
        sigma_out[hour] = np.maximum(np.sqrt(var), sigma_floor)
    return Climatology(grid=grid, variable=variable, mu=mu_out, sigma=sigma_out,
                       sigma_floor=sigma_floor)


def confidence_interval(samples: list[float] | np.ndarray) -> tuple[float, float]:
    """(mean, half_width) with half_width = 1.645 * s / sqrt(n), s the
    n-1 sample standard deviation."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientSamples(f"need >= 2 samples, got {x.size}")
    s = float(np.std(x, ddof=1))
    return float(x.mean()), Z_90 * s / float(np.sqrt(x.size))


def competition_ranks(values: list[float]) -> list[int]:
    """Rank 1 = lowest value; ties share the lower rank (1, 1, 3, ...)."""
    arr = np.asarray(values, dtype=float)
    return [int(1 + np.sum(arr < v)) for v in arr]


def scorecard(table: dict[str, MetricSeries]) -> dict[str, list[int]]:
    """Per-lead competition ranks (1 = lowest metric) for each model."""
    if not table:
        return {}
    models = sorted(table)
    leads = table[models[0]].leads
    for m in models[1:]:
        if table[m].leads != leads:
            raise GridMismatch("scorecard requires a shared lead grid")
    ranks = {m: [] for m in models}
    for j in range(len(leads)):
        col = [table[m].mean[j] for m in models]
        for m, r in zip(models, competition_ranks(col)):
            ranks[m].append(r)
    return ranks
