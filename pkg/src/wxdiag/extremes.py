"""Climatology-conditioned extreme diagnostics.

Extremes are grid points where the verification exceeds the local
climatological threshold mu + t*sigma (default t = 2). Cold extremes
reuse the warm-tail machinery with fields and anomalies negated, i.e.
delta = (mu - verify)/sigma and the bias sign flipped accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateField, GridMismatch, InsufficientTail, NoExtremes
from .grid import ScalarField, area_weighted_mean
from .skill import Climatology, rmse

DEFAULT_THRESHOLD_SIGMAS = 2.0
BIN_WIDTH = 0.25
BIN_RANGE = (2.0, 6.0)
FIT_RANGE = (2.0, 5.0)
EES_DENOMINATOR_FACTOR = 3.0


class ExceedanceResult(NamedTuple):
    mask: np.ndarray    # (nlat, nlon) bool
    delta: np.ndarray   # standardized exceedance, NaN off-mask


@dataclass(frozen=True)
class TailCurve:
    """Binned bias-vs-exceedance curve and its weighted regression."""

    bin_centers: np.ndarray
    mean_bias: np.ndarray
    counts: np.ndarray
    alpha: float        # magnitude of the fitted negative slope
    intercept: float
    r2: float


def _signed(values: np.ndarray, tail: str) -> np.ndarray:
    if tail == "warm":
        return values
    if tail == "cold":
        return -values
    raise ValueError(f"tail must be 'warm' or 'cold', got {tail!r}")


def _clim_slices(verify: ScalarField, clim: Climatology) -> tuple[np.ndarray, np.ndarray]:
    if not verify.grid.same_geometry(clim.grid):
        raise GridMismatch("climatology grid differs from field grid")
    when = verify.valid_time
    if when is None:
        raise ValueError("exceedance needs init_time set to resolve the day of year")
    return clim.lookup(when)


def exceedance_mask(verify: ScalarField, clim: Climatology,
                    threshold_sigmas: float = DEFAULT_THRESHOLD_SIGMAS,
                    tail: str = "warm") -> ExceedanceResult:
    """Threshold mask and standardized exceedance delta = (v - mu)/sigma.

    Points with sigma = 0 (possible only for non-temperature variables,
    which have no floor) are skipped.
    """
    mu, sigma = _clim_slices(verify, clim)
    anomaly = _signed(verify.values - mu, tail)
    valid = sigma > 0.0
    delta = np.full(verify.grid.shape, np.nan)
    delta[valid] = anomaly[valid] / sigma[valid]
    mask = valid & (delta > threshold_sigmas)
    delta = np.where(mask, delta, np.nan)
    return ExceedanceResult(mask=mask, delta=delta)


def ees(forecast: ScalarField, verify: ScalarField, clim: Climatology,
        threshold_sigmas: float = DEFAULT_THRESHOLD_SIGMAS,
        tail: str = "warm") -> float:
    """Extreme Event Skill = 1 - RMSE_cond / (3 RMSE_uncond), in [0, 1].

    RMSE_cond is area-weighted over the exceedance mask; an empty mask is
    reported via NoExtremes rather than scored.
    """
    mask, _ = exceedance_mask(verify, clim, threshold_sigmas, tail)
    if not np.any(mask):
        raise NoExtremes("no grid points exceed the climatological threshold")
    uncond = rmse(forecast, verify)
    if uncond == 0.0:
        raise DegenerateField("global RMSE is zero; EES undefined")
    sq = (forecast.values - verify.values) ** 2
    cond = float(np.sqrt(area_weighted_mean(sq, verify.grid, mask=mask)))
    value = 1.0 - cond / (EES_DENOMINATOR_FACTOR * uncond)
    return float(max(0.0, min(1.0, value)))


def tail_curve(forecast: ScalarField, verify: ScalarField, clim: Climatology,
               threshold_sigmas: float = DEFAULT_THRESHOLD_SIGMAS,
               tail: str = "warm",
               bin_width: float = BIN_WIDTH,
               bin_range: tuple[float, float] = BIN_RANGE,
               fit_range: tuple[float, float] = FIT_RANGE) -> TailCurve:
    """Mean forecast bias per exceedance bin plus the attenuation fit.

    Bias is forecast - verify in the tail's sign convention, binned by
    delta in bins of `bin_width` over `bin_range`; the regression is
    weighted by bin counts and restricted to populated bins whose centers
    lie in `fit_range`. alpha is minus the fitted slope.
    """
    mask, delta = exceedance_mask(verify, clim, threshold_sigmas, tail)
    if not np.any(mask):
        raise NoExtremes("no grid points exceed the climatological threshold")
    bias = _signed(forecast.values - verify.values, tail)[mask]
    d = delta[mask]
    lo, hi = bin_range
    edges = np.arange(lo, hi + 0.5 * bin_width, bin_width)
    centers = 0.5 * (edges[:-1] + edges[1:])
    idx = np.floor((d - lo) / bin_width).astype(int)
    in_range = (idx >= 0) & (idx < centers.size)
    counts = np.bincount(idx[in_range], minlength=centers.size).astype(float)
    sums = np.bincount(idx[in_range], weights=bias[in_range], minlength=centers.size)
    mean_bias = np.full(centers.size, np.nan)
    populated = counts > 0
    mean_bias[populated] = sums[populated] / counts[populated]

    f_lo, f_hi = fit_range
    fit_sel = populated & (centers >= f_lo) & (centers <= f_hi)
    if np.count_nonzero(fit_sel) < 2:
        raise InsufficientTail("fewer than 2 populated bins in the fit range")
    x = centers[fit_sel]
    y = mean_bias[fit_sel]
    w = counts[fit_sel]
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    yhat = slope * x + intercept
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(w * (y - yhat) ** 2)) / ss_tot
    return TailCurve(bin_centers=centers, mean_bias=mean_bias, counts=counts,
                     alpha=float(-slope), intercept=float(intercept), r2=float(r2))


@dataclass(frozen=True)
class AlphaSeries:
    leads: list[int]
    alpha: list[float]
    r2: list[float]
    skipped_leads: list[int]


def alpha_evolution(curves: dict[int, TailCurve | None]) -> AlphaSeries:
    """Per-lead attenuation series; leads whose mask was empty (None) are
    flagged as skipped rather than scored."""
    if len(curves) < 2:
        raise InsufficientTail("alpha evolution needs >= 2 leads")
    leads, alphas, r2s, skipped = [], [], [], []
    for h in sorted(curves):
        c = curves[h]
        if c is None:
            skipped.append(h)
            continue
        leads.append(h)
        alphas.append(c.alpha)
        r2s.append(c.r2)
    return AlphaSeries(leads=leads, alpha=alphas, r2=r2s, skipped_leads=skipped)
