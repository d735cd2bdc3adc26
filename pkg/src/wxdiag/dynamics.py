"""Error-growth fitting and kinetic-energy drift diagnostics.

The effective Lyapunov exponent is the least-squares slope of log RMSE
versus lead time in days (default window: days 1-5, before saturation);
the KE drift rate gamma comes from the same kind of fit on the
normalized kinetic-energy ratio series over the full window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSeries, MissingComponent
from .grid import ScalarField, area_weighted_mean
from .skill import _check_pair

LN2 = float(np.log(2.0))
TAU_D_NORM_HOURS = 48.0  # 2-day reference doubling time


@dataclass(frozen=True)
class GrowthFit:
    lambda_eff: float        # per day
    tau_d_hours: float
    tau_d_norm: float        # min(1, tau_d_hours / 48)
    fit_window: tuple[float, float]
    r2: float


@dataclass(frozen=True)
class KeDrift:
    gamma: float             # per day, signed
    window_days: float
    asi: float               # max(0, min(1, 1 - |gamma| T / ln 2))


def _log_slope(days: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """(slope, r2) of ln(values) against days."""
    y = np.log(values)
    slope, intercept = np.polyfit(days, y, 1)
    resid = y - (slope * days + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), r2


def fit_lyapunov(rmse_series: dict[int, float],
                 window: tuple[float, float] = (1.0, 5.0)) -> GrowthFit:
    """Fit the exponential error-growth phase of an RMSE(lead) series.

    rmse_series maps lead_hours -> RMSE. Needs >= 3 positive samples with
    lead days inside the window. A nonpositive slope means no measurable
    growth: the doubling time saturates at its normalized maximum of 1.
    """
    lo, hi = window
    leads = sorted(rmse_series)
    days = np.array([h / 24.0 for h in leads])
    values = np.array([rmse_series[h] for h in leads])
    sel = (days >= lo) & (days <= hi)
    if np.count_nonzero(sel) < 3:
        raise InvalidSeries(f"need >= 3 leads within days [{lo}, {hi}]")
    if np.any(values[sel] <= 0.0) or not np.all(np.isfinite(values[sel])):
        raise InvalidSeries("RMSE values must be positive and finite")
    lam, r2 = _log_slope(days[sel], values[sel])
    if lam > 0.0:
        tau_hours = LN2 / lam * 24.0
        tau_norm = min(1.0, tau_hours / TAU_D_NORM_HOURS)
    else:
        tau_hours = float("inf")
        tau_norm = 1.0
    return GrowthFit(lambda_eff=lam, tau_d_hours=tau_hours, tau_d_norm=tau_norm,
                     fit_window=(lo, hi), r2=r2)


def ke_series(u_by_lead: dict[int, ScalarField],
              v_by_lead: dict[int, ScalarField]) -> dict[int, float]:
    """Global kinetic-energy ratio series KE(tau)/KE(first lead).

    KE is the area-weighted mean of (u^2 + v^2)/2 per lead; u and v must
    be paired on the same grid at every lead.
    """
    leads = sorted(u_by_lead)
    if sorted(v_by_lead) != leads:
        missing = sorted(set(u_by_lead) ^ set(v_by_lead))
        raise MissingComponent(f"unpaired wind components at leads {missing}")
    if not leads:
        raise InvalidSeries("empty KE series")
    ke = {}
    for h in leads:
        u, v = u_by_lead[h], v_by_lead[h]
        _check_pair(u, v)
        ke[h] = area_weighted_mean(0.5 * (u.values**2 + v.values**2), u.grid)
    ref = ke[leads[0]]
    if ref <= 0.0:
        raise InvalidSeries("reference kinetic energy is nonpositive")
    return {h: float(k / ref) for h, k in ke.items()}


def asi(ke_ratio_series: dict[int, float],
        window_days: float | None = None) -> KeDrift:
    """Autoregressive Stability Index from a KE ratio series.

    gamma is the log-slope of the ratio over lead days in [0, T]; the
    default T is the series' maximum lead. ASI = 1 - |gamma| T / ln 2,
    clamped to [0, 1]; dissipation and inflation of equal magnitude score
    identically.
    """
    leads = sorted(ke_ratio_series)
    if window_days is None:
        window_days = leads[-1] / 24.0
    days = np.array([h / 24.0 for h in leads])
    ratios = np.array([ke_ratio_series[h] for h in leads])
    sel = days <= window_days + 1e-12
    if np.count_nonzero(sel) < 3:
        raise InvalidSeries("need >= 3 leads within the ASI window")
    if np.any(ratios[sel] <= 0.0) or not np.all(np.isfinite(ratios[sel])):
        raise InvalidSeries("KE ratios must be positive and finite")
    gamma, _ = _log_slope(days[sel], ratios[sel])
    value = 1.0 - abs(gamma) * window_days / LN2
    return KeDrift(gamma=gamma, window_days=float(window_days),
                   asi=float(max(0.0, min(1.0, value))))
