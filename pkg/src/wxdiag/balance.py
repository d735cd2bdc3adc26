"""Physical-balance diagnostics on the sphere and the composite score.

All derivatives are centered finite differences: periodic in longitude,
second-order one-sided at the first/last latitude rows. Statistics are
taken over the midlatitude band 20 <= |phi| <= 70 (the equatorial f
singularity and the polar metric degeneracy are both excluded), except
the hydrostatic check which is global minus the pole rows.

Each sub-score is max(0, 1 - R / R_max); the normalizers R_max are
configurable and default to values that put an ERA5-like state near a
composite of ~0.55.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateFlow,
    DegenerateShear,
    DegenerateThickness,
    GridMismatch,
    IncompleteBalance,
)
from .grid import LatLonGrid, ScalarField

GRAVITY = 9.80665  # m s^-2, geopotential conversion Phi = g z


@dataclass(frozen=True)
class PhysicalConstants:
    omega: float = 7.2921e-5        # rad s^-1
    r_dry: float = 287.05           # J kg^-1 K^-1
    radius_m: float = 6.371e6       # m
    f_floor: float = 1e-5           # s^-1, Coriolis magnitude cutoff

    def __post_init__(self):
        for name in ("omega", "r_dry", "radius_m", "f_floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class BalanceNormalizers:
    """R_max per sub-score; R = R_max maps to a sub-score of zero."""

    agr_max: float = 1.0
    ndr_max: float = 1.0
    thermal_max: float = 2.0
    hydro_max: float = 0.05


class BalanceComponent(NamedTuple):
    ratio: float
    score: float


@dataclass(frozen=True)
class BalanceReport:
    pcs_geo: float
    pcs_ndiv: float
    pcs_thermal: float
    pcs_hydro: float
    pcs_composite: float
    agr: float
    ndr: float
    thermal_ratio: float
    hydro_rel_err: float


def _d_dlon(field: np.ndarray, grid: LatLonGrid) -> np.ndarray:
    """Centered d/dlambda (per radian) with periodic wraparound."""
    dlon = np.deg2rad(grid.lons[1] - grid.lons[0])
    return (np.roll(field, -1, axis=1) - np.roll(field, 1, axis=1)) / (2.0 * dlon)


def _d_dlat(field: np.ndarray, grid: LatLonGrid) -> np.ndarray:
    """d/dphi (per radian); second-order one-sided rows at the boundaries."""
    return np.gradient(field, grid.lat_radians(), axis=0, edge_order=2)


def sphere_gradient(field: np.ndarray, grid: LatLonGrid,
                    constants: PhysicalConstants | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) on the sphere: d/dx = d/dlambda / (a cos phi), d/dy = d/dphi / a.

    Rows where cos(phi) vanishes come back non-finite in the x component;
    callers mask them out (balance statistics never include the poles).
    """
    constants = constants or PhysicalConstants()
    a = constants.radius_m
    cos = grid.cos_lat()[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ddx = _d_dlon(field, grid) / (a * cos)
    ddy = _d_dlat(field, grid) / a
    return ddx, ddy


def divergence(u: np.ndarray, v: np.ndarray, grid: LatLonGrid,
               constants: PhysicalConstants | None = None) -> np.ndarray:
    """Spherical divergence (1/(a cos phi)) [du/dlambda + d(v cos phi)/dphi]."""
    constants = constants or PhysicalConstants()
    a = constants.radius_m
    cos = grid.cos_lat()[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return (_d_dlon(u, grid) + _d_dlat(v * cos, grid)) / (a * cos)


def vorticity(u: np.ndarray, v: np.ndarray, grid: LatLonGrid,
              constants: PhysicalConstants | None = None) -> np.ndarray:
    """Vertical relative vorticity (1/(a cos phi)) [dv/dlambda - d(u cos phi)/dphi]."""
    constants = constants or PhysicalConstants()
    a = constants.radius_m
    cos = grid.cos_lat()[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return (_d_dlon(v, grid) - _d_dlat(u * cos, grid)) / (a * cos)


def midlatitude_mask(grid: LatLonGrid, constants: PhysicalConstants | None = None) -> np.ndarray:
    """20 <= |phi| <= 70 with |f| >= f_floor, as an (nlat, nlon) mask."""
    constants = constants or PhysicalConstants()
    a = np.abs(grid.lats)
    rows = (a >= 20.0) & (a <= 70.0)
    rows &= np.abs(grid.coriolis(constants.omega)) >= constants.f_floor
    return np.repeat(rows[:, None], grid.nlon, axis=1)


def _masked_mean(values: np.ndarray, grid: LatLonGrid, mask: np.ndarray) -> float:
    w = np.where(mask, grid.area_weights(), 0.0)
    total = w.sum()
    if total <= 0:
        raise GridMismatch("balance mask selects no area")
    return float((w * values).sum() / total)


def _check_grids(*fields: ScalarField) -> LatLonGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if not grid.same_geometry(f.grid):
            raise GridMismatch("balance inputs are on different grids")
    return grid


def _score(ratio: float, r_max: float) -> float:
    if not np.isfinite(ratio):
        return 0.0
    return float(max(0.0, 1.0 - ratio / r_max))


def geostrophic_score(u: ScalarField, v: ScalarField, z: ScalarField,
                      constants: PhysicalConstants | None = None,
                      normalizers: BalanceNormalizers | None = None) -> BalanceComponent:
    """Ageostrophic wind ratio over midlatitudes and its sub-score.

    AGR = sqrt(<|v - v_g|^2> / <|v|^2>) with v_g = (1/f) k x grad(g z).
    """
    constants = constants or PhysicalConstants()
    normalizers = normalizers or BalanceNormalizers()
    grid = _check_grids(u, v, z)
    mask = midlatitude_mask(grid, constants)
    phi = GRAVITY * z.values
    dphi_dx, dphi_dy = sphere_gradient(phi, grid, constants)
    f = grid.coriolis(constants.omega)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        u_g = -dphi_dy / f
        v_g = dphi_dx / f
    mismatch = (u.values - u_g) ** 2 + (v.values - v_g) ** 2
    speed2 = u.values**2 + v.values**2
    mismatch = np.where(mask, mismatch, 0.0)
    num = _masked_mean(mismatch, grid, mask)
    den = _masked_mean(np.where(mask, speed2, 0.0), grid, mask)
    if den == 0.0:
        agr = 0.0 if num == 0.0 else np.inf
    else:
        agr = float(np.sqrt(num / den))
    return BalanceComponent(agr, _score(agr, normalizers.agr_max))


def nondivergence_score(u: ScalarField, v: ScalarField,
                        constants: PhysicalConstants | None = None,
                        normalizers: BalanceNormalizers | None = None) -> BalanceComponent:
    """NDR = <div^2> / <zeta^2> over midlatitudes and its sub-score."""
    constants = constants or PhysicalConstants()
    normalizers = normalizers or BalanceNormalizers()
    grid = _check_grids(u, v)
    mask = midlatitude_mask(grid, constants)
    div = divergence(u.values, v.values, grid, constants)
    zeta = vorticity(u.values, v.values, grid, constants)
    den = _masked_mean(np.where(mask, zeta**2, 0.0), grid, mask)
    if den == 0.0:
        raise DegenerateFlow("vorticity is zero over the midlatitude mask")
    num = _masked_mean(np.where(mask, div**2, 0.0), grid, mask)
    ndr = float(num / den)
    return BalanceComponent(ndr, _score(ndr, normalizers.ndr_max))


def thermal_wind_score(u500: ScalarField, v500: ScalarField,
                       u850: ScalarField, v850: ScalarField,
                       t_mid: ScalarField,
                       constants: PhysicalConstants | None = None,
                       normalizers: BalanceNormalizers | None = None) -> BalanceComponent:
    """Thermal-wind mismatch ratio over midlatitudes and its sub-score.

    Predicted shear (500 minus 850) is (R/f) k x grad(T) * ln(850/500),
    from f dv_g/dlnp = -R k x grad(T) integrated across the layer.
    """
    constants = constants or PhysicalConstants()
    normalizers = normalizers or BalanceNormalizers()
    grid = _check_grids(u500, v500, u850, v850, t_mid)
    mask = midlatitude_mask(grid, constants)
    dlnp = np.log(850.0 / 500.0)
    dt_dx, dt_dy = sphere_gradient(t_mid.values, grid, constants)
    f = grid.coriolis(constants.omega)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        du_tw = -(constants.r_dry / f) * dt_dy * dlnp
        dv_tw = (constants.r_dry / f) * dt_dx * dlnp
    du_act = u500.values - u850.values
    dv_act = v500.values - v850.values
    den = _masked_mean(np.where(mask, du_act**2 + dv_act**2, 0.0), grid, mask)
    if den == 0.0:
        raise DegenerateShear("actual shear is zero over the midlatitude mask")
    mismatch = (du_act - du_tw) ** 2 + (dv_act - dv_tw) ** 2
    num = _masked_mean(np.where(mask, mismatch, 0.0), grid, mask)
    ratio = float(np.sqrt(num / den))
    return BalanceComponent(ratio, _score(ratio, normalizers.thermal_max))


def hydrostatic_score(z500: ScalarField, z850: ScalarField, t_layer: ScalarField,
                      constants: PhysicalConstants | None = None,
                      normalizers: BalanceNormalizers | None = None) -> BalanceComponent:
    """Hydrostatic thickness relative error (global, poles excluded).

    Expected thickness R * T * ln(850/500) vs actual g * (z500 - z850);
    dry temperature stands in for virtual temperature.
    """
    constants = constants or PhysicalConstants()
    normalizers = normalizers or BalanceNormalizers()
    grid = _check_grids(z500, z850, t_layer)
    mask = np.repeat((np.abs(grid.lats) < 90.0)[:, None], grid.nlon, axis=1)
    expected = constants.r_dry * t_layer.values * np.log(850.0 / 500.0)
    actual = GRAVITY * (z500.values - z850.values)
    den = _masked_mean(np.where(mask, np.abs(actual), 0.0), grid, mask)
    if den == 0.0:
        raise DegenerateThickness("geopotential thickness is zero")
    num = _masked_mean(np.where(mask, np.abs(actual - expected), 0.0), grid, mask)
    rel = float(num / den)
    return BalanceComponent(rel, _score(rel, normalizers.hydro_max))


def pcs_composite(geo: BalanceComponent | None, ndiv: BalanceComponent | None,
                  thermal: BalanceComponent | None, hydro: BalanceComponent | None) -> BalanceReport:
    """Equally weighted mean of the four sub-scores, raw ratios retained."""
    parts = {"geostrophic": geo, "non-divergence": ndiv,
             "thermal wind": thermal, "hydrostatic": hydro}
    missing = [name for name, c in parts.items() if c is None]
    if missing:
        raise IncompleteBalance(f"missing sub-scores: {', '.join(missing)}")
    scores = [geo.score, ndiv.score, thermal.score, hydro.score]
    return BalanceReport(
        pcs_geo=geo.score,
        pcs_ndiv=ndiv.score,
        pcs_thermal=thermal.score,
        pcs_hydro=hydro.score,
        pcs_composite=float(np.mean(scores)),
        agr=geo.ratio,
        ndr=ndiv.ratio,
        thermal_ratio=thermal.ratio,
        hydro_rel_err=hydro.ratio,
    )
