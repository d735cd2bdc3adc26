"""Latitude-weighted isotropic FFT spectra and spectrum-derived metrics.

The field is multiplied by sqrt(cos phi) (the discrete analogue of the
spherical area element), its mean removed, and the squared magnitudes of
the 2D DFT coefficients binned into integer isotropic shells
k = round(sqrt(kx^2 + ky^2)) with kx, ky in cycles per domain. With this
normalization Parseval holds: the shell sum equals the variance of the
weighted, mean-removed field.

Spectra are truncated at k_max = floor(min(nlat, nlon) / 2), the largest
radius with complete angular coverage; band-limited fields lose nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    GridTooCoarse,
    InconsistentVariance,
    InsufficientEnsemble,
    InsufficientSpectrum,
    InvalidField,
    NonpositiveEnergy,
    ShellMismatch,
)
from .grid import LatLonGrid, ScalarField

SFI_K_RANGE = (1, 200)
EFF_RES_NORM = 300.0

LOSS_FAMILIES = ("mse", "crps", "score")


@dataclass(frozen=True)
class Spectrum:
    """Isotropic energy spectrum on contiguous integer shells k = 1..k_max."""

    wavenumbers: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.wavenumbers, dtype=int)
        e = np.asarray(self.energy, dtype=float)
        if k.ndim != 1 or e.shape != k.shape or k.size == 0:
            raise InvalidField("spectrum needs matching 1D wavenumber/energy arrays")
        if k[0] != 1 or np.any(np.diff(k) != 1):
            raise InvalidField("wavenumbers must be contiguous integers starting at 1")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise InvalidField("shell energies must be finite and nonnegative")
        object.__setattr__(self, "wavenumbers", k)
        object.__setattr__(self, "energy", e)

    @property
    def k_max(self) -> int:
        return int(self.wavenumbers[-1])

    def total(self) -> float:
        return float(self.energy.sum())


@dataclass(frozen=True)
class ConditionalVarianceSpectrum:
    """Shell-binned conditional (ensemble) variance Var_k at one lead."""

    wavenumbers: np.ndarray
    variance: np.ndarray
    lead_hours: int = 0

    def __post_init__(self):
        k = np.asarray(self.wavenumbers, dtype=int)
        v = np.asarray(self.variance, dtype=float)
        if k.shape != v.shape or k.ndim != 1:
            raise InvalidField("variance spectrum needs matching 1D arrays")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidField("shell variances must be finite and nonnegative")
        object.__setattr__(self, "wavenumbers", k)
        object.__setattr__(self, "variance", v)


class RatioResult(NamedTuple):
    """Elementwise spectral ratio; shells with zero verification energy are
    flagged (defined = False) and carry NaN."""

    wavenumbers: np.ndarray
    ratio: np.ndarray
    defined: np.ndarray


class PowerLawFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def grid_k_max(grid: LatLonGrid) -> int:
    return min(grid.nlat, grid.nlon) // 2


def _shell_index(nlat: int, nlon: int) -> np.ndarray:
    ky = np.fft.fftfreq(nlat) * nlat
    kx = np.fft.fftfreq(nlon) * nlon
    radius = np.hypot(ky[:, None], kx[None, :])
    return np.rint(radius).astype(int)


def _weighted_coefficients(field: ScalarField) -> np.ndarray:
    """2D DFT of the sqrt(cos phi)-weighted, mean-removed field.

    The area-weighted mean is removed from the field before weighting (so
    constants map to an identically zero spectrum); the residual DC of the
    weighted field lands in shell 0, which is discarded.
    """
    grid = field.grid
    dlat = np.diff(grid.lats)
    if not np.allclose(dlat, dlat[0], rtol=1e-9, atol=1e-9):
        raise InvalidField("spectral analysis requires uniform latitude spacing")
    w = grid.area_weights()
    anom = field.values - float((w * field.values).mean())
    g = anom * np.sqrt(grid.cos_lat())[:, None]
    g = g - g.mean()
    return np.fft.fft2(g)


def isotropic_spectrum(field: ScalarField) -> Spectrum:
    """Isotropic wavenumber spectrum of one field.

    Raises GridTooCoarse when the grid supports fewer than 8 shells.
    """
    grid = field.grid
    k_max = grid_k_max(grid)
    if k_max < 8:
        raise GridTooCoarse(f"grid {grid.shape} supports only k_max={k_max} (< 8)")
    coeffs = _weighted_coefficients(field)
    power = np.abs(coeffs) ** 2 / float(grid.nlat * grid.nlon) ** 2
    shells = _shell_index(grid.nlat, grid.nlon)
    binned = np.bincount(shells.ravel(), weights=power.ravel())
    energy = np.zeros(k_max)
    hi = min(k_max + 1, binned.size)
    energy[: hi - 1] = binned[1:hi]
    return Spectrum(wavenumbers=np.arange(1, k_max + 1), energy=energy)


def mean_spectrum(spectra: Iterable[Spectrum]) -> Spectrum:
    """Energy-average spectra (e.g. over initialization dates)."""
    spectra = list(spectra)
    if not spectra:
        raise InsufficientSpectrum("no spectra to average")
    k = spectra[0].wavenumbers
    for s in spectra[1:]:
        if not np.array_equal(s.wavenumbers, k):
            raise ShellMismatch("spectra do not share wavenumber support")
    energy = np.mean([s.energy for s in spectra], axis=0)
    return Spectrum(wavenumbers=k.copy(), energy=energy)


def _check_support(forecast: Spectrum, verify: Spectrum) -> None:
    if not np.array_equal(forecast.wavenumbers, verify.wavenumbers):
        raise ShellMismatch(
            f"shell support differs: k_max {forecast.k_max} vs {verify.k_max}"
        )


def spectral_ratio(forecast: Spectrum, verify: Spectrum) -> RatioResult:
    """Elementwise E_f(k) / E_a(k); zero-denominator shells excluded."""
    _check_support(forecast, verify)
    defined = verify.energy > 0.0
    ratio = np.full(verify.energy.shape, np.nan)
    ratio[defined] = forecast.energy[defined] / verify.energy[defined]
    return RatioResult(forecast.wavenumbers.copy(), ratio, defined)


def sfi(forecast: Spectrum, verify: Spectrum) -> float:
    """Spectral Fidelity Index in [0, 1].

    1 - (1/2) * mean over K of |log10(E_f/E_a)| with
    K = {k : 1 <= k <= 200, E_a > 0, E_f > 0}, clamped to [0, 1].
    """
    _check_support(forecast, verify)
    lo, hi = SFI_K_RANGE
    in_range = (forecast.wavenumbers >= lo) & (forecast.wavenumbers <= hi)
    usable = in_range & (forecast.energy > 0.0) & (verify.energy > 0.0)
    if not np.any(usable):
        raise InsufficientSpectrum("no shells with positive energy in k = 1..200")
    log_ratio = np.log10(forecast.energy[usable] / verify.energy[usable])
    value = 1.0 - 0.5 * float(np.mean(np.abs(log_ratio)))
    return float(min(1.0, max(0.0, value)))


def effective_resolution(forecast: Spectrum, verify: Spectrum) -> float:
    """Normalized effective resolution min(1, l_eff / 300).

    l_eff is the highest shell with E_f/E_a >= 0.5 (0 if none). The max is
    taken literally, so recoveries above the threshold count; an inflated
    spectrum can saturate this metric despite low SFI.
    """
    _check_support(forecast, verify)
    if forecast.wavenumbers.size == 0:
        raise InsufficientSpectrum("empty spectrum")
    defined = verify.energy > 0.0
    qualifying = np.zeros(defined.shape, dtype=bool)
    qualifying[defined] = forecast.energy[defined] / verify.energy[defined] >= 0.5
    if not np.any(qualifying):
        return 0.0
    l_eff = int(forecast.wavenumbers[qualifying].max())
    return float(min(1.0, l_eff / EFF_RES_NORM))


def fit_power_law(spectrum: Spectrum, k_lo: int, k_hi: int) -> PowerLawFit:
    """Least-squares fit of log E vs log k over shells [k_lo, k_hi]."""
    if not (k_hi > k_lo >= 1):
        raise ValueError(f"need k_hi > k_lo >= 1, got [{k_lo}, {k_hi}]")
    sel = (spectrum.wavenumbers >= k_lo) & (spectrum.wavenumbers <= k_hi)
    if np.count_nonzero(sel) < 2:
        raise InsufficientSpectrum(f"fewer than 2 shells in [{k_lo}, {k_hi}]")
    energy = spectrum.energy[sel]
    if np.any(energy <= 0.0):
        raise NonpositiveEnergy(f"nonpositive shell energy inside [{k_lo}, {k_hi}]")
    x = np.log(spectrum.wavenumbers[sel].astype(float))
    y = np.log(energy)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return PowerLawFit(float(slope), float(intercept), float(r2))


def conditional_variance_spectrum(ensemble: list[ScalarField]) -> ConditionalVarianceSpectrum:
    """Shell-binned variance of member DFT coefficients about the mean.

    The 1/M normalization makes the law of total variance exact: the mean
    per-member spectrum minus the ensemble-mean-field spectrum equals this
    variance spectrum, shell by shell.
    """
    if len(ensemble) < 2:
        raise InsufficientEnsemble(f"need >= 2 members, got {len(ensemble)}")
    grid = ensemble[0].grid
    for m in ensemble[1:]:
        if not grid.same_geometry(m.grid):
            raise ShellMismatch("ensemble members are on different grids")
    k_max = grid_k_max(grid)
    if k_max < 8:
        raise GridTooCoarse(f"grid {grid.shape} supports only k_max={k_max} (< 8)")
    coeffs = np.stack([_weighted_coefficients(m) for m in ensemble])
    mean_coeff = coeffs.mean(axis=0)
    dev_power = np.mean(np.abs(coeffs - mean_coeff) ** 2, axis=0)
    dev_power /= float(grid.nlat * grid.nlon) ** 2
    shells = _shell_index(grid.nlat, grid.nlon)
    binned = np.bincount(shells.ravel(), weights=dev_power.ravel())
    variance = np.zeros(k_max)
    hi = min(k_max + 1, binned.size)
    variance[: hi - 1] = binned[1:hi]
    return ConditionalVarianceSpectrum(
        wavenumbers=np.arange(1, k_max + 1),
        variance=variance,
        lead_hours=ensemble[0].lead_hours,
    )


def predicted_sfi(
    loss: str,
    var_spec: ConditionalVarianceSpectrum | None,
    truth: Spectrum,
    sample_noise: Spectrum | None = None,
) -> float:
    """Pre-training SFI prediction for a loss family.

    R_mse(k) = 1 - Var_k/E_true(k); R_crps(k) = 1;
    R_score(k) = 1 + sigma_sample^2(k)/E_true(k). The predicted SFI applies
    the SFI formula to R over k = 1..200 and is clamped to [0, 1].
    """
    if loss not in LOSS_FAMILIES:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSS_FAMILIES}")
    lo, hi = SFI_K_RANGE
    in_range = (truth.wavenumbers >= lo) & (truth.wavenumbers <= hi)
    usable = in_range & (truth.energy > 0.0)
    if not np.any(usable):
        raise InsufficientSpectrum("truth spectrum has no positive shells in k = 1..200")
    if loss == "crps":
        return 1.0
    if loss == "mse":
        if var_spec is None:
            raise ValueError("mse prediction needs a conditional variance spectrum")
        if not np.array_equal(var_spec.wavenumbers, truth.wavenumbers):
            raise ShellMismatch("variance and truth spectra do not share support")
        var = var_spec.variance[usable]
        e_true = truth.energy[usable]
        if np.any(var > e_true * (1.0 + 1e-9)):
            raise InconsistentVariance("Var_k exceeds E_true(k)")
        ratio = 1.0 - np.minimum(var / e_true, 1.0)
    else:
        if sample_noise is None:
            raise ValueError("score prediction needs a sampling-noise spectrum")
        if not np.array_equal(sample_noise.wavenumbers, truth.wavenumbers):
            raise ShellMismatch("noise and truth spectra do not share support")
        ratio = 1.0 + sample_noise.energy[usable] / truth.energy[usable]
    with np.errstate(divide="ignore"):
        log_ratio = np.abs(np.log10(ratio))
    value = 1.0 - 0.5 * float(np.mean(log_ratio))
    if not np.isfinite(value):
        return 0.0
    return float(min(1.0, max(0.0, value)))
