"""Multi-model shared-error diagnostics: ECR, pairwise correlation, MED.

All global statistics use cos(phi) area weighting, including the means
removed inside the pairwise Pearson correlation. Error fields are
correlated raw (not as residuals about the multi-model mean).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from itertools import combinations

import numpy as np

from .errors import DegenerateErrors, DegenerateField, GridMismatch, InsufficientEnsemble
from .grid import LatLonGrid, ScalarField
from .spectral import Spectrum, isotropic_spectrum


@dataclass
class ErrorEnsemble:
    """Per-model error fields (forecast minus verification) on one grid."""

    grid: LatLonGrid
    errors: dict[str, np.ndarray]
    variable: str = ""
    valid_time: datetime | None = None
    lead_hours: int = 0

    def __post_init__(self):
        if len(self.errors) < 2:
            raise InsufficientEnsemble(f"need >= 2 models, got {len(self.errors)}")
        for model, e in self.errors.items():
            if e.shape != self.grid.shape:
                raise GridMismatch(f"error field for {model} has shape {e.shape}")

    @classmethod
    def from_fields(cls, forecasts: list[ScalarField], verify: ScalarField) -> "ErrorEnsemble":
        grid = verify.grid
        errors = {}
        for f in forecasts:
            if not grid.same_geometry(f.grid):
                raise GridMismatch(f"forecast grid for {f.model} differs from verification")
            errors[f.model] = f.values - verify.values
        return cls(grid=grid, errors=errors, variable=verify.variable,
                   valid_time=verify.valid_time, lead_hours=forecasts[0].lead_hours)

    @property
    def models(self) -> list[str]:
        return sorted(self.errors)


def _weighted_mean(values: np.ndarray, w: np.ndarray) -> float:
    return float((w * values).sum() / w.sum())


def ecr(errors: ErrorEnsemble) -> float:
    """Error Consensus Ratio in (0, 1].

    ECR = <|ebar|^2> / (<|ebar|^2> + (1/M) sum_m <|eps_m|^2>) with ebar the
    model-mean error, eps_m the residuals, and <.> the area-weighted
    global mean.
    """
    w = errors.grid.area_weights()
    stack = np.stack([errors.errors[m] for m in errors.models])
    ebar = stack.mean(axis=0)
    shared = _weighted_mean(ebar**2, w)
    resid = stack - ebar
    specific = float(np.mean([_weighted_mean(r**2, w) for r in resid]))
    total = shared + specific
    if total == 0.0:
        raise DegenerateErrors("all error fields are identically zero")
    return float(shared / total)


def weighted_pearson(a: np.ndarray, b: np.ndarray, grid: LatLonGrid) -> float:
    """Pearson correlation with area-weighted moments."""
    w = grid.area_weights()
    a = a - _weighted_mean(a, w)
    b = b - _weighted_mean(b, w)
    va = _weighted_mean(a * a, w)
    vb = _weighted_mean(b * b, w)
    if va == 0.0 or vb == 0.0:
        raise DegenerateField("zero-variance error field in correlation")
    return float(_weighted_mean(a * b, w) / np.sqrt(va * vb))


def pairwise_error_correlation(errors: ErrorEnsemble) -> float:
    """Mean area-weighted Pearson correlation over all model pairs."""
    models = errors.models
    rs = [
        weighted_pearson(errors.errors[m1], errors.errors[m2], errors.grid)
        for m1, m2 in combinations(models, 2)
    ]
    return float(np.mean(rs))


@dataclass
class MedResult:
    """Mean Bray-Curtis-style spectral dissimilarity per shell for one
    pair group; shells where every pair had zero energy are flagged."""

    wavenumbers: np.ndarray
    med: np.ndarray
    defined: np.ndarray
    group: str = "all"
    n_pairs: int = 0


def family_pairs(models: list[str], model_meta: dict[str, dict[str, str]],
                 mode: str) -> list[tuple[str, str]]:
    """Model pairs sharing ("within") or differing in ("cross") family tags."""
    if mode not in ("within", "cross"):
        raise ValueError("mode must be 'within' or 'cross'")
    fam = {m: model_meta.get(m, {}).get("family", "") for m in models}
    pairs = []
    for m1, m2 in combinations(sorted(models), 2):
        same = fam[m1] == fam[m2] and fam[m1] != ""
        if (mode == "within") == same:
            pairs.append((m1, m2))
    return pairs


def med(errors: ErrorEnsemble, pairs: list[tuple[str, str]] | None = None,
        group: str = "all") -> MedResult:
    """Model Error Divergence per wavenumber, averaged over selected pairs.

    MED(k) = mean over pairs of |E1 - E2| / (E1 + E2) on each pair's error
    spectra; a shell where both spectra vanish is skipped for that pair.
    """
    models = errors.models
    if pairs is None:
        pairs = list(combinations(models, 2))
    if not pairs:
        raise InsufficientEnsemble("no model pairs selected")
    spectra: dict[str, Spectrum] = {}
    for m in {p for pair in pairs for p in pair}:
        if m not in errors.errors:
            raise GridMismatch(f"pair references unknown model {m!r}")
        f = ScalarField(grid=errors.grid, values=errors.errors[m],
                        variable=errors.variable or "error", model=m)
        spectra[m] = isotropic_spectrum(f)
    k = spectra[pairs[0][0]].wavenumbers
    acc = np.zeros(k.size)
    counts = np.zeros(k.size)
    for m1, m2 in pairs:
        e1, e2 = spectra[m1].energy, spectra[m2].energy
        tot = e1 + e2
        ok = tot > 0.0
        acc[ok] += np.abs(e1[ok] - e2[ok]) / tot[ok]
        counts[ok] += 1
    defined = counts > 0
    values = np.full(k.size, np.nan)
    values[defined] = acc[defined] / counts[defined]
    return MedResult(wavenumbers=k.copy(), med=values, defined=defined,
                     group=group, n_pairs=len(pairs))
