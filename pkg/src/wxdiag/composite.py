"""Composite scoring: HMAS, weight sensitivity, metric correlation,
Pareto dominance filtering and the Spectral Feasibility Score.

The six HMAS dimensions, in fixed order, are (sfi, l_eff, tau_d, ees,
pcs, asi), each in [0, 1]. Rankings treat higher HMAS as better and use
midranks for ties; Kendall's W applies the midrank tie correction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateRanks,
    InvalidInformationBudget,
    OutOfRangeMetric,
)
from .spectral import ConditionalVarianceSpectrum, Spectrum, predicted_sfi

METRIC_NAMES = ("sfi", "l_eff", "tau_d", "ees", "pcs", "asi")


@dataclass(frozen=True)
class WeightScheme:
    name: str
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(METRIC_NAMES):
            raise ValueError(f"need {len(METRIC_NAMES)} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(w)}")
        object.__setattr__(self, "weights", w)


DEFAULT_SCHEME = WeightScheme("default", (0.20, 0.15, 0.15, 0.15, 0.15, 0.20))
# The non-default schemes carry no standard weight values; these are this
# package's choices and are configurable.
NAMED_SCHEMES = (
    DEFAULT_SCHEME,
    WeightScheme("equal", (1 / 6,) * 6),
    WeightScheme("accuracy", (0.15, 0.20, 0.25, 0.10, 0.10, 0.20)),
    WeightScheme("extremes", (0.15, 0.10, 0.10, 0.40, 0.15, 0.10)),
    WeightScheme("stability", (0.10, 0.10, 0.10, 0.10, 0.20, 0.40)),
)


@dataclass(frozen=True)
class HmasRecord:
    model: str
    lead_hours: int
    sfi: float
    l_eff: float
    tau_d: float
    ees: float
    pcs: float
    asi: float
    hmas: float
    scheme: str = "default"

    def metrics(self) -> tuple[float, ...]:
        return (self.sfi, self.l_eff, self.tau_d, self.ees, self.pcs, self.asi)


def hmas(metrics: Sequence[float] | Mapping[str, float],
         weights: WeightScheme = DEFAULT_SCHEME,
         model: str = "", lead_hours: int = 0) -> HmasRecord:
    """Weighted sum of the six assessment metrics."""
    if isinstance(metrics, Mapping):
        values = tuple(float(metrics[name]) for name in METRIC_NAMES)
    else:
        values = tuple(float(x) for x in metrics)
    if len(values) != len(METRIC_NAMES):
        raise OutOfRangeMetric(f"need {len(METRIC_NAMES)} metrics, got {len(values)}")
    for name, x in zip(METRIC_NAMES, values):
        if not (0.0 <= x <= 1.0) or not np.isfinite(x):
            raise OutOfRangeMetric(f"{name} = {x} outside [0, 1]")
    score = float(np.dot(weights.weights, values))
    return HmasRecord(model=model, lead_hours=lead_hours,
                      sfi=values[0], l_eff=values[1], tau_d=values[2],
                      ees=values[3], pcs=values[4], asi=values[5],
                      hmas=score, scheme=weights.name)


def midranks(values: Sequence[float]) -> np.ndarray:
    """Rank 1 = largest value; tied values share the average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(-v, kind="stable")
    ranks = np.empty(v.size)
    i = 0
    pos = 1
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        avg = (pos + pos + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        pos += j - i + 1
        i = j + 1
    return ranks


def kendalls_w(rank_rows: np.ndarray) -> float:
    """Kendall's coefficient of concordance with midrank tie correction.

    rank_rows has shape (m judges, n objects) of midranks per judge.
    W = 12 S / (m^2 (n^3 - n) - m T) with S the squared deviation of rank
    sums about their mean and T the summed tie corrections.
    """
    r = np.asarray(rank_rows, dtype=float)
    m, n = r.shape
    totals = r.sum(axis=0)
    s = float(np.sum((totals - m * (n + 1) / 2.0) ** 2))
    t = 0.0
    for row in r:
        _, counts = np.unique(row, return_counts=True)
        t += float(np.sum(counts.astype(float) ** 3 - counts))
    denom = m * m * (n**3 - n) - m * t
    if denom <= 0.0:
        raise DegenerateRanks("all models tied under all schemes")
    return float(12.0 * s / denom)


class SensitivityResult(NamedTuple):
    ranks: dict[str, dict[str, float]]   # scheme -> model -> midrank
    scores: dict[str, dict[str, float]]  # scheme -> model -> HMAS
    kendall_w: float


def weight_sensitivity(metrics_by_model: Mapping[str, Sequence[float]],
                       schemes: Sequence[WeightScheme] = NAMED_SCHEMES) -> SensitivityResult:
    """HMAS rankings per weighting scheme plus their Kendall concordance."""
    models = sorted(metrics_by_model)
    if len(schemes) < 2:
        raise DegenerateRanks("need >= 2 weighting schemes")
    if len(models) < 3:
        raise DegenerateRanks("need >= 3 models")
    ranks: dict[str, dict[str, float]] = {}
    scores: dict[str, dict[str, float]] = {}
    rank_rows = []
    for scheme in schemes:
        vals = [hmas(metrics_by_model[m], scheme, model=m).hmas for m in models]
        row = midranks(vals)
        rank_rows.append(row)
        ranks[scheme.name] = dict(zip(models, row.tolist()))
        scores[scheme.name] = dict(zip(models, vals))
    w = kendalls_w(np.asarray(rank_rows))
    return SensitivityResult(ranks=ranks, scores=scores, kendall_w=w)


class CorrelationResult(NamedTuple):
    matrix: np.ndarray           # 6x6, NaN rows/cols for zero-variance metrics
    defined: np.ndarray          # per-metric bool
    mean_abs_offdiag: float


def metric_correlation(records: Sequence[Sequence[float]]) -> CorrelationResult:
    """Pearson correlation of each metric pair across models."""
    data = np.asarray(records, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(METRIC_NAMES):
        raise OutOfRangeMetric(f"records must be (n_models, {len(METRIC_NAMES)})")
    if data.shape[0] < 3:
        raise OutOfRangeMetric("need >= 3 models for metric correlation")
    centered = data - data.mean(axis=0)
    std = centered.std(axis=0)
    defined = std > 0.0
    n_metrics = data.shape[1]
    matrix = np.full((n_metrics, n_metrics), np.nan)
    for i in range(n_metrics):
        for j in range(n_metrics):
            if defined[i] and defined[j]:
                cov = float(np.mean(centered[:, i] * centered[:, j]))
                matrix[i, j] = cov / (std[i] * std[j])
    off = ~np.eye(n_metrics, dtype=bool)
    usable = off & np.isfinite(matrix)
    mean_abs = float(np.mean(np.abs(matrix[usable]))) if np.any(usable) else float("nan")
    return CorrelationResult(matrix=matrix, defined=defined, mean_abs_offdiag=mean_abs)


def pareto_front(vectors: Sequence[Sequence[float]]) -> list[int]:
    """Indices of non-dominated configurations, in input order.

    A configuration is dropped iff some other weakly dominates it with at
    least one strict improvement (all metrics oriented larger-is-better).
    """
    data = np.asarray(vectors, dtype=float)
    if data.ndim != 2:
        raise ValueError("metric vectors must share dimensionality")
    n = data.shape[0]
    if n == 0:
        return []
    geq = np.all(data[:, None, :] >= data[None, :, :], axis=2)
    gt = np.any(data[:, None, :] > data[None, :, :], axis=2)
    dominated = np.any(geq & gt, axis=0)
    return [i for i in range(n) if not dominated[i]]


class CoverageInput(NamedTuple):
    train_min: float
    train_max: float
    eval_values: np.ndarray


def data_coverage(inputs: Mapping[str, CoverageInput]) -> float:
    """Mean over variables of the fraction of evaluation samples lying
    within the training support [train_min, train_max]."""
    if not inputs:
        raise ValueError("coverage needs at least one variable")
    fractions = []
    for name in sorted(inputs):
        c = inputs[name]
        v = np.asarray(c.eval_values, dtype=float)
        if v.size == 0:
            raise ValueError(f"no evaluation samples for {name}")
        fractions.append(float(np.mean((v >= c.train_min) & (v <= c.train_max))))
    return float(np.mean(fractions))


class SfsResult(NamedTuple):
    sfs: float
    sfi_predicted: float
    c_data: float
    information_term: float


def sfs(loss: str,
        var_spec: ConditionalVarianceSpectrum | None,
        truth: Spectrum,
        coverage_inputs: Mapping[str, CoverageInput],
        h_ks: float,
        i0: float,
        tau: float,
        weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
        sample_noise: Spectrum | None = None) -> SfsResult:
    """Spectral Feasibility Score: pre-training pipeline suitability.

    SFS = w1 * SFI_predicted + w2 * C_data + w3 * max(0, 1 - h_ks * tau / i0)
    with h_ks in bits/day, i0 in bits and tau in days.
    """
    if i0 <= 0.0:
        raise InvalidInformationBudget(f"i0 must be positive, got {i0}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("sfs weights must sum to 1")
    sfi_pred = predicted_sfi(loss, var_spec, truth, sample_noise)
    c_data = data_coverage(coverage_inputs)
    info = max(0.0, 1.0 - h_ks * tau / i0)
    total = weights[0] * sfi_pred + weights[1] * c_data + weights[2] * info
    return SfsResult(sfs=float(total), sfi_predicted=sfi_pred,
                     c_data=c_data, information_term=float(info))
