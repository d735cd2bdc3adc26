"""Batch diagnostics pipeline.

Subcommands: spectra, skill, consensus, dynamics, balance, extremes,
hmas, sfs, synth, validate. Each loads a JSON run config (flags
override), maps over independent (model, init, lead, variable) cells
with a worker pool, and writes deterministic CSV/JSON reports: cell
results are keyed and reduced in sorted order, so the worker count never
changes a number. A missing field skips its cell with a log line; only
structural errors exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import balance, composite, consensus, dynamics, extremes, report, skill, spectral
from .errors import ConfigError, WxdiagError
from .grid import ScalarField
from .io import ForecastSet, read_climatology
from .skill import Climatology, MetricSeries, confidence_interval

log = logging.getLogger("wxdiag")

METRIC_FAMILIES = ("spectra", "skill", "consensus", "dynamics", "balance",
                   "extremes", "hmas")

BALANCE_VARIABLES = ("u500", "v500", "z500", "z850", "t850", "u850", "v850")


@dataclass
class RunConfig:
    forecast_manifest: Path
    verification_manifest: Path
    climatology: dict[str, Path] = field(default_factory=dict)
    variables: list[str] = field(default_factory=list)
    leads: list[int] = field(default_factory=list)
    models: list[str] = field(default_factory=list)
    metrics: list[str] | None = None
    model_meta: dict[str, dict[str, str]] = field(default_factory=dict)
    output_dir: Path = Path("reports")
    workers: int = 1
    seed: int = 0
    spectral_variable: str = "u500"
    dynamics_variable: str = "z500"
    extremes_variable: str = "t2m"
    ke_variables: tuple[str, str] = ("u500", "v500")  # wind pair for the KE level
    lyapunov_window: tuple[float, float] = (1.0, 5.0)
    asi_window_days: float | None = None
    exceedance_sigmas: float = 2.0
    tail_bin_width: float = extremes.BIN_WIDTH
    tail_bin_range: tuple[float, float] = extremes.BIN_RANGE
    tail_fit_range: tuple[float, float] = extremes.FIT_RANGE
    normalizers: balance.BalanceNormalizers = field(default_factory=balance.BalanceNormalizers)


def load_config(path: str | Path, overrides: argparse.Namespace | None = None) -> RunConfig:
    path = Path(path)
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent

    def respath(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    try:
        cfg = RunConfig(
            forecast_manifest=respath(raw["forecast_manifest"]),
            verification_manifest=respath(raw["verification_manifest"]),
            climatology={k: respath(v) for k, v in raw.get("climatology", {}).items()},
            variables=list(raw.get("variables", [])),
            leads=[int(x) for x in raw.get("leads", [])],
            models=list(raw.get("models", [])),
            metrics=raw.get("metrics"),
            model_meta=dict(raw.get("model_meta", {})),
            output_dir=respath(raw.get("output_dir", "reports")),
            workers=int(raw.get("workers", 1)),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad run config: {exc}") from exc
    for name in ("spectral_variable", "dynamics_variable", "extremes_variable"):
        if name in raw:
            setattr(cfg, name, str(raw[name]))
    if "ke_variables" in raw:
        cfg.ke_variables = tuple(str(x) for x in raw["ke_variables"])
    thresholds = raw.get("thresholds", {})
    if "exceedance_sigmas" in thresholds:
        cfg.exceedance_sigmas = float(thresholds["exceedance_sigmas"])
    if "lyapunov_window" in thresholds:
        cfg.lyapunov_window = tuple(float(x) for x in thresholds["lyapunov_window"])
    if "asi_window_days" in thresholds:
        cfg.asi_window_days = float(thresholds["asi_window_days"])
    if "tail_bin_width" in thresholds:
        cfg.tail_bin_width = float(thresholds["tail_bin_width"])
    if "tail_bin_range" in thresholds:
        cfg.tail_bin_range = tuple(float(x) for x in thresholds["tail_bin_range"])
    if "tail_fit_range" in thresholds:
        cfg.tail_fit_range = tuple(float(x) for x in thresholds["tail_fit_range"])
    if "normalizers" in thresholds:
        cfg.normalizers = balance.BalanceNormalizers(**thresholds["normalizers"])
    if overrides is not None:
        if overrides.out:
            cfg.output_dir = Path(overrides.out)
        if overrides.vars:
            cfg.variables = overrides.vars.split(",")
        if overrides.leads:
            cfg.leads = [int(x) for x in overrides.leads.split(",")]
        if overrides.models:
            cfg.models = overrides.models.split(",")
        if overrides.workers is not None:
            cfg.workers = overrides.workers
        if overrides.seed is not None:
            cfg.seed = overrides.seed
    return cfg


class Pipeline:
    """Loads the forecast index once and runs metric families over it."""

    def __init__(self, config: RunConfig):
        self.cfg = config
        self.fset = ForecastSet.from_manifests(
            config.forecast_manifest, config.verification_manifest, config.model_meta)
        self._clim_cache: dict[str, Climatology] = {}

    # -- selection helpers -------------------------------------------------

    def models(self) -> list[str]:
        avail = self.fset.models
        return [m for m in (self.cfg.models or avail) if m in avail]

    def variables(self) -> list[str]:
        avail = self.fset.variables
        return [v for v in (self.cfg.variables or avail) if v in avail]

    def leads(self) -> list[int]:
        avail = self.fset.leads()
        return [h for h in (self.cfg.leads or avail) if h in avail]

    def climatology_for(self, variable: str) -> Climatology | None:
        if variable not in self._clim_cache:
            sidecar = self.cfg.climatology.get(variable)
            self._clim_cache[variable] = read_climatology(sidecar) if sidecar else None
        return self._clim_cache[variable]

    def _pmap(self, fn, keys):
        """Deterministic parallel map: {key: fn(key)} with sorted reduction."""
        results = {}
        if self.cfg.workers <= 1:
            for key in keys:
                results[key] = fn(key)
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                for key, value in zip(keys, pool.map(fn, keys)):
                    results[key] = value
        return results

    def _pair(self, model: str, variable: str, init, lead: int):
        """(forecast, verify) ScalarFields or None (logged skip)."""
        fe = self.fset.forecast(model, variable, init, lead)
        if fe is None:
            return None
        ve = self.fset.verification_for(fe)
        if ve is None:
            log.warning("skip %s/%s %s +%dh: no verification", model, variable,
                        init.isoformat(), lead)
            return None
        try:
            return fe.load(), ve.load()
        except (OSError, WxdiagError) as exc:
            log.warning("skip %s/%s %s +%dh: %s", model, variable, init.isoformat(), lead, exc)
            return None

    # -- metric families ----------------------------------------------------

    def spectra(self, variables=None):
        """Init-averaged spectra, ratios and (SFI, l_eff) per (model, var, lead)."""
        variables = variables or self.variables()
        inits = self.fset.init_times
        cells = [(m, v, t0, h) for m in self.models() for v in variables
                 for t0 in inits for h in self.leads()]

        def one(cell):
            m, v, t0, h = cell
            pair = self._pair(m, v, t0, h)
            if pair is None:
                return None
            f, a = pair
            try:
                return spectral.isotropic_spectrum(f), spectral.isotropic_spectrum(a)
            except WxdiagError as exc:
                log.warning("spectrum skipped for %s/%s +%dh: %s", m, v, h, exc)
                return None

        raw = self._pmap(one, cells)
        spectra_f, spectra_a, ratios, table = {}, {}, {}, {}
        for m in self.models():
            for v in variables:
                for h in self.leads():
                    fs = [raw[(m, v, t0, h)][0] for t0 in inits
                          if raw.get((m, v, t0, h)) is not None]
                    as_ = [raw[(m, v, t0, h)][1] for t0 in inits
                           if raw.get((m, v, t0, h)) is not None]
                    if not fs:
                        continue
                    mf = spectral.mean_spectrum(fs)
                    ma = spectral.mean_spectrum(as_)
                    spectra_f[(m, v, h)] = mf
                    spectra_a[(m, v, h)] = ma
                    ratios[(m, v, h)] = spectral.spectral_ratio(mf, ma)
                    table[(m, v, h)] = (spectral.sfi(mf, ma),
                                        spectral.effective_resolution(mf, ma))
        return spectra_f, spectra_a, ratios, table

    def skill(self, variables=None):
        """RMSE (global + bands) and ACC series with inter-init CIs."""
        from .grid import band_mask

        variables = variables or self.variables()
        inits = self.fset.init_times
        cells = [(m, v, t0, h) for m in self.models() for v in variables
                 for t0 in inits for h in self.leads()]

        def one(cell):
            m, v, t0, h = cell
            pair = self._pair(m, v, t0, h)
            if pair is None:
                return None
            f, a = pair
            try:
                out = {"rmse": skill.rmse(f, a)}
                for band in ("tropics", "extratropics", "polar"):
                    out[f"rmse_{band}"] = skill.rmse(f, a, mask=band_mask(f.grid, band))
            except WxdiagError as exc:
                log.warning("rmse skipped for %s/%s +%dh: %s", m, v, h, exc)
                return None
            clim = self.climatology_for(v)
            if clim is not None:
                try:
                    out["acc"] = skill.acc(f, a, clim)
                except WxdiagError as exc:
                    log.warning("acc skipped for %s/%s: %s", m, v, exc)
            return out

        raw = self._pmap(one, cells)
        series: dict[tuple[str, str, str], MetricSeries] = {}
        for m in self.models():
            for v in variables:
                metrics = sorted({k for cell, res in raw.items() if res
                                  for k in res if cell[0] == m and cell[1] == v})
                for metric in metrics:
                    leads, means, cis, ns = [], [], [], []
                    for h in self.leads():
                        samples = [raw[(m, v, t0, h)][metric] for t0 in inits
                                   if raw.get((m, v, t0, h)) and metric in raw[(m, v, t0, h)]]
                        if not samples:
                            continue
                        if len(samples) >= 2:
                            mean, hw = confidence_interval(samples)
                        else:
                            mean, hw = float(samples[0]), 0.0
                        leads.append(h)
                        means.append(mean)
                        cis.append(hw)
                        ns.append(len(samples))
                    if leads:
                        series[(m, v, metric)] = MetricSeries(
                            model=m, variable=v, leads=leads, mean=means,
                            ci_half_width=cis, n=ns, metric=metric)
        return series

    def consensus(self, variables=None):
        """ECR / pairwise-r series and grouped MED per (variable, lead)."""
        variables = variables or self.variables()
        inits = self.fset.init_times
        models = self.models()
        cells = [(v, t0, h) for v in variables for t0 in inits for h in self.leads()]

        def one(cell):
            v, t0, h = cell
            fields, verify = [], None
            for m in models:
                pair = self._pair(m, v, t0, h)
                if pair is None:
                    continue
                fields.append(pair[0])
                verify = pair[1]
            if len(fields) < 2 or verify is None:
                return None
            try:
                ens = consensus.ErrorEnsemble.from_fields(fields, verify)
                meds = {}
                for mode in ("within", "cross"):
                    pairs = consensus.family_pairs(ens.models, self.fset.model_meta, mode)
                    if pairs:
                        meds[mode] = consensus.med(ens, pairs, group=mode)
                meds["all"] = consensus.med(ens, group="all")
                return consensus.ecr(ens), consensus.pairwise_error_correlation(ens), meds
            except WxdiagError as exc:
                log.warning("consensus skipped for %s %s +%dh: %s", v, t0.isoformat(), h, exc)
                return None

        raw = self._pmap(one, cells)
        rows, med_rows = [], []
        for v in variables:
            for h in self.leads():
                ecrs = [raw[(v, t0, h)][0] for t0 in inits if raw.get((v, t0, h))]
                rs = [raw[(v, t0, h)][1] for t0 in inits if raw.get((v, t0, h))]
                if not ecrs:
                    continue
                if len(ecrs) >= 2:
                    ecr_mean, ecr_ci = confidence_interval(ecrs)
                else:
                    ecr_mean, ecr_ci = ecrs[0], 0.0
                rows.append((v, h, ecr_mean, ecr_ci, float(np.mean(rs))))
                med_lists: dict[str, list] = {}
                for t0 in inits:
                    res = raw.get((v, t0, h))
                    if res:
                        for mode, mr in res[2].items():
                            med_lists.setdefault(mode, []).append(mr)
                for mode in sorted(med_lists):
                    group = med_lists[mode]
                    k = group[0].wavenumbers
                    stack = np.stack([g.med for g in group])
                    with np.errstate(invalid="ignore"):
                        mean_med = np.nanmean(stack, axis=0)
                    for i, kk in enumerate(k.tolist()):
                        med_rows.append((v, h, kk, mode, float(mean_med[i])))
        return rows, med_rows

    def dynamics(self):
        """Per-model growth fit (lambda, tau_d) and KE drift (gamma, ASI)."""
        rmse_series = self.skill(variables=[self.cfg.dynamics_variable])
        inits = self.fset.init_times
        out = {}
        for m in self.models():
            key = (m, self.cfg.dynamics_variable, "rmse")
            fit = None
            if key in rmse_series:
                s = rmse_series[key]
                try:
                    fit = dynamics.fit_lyapunov(dict(zip(s.leads, s.mean)),
                                                window=self.cfg.lyapunov_window)
                except WxdiagError as exc:
                    log.warning("lyapunov fit skipped for %s: %s", m, exc)
            u_var, v_var = self.cfg.ke_variables
            ratios: dict[int, list[float]] = {}
            for t0 in inits:
                u_by, v_by = {}, {}
                for h in self.fset.leads(m):
                    up = self._pair(m, u_var, t0, h)
                    vp = self._pair(m, v_var, t0, h)
                    if up and vp:
                        u_by[h] = up[0]
                        v_by[h] = vp[0]
                if len(u_by) >= 3:
                    try:
                        for h, r in dynamics.ke_series(u_by, v_by).items():
                            ratios.setdefault(h, []).append(r)
                    except WxdiagError as exc:
                        log.warning("KE series skipped for %s at %s: %s", m, t0, exc)
            drift = None
            if len(ratios) >= 3:
                mean_ratio = {h: float(np.mean(v)) for h, v in sorted(ratios.items())}
                try:
                    drift = dynamics.asi(mean_ratio, self.cfg.asi_window_days)
                except WxdiagError as exc:
                    log.warning("ASI skipped for %s: %s", m, exc)
            out[m] = (fit, drift)
        return out

    def balance(self):
        """Balance report per (model, lead), averaged over init dates."""
        inits = self.fset.init_times
        cells = [(m, t0, h) for m in self.models() for t0 in inits for h in self.leads()]

        def one(cell):
            m, t0, h = cell
            fields = {}
            for v in BALANCE_VARIABLES:
                pair = self._pair(m, v, t0, h)
                if pair is None:
                    return None
                fields[v] = pair[0]
            try:
                geo = balance.geostrophic_score(fields["u500"], fields["v500"],
                                                fields["z500"], normalizers=self.cfg.normalizers)
                ndiv = balance.nondivergence_score(fields["u500"], fields["v500"],
                                                   normalizers=self.cfg.normalizers)
                thermal = balance.thermal_wind_score(fields["u500"], fields["v500"],
                                                     fields["u850"], fields["v850"],
                                                     fields["t850"],
                                                     normalizers=self.cfg.normalizers)
                hydro = balance.hydrostatic_score(fields["z500"], fields["z850"],
                                                  fields["t850"],
                                                  normalizers=self.cfg.normalizers)
                return balance.pcs_composite(geo, ndiv, thermal, hydro)
            except WxdiagError as exc:
                log.warning("balance skipped for %s %s +%dh: %s", m, t0.isoformat(), h, exc)
                return None

        raw = self._pmap(one, cells)
        out = {}
        for m in self.models():
            for h in self.leads():
                reports = [raw[(m, t0, h)] for t0 in inits if raw.get((m, t0, h))]
                if reports:
                    out[(m, h)] = reports
        return out

    def extremes(self):
        """Pooled tail curve, attenuation fit and EES per (model, lead)."""
        v = self.cfg.extremes_variable
        clim = self.climatology_for(v)
        if clim is None:
            log.warning("extremes skipped: no climatology for %s", v)
            return {}
        inits = self.fset.init_times
        out = {}
        for m in self.models():
            for h in self.leads():
                biases, deltas, ees_vals = [], [], []
                for t0 in inits:
                    pair = self._pair(m, v, t0, h)
                    if pair is None:
                        continue
                    f, a = pair
                    try:
                        mask, delta = extremes.exceedance_mask(
                            a, clim, self.cfg.exceedance_sigmas)
                    except WxdiagError as exc:
                        log.warning("exceedance skipped for %s +%dh: %s", m, h, exc)
                        continue
                    if not np.any(mask):
                        continue
                    biases.append((f.values - a.values)[mask])
                    deltas.append(delta[mask])
                    try:
                        ees_vals.append(extremes.ees(f, a, clim, self.cfg.exceedance_sigmas))
                    except WxdiagError:
                        pass
                if not biases:
                    out[(m, h)] = None
                    continue
                curve = _pooled_tail_curve(
                    np.concatenate(deltas), np.concatenate(biases),
                    bin_width=self.cfg.tail_bin_width,
                    bin_range=self.cfg.tail_bin_range,
                    fit_range=self.cfg.tail_fit_range)
                ees_mean = float(np.mean(ees_vals)) if ees_vals else float("nan")
                out[(m, h)] = (curve, ees_mean)
        return out

    def hmas(self):
        """Six metrics and composite per (model, lead)."""
        spec_var = self.cfg.spectral_variable
        _, _, _, spec_table = self.spectra(variables=[spec_var])
        dyn = self.dynamics()
        bal = self.balance()
        ext = self.extremes()
        records = {}
        for h in self.leads():
            recs = []
            for m in self.models():
                parts = {}
                if (m, spec_var, h) in spec_table:
                    parts["sfi"], parts["l_eff"] = spec_table[(m, spec_var, h)]
                fit, drift = dyn.get(m, (None, None))
                if fit:
                    parts["tau_d"] = fit.tau_d_norm
                if drift:
                    parts["asi"] = drift.asi
                if ext.get((m, h)):
                    parts["ees"] = ext[(m, h)][1]
                if bal.get((m, h)):
                    parts["pcs"] = float(np.mean([r.pcs_composite for r in bal[(m, h)]]))
                missing = [k for k in composite.METRIC_NAMES if k not in parts
                           or not np.isfinite(parts[k])]
                if missing:
                    log.warning("hmas skipped for %s +%dh: missing %s", m, h,
                                ",".join(missing))
                    continue
                recs.append(composite.hmas(parts, model=m, lead_hours=h))
            if recs:
                records[h] = recs
        return records


def _pooled_tail_curve(delta: np.ndarray, bias: np.ndarray,
                       bin_width: float = extremes.BIN_WIDTH,
                       bin_range: tuple[float, float] = extremes.BIN_RANGE,
                       fit_range: tuple[float, float] = extremes.FIT_RANGE,
                       ) -> extremes.TailCurve | None:
    """Tail curve from pooled (delta, bias) samples across init dates."""
    lo, hi = bin_range
    width = bin_width
    edges = np.arange(lo, hi + 0.5 * width, width)
    centers = 0.5 * (edges[:-1] + edges[1:])
    idx = np.floor((delta - lo) / width).astype(int)
    ok = (idx >= 0) & (idx < centers.size)
    counts = np.bincount(idx[ok], minlength=centers.size).astype(float)
    sums = np.bincount(idx[ok], weights=bias[ok], minlength=centers.size)
    mean_bias = np.full(centers.size, np.nan)
    pop = counts > 0
    mean_bias[pop] = sums[pop] / counts[pop]
    f_lo, f_hi = fit_range
    sel = pop & (centers >= f_lo) & (centers <= f_hi)
    if np.count_nonzero(sel) < 2:
        return None
    x, y, w = centers[sel], mean_bias[sel], counts[sel]
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    yhat = slope * x + intercept
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(w * (y - yhat) ** 2)) / ss_tot
    return extremes.TailCurve(bin_centers=centers, mean_bias=mean_bias, counts=counts,
                              alpha=float(-slope), intercept=float(intercept), r2=float(r2))


# -- report emission ---------------------------------------------------------


def _family_selected(cfg: RunConfig, family: str) -> bool:
    if cfg.metrics is None:
        return True
    if not cfg.metrics:
        log.warning("empty metric selection; nothing to do")
        return False
    if family not in cfg.metrics:
        log.warning("metric family %r not selected; nothing to do", family)
        return False
    return True


def run_spectra(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    spectra_f, spectra_a, ratios, table = pipe.spectra()
    out = cfg.output_dir
    fc_rows = report.spectra_rows(spectra_f)
    an_rows = report.spectra_rows({(("era5",) + k[1:]): v for k, v in spectra_a.items()})
    report.write_csv(out / "spectra.csv", ("model", "variable", "lead_hours", "k", "energy"),
                     sorted(set(fc_rows + an_rows)), seed=cfg.seed)
    report.write_csv(out / "spectral_ratio.csv",
                     ("model", "variable", "lead_hours", "k", "ratio", "flagged"),
                     report.ratio_rows(ratios), seed=cfg.seed)
    rows = [(m, v, h, table[(m, v, h)][0], table[(m, v, h)][1])
            for (m, v, h) in sorted(table)]
    report.write_csv(out / "spectral_summary.csv",
                     ("model", "variable", "lead_hours", "sfi", "l_eff"),
                     rows, seed=cfg.seed)


def run_skill(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    series = pipe.skill()
    rows = []
    for (m, v, metric) in sorted(series):
        s = series[(m, v, metric)]
        for lead, mean, hw, n in zip(s.leads, s.mean, s.ci_half_width, s.n):
            rows.append((m, v, lead, metric, mean, hw, n))
    report.write_csv(cfg.output_dir / "skill.csv",
                     ("model", "variable", "lead_hours", "metric", "mean",
                      "ci_half_width", "n"),
                     rows, seed=cfg.seed)
    payload = {}
    for v in pipe.variables():
        table = {m: series[(m, v, "rmse")] for m in pipe.models()
                 if (m, v, "rmse") in series}
        lead_sets = {tuple(s.leads) for s in table.values()}
        if len(table) >= 2 and len(lead_sets) == 1:
            ranks = skill.scorecard(table)
            leads = next(iter(lead_sets))
            payload[v] = {m: dict(zip(map(str, leads), r)) for m, r in ranks.items()}
    report.write_json(cfg.output_dir / "scorecard.json", {"rmse_ranks": payload},
                      seed=cfg.seed)


def run_consensus(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    rows, med_rows = pipe.consensus()
    report.write_csv(cfg.output_dir / "consensus.csv",
                     ("variable", "lead_hours", "ecr_mean", "ecr_ci", "pairwise_r_mean"),
                     rows, seed=cfg.seed)
    report.write_csv(cfg.output_dir / "med.csv",
                     ("variable", "lead_hours", "k", "group", "med_mean"),
                     med_rows, seed=cfg.seed)


def run_dynamics(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    rows = []
    for m, (fit, drift) in sorted(pipe.dynamics().items()):
        rows.append((
            m,
            fit.lambda_eff if fit else float("nan"),
            fit.tau_d_hours if fit else float("nan"),
            fit.tau_d_norm if fit else float("nan"),
            drift.gamma if drift else float("nan"),
            drift.asi if drift else float("nan"),
        ))
    report.write_csv(cfg.output_dir / "dynamics.csv",
                     ("model", "lambda_eff", "tau_d_hours", "tau_d_norm", "gamma", "asi"),
                     rows, seed=cfg.seed)


def run_balance(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    rows = []
    for (m, h), reports in sorted(pipe.balance().items()):
        mean = lambda attr: float(np.mean([getattr(r, attr) for r in reports]))
        rows.append((m, h, mean("pcs_geo"), mean("pcs_ndiv"), mean("pcs_thermal"),
                     mean("pcs_hydro"), mean("pcs_composite"), mean("agr"),
                     mean("ndr"), mean("thermal_ratio"), mean("hydro_rel_err")))
    report.write_csv(cfg.output_dir / "balance.csv",
                     ("model", "lead_hours", "pcs_geo", "pcs_ndiv", "pcs_thermal",
                      "pcs_hydro", "pcs_composite", "agr", "ndr", "thermal_ratio",
                      "hydro_rel_err"),
                     rows, seed=cfg.seed)


def run_extremes(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    results = pipe.extremes()
    bin_rows, summary_rows = [], []
    for (m, h) in sorted(results):
        res = results[(m, h)]
        if res is None or res[0] is None:
            summary_rows.append((m, h, float("nan"), float("nan"),
                                 res[1] if res else float("nan")))
            continue
        curve, ees_mean = res
        for c, b, n in zip(curve.bin_centers.tolist(), curve.mean_bias.tolist(),
                           curve.counts.tolist()):
            if n > 0:
                bin_rows.append((m, h, c, b, int(n)))
        summary_rows.append((m, h, curve.alpha, curve.r2, ees_mean))
    report.write_csv(cfg.output_dir / "tail_bins.csv",
                     ("model", "lead_hours", "bin_center", "mean_bias", "count"),
                     bin_rows, seed=cfg.seed)
    report.write_csv(cfg.output_dir / "extremes_summary.csv",
                     ("model", "lead_hours", "alpha", "r2", "ees"),
                     summary_rows, seed=cfg.seed)


def run_hmas(cfg: RunConfig) -> None:
    pipe = Pipeline(cfg)
    records = pipe.hmas()
    out = cfg.output_dir
    for h, recs in sorted(records.items()):
        day = h // 24 if h % 24 == 0 else f"{h}h"
        report.write_json(out / f"hmas_day{day}.json", report.hmas_table_payload(recs),
                          seed=cfg.seed)
        if len(recs) >= 3:
            metrics = {r.model: r.metrics() for r in recs}
            sens = composite.weight_sensitivity(metrics)
            rows = [(scheme, m, sens.ranks[scheme][m], sens.scores[scheme][m])
                    for scheme in sorted(sens.ranks) for m in sorted(sens.ranks[scheme])]
            report.write_csv(out / f"hmas_sensitivity_day{day}.csv",
                             ("scheme", "model", "rank", "hmas"), rows, seed=cfg.seed)
            report.write_json(out / f"hmas_kendall_day{day}.json",
                              {"kendall_w": sens.kendall_w}, seed=cfg.seed)
            corr = composite.metric_correlation([r.metrics() for r in recs])
            crows = [(composite.METRIC_NAMES[i], composite.METRIC_NAMES[j],
                      corr.matrix[i, j])
                     for i in range(6) for j in range(6)]
            report.write_csv(out / f"hmas_correlation_day{day}.csv",
                             ("metric_a", "metric_b", "rho"), crows, seed=cfg.seed)


def run_sfs(cfg_path: Path, out_dir: Path | None, seed: int) -> None:
    """Compute the Spectral Feasibility Score from a standalone JSON spec."""
    try:
        with open(cfg_path) as fh:
            raw = json.load(fh)
        loss = raw["loss"]
        truth = spectral.Spectrum(
            wavenumbers=np.arange(1, len(raw["truth_energy"]) + 1),
            energy=np.asarray(raw["truth_energy"], dtype=float))
        var_spec = None
        if raw.get("variance") is not None:
            var_spec = spectral.ConditionalVarianceSpectrum(
                wavenumbers=truth.wavenumbers,
                variance=np.asarray(raw["variance"], dtype=float))
        noise = None
        if raw.get("sample_noise") is not None:
            noise = spectral.Spectrum(
                wavenumbers=truth.wavenumbers,
                energy=np.asarray(raw["sample_noise"], dtype=float))
        coverage = {
            name: composite.CoverageInput(
                train_min=float(c["train_min"]), train_max=float(c["train_max"]),
                eval_values=np.asarray(c["eval_values"], dtype=float))
            for name, c in raw["coverage"].items()
        }
        weights = tuple(raw.get("weights", (1 / 3, 1 / 3, 1 / 3)))
        result = composite.sfs(loss, var_spec, truth, coverage,
                               h_ks=float(raw["h_ks"]), i0=float(raw["i0"]),
                               tau=float(raw["tau_days"]), weights=weights,
                               sample_noise=noise)
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad sfs spec {cfg_path}: {exc}") from exc
    payload = {"sfs": result.sfs, "sfi_predicted": result.sfi_predicted,
               "c_data": result.c_data, "information_term": result.information_term}
    out = Path(out_dir or ".")
    report.write_json(out / "sfs.json", payload, seed=seed)
    print(json.dumps(payload, indent=1, sort_keys=True))


def validate(cfg: RunConfig) -> list[str]:
    """Structural diagnostics: missing files, variable gaps, lead mismatches."""
    findings = []
    try:
        pipe = Pipeline(cfg)
    except ConfigError as exc:
        return [str(exc)]
    findings.extend(pipe.fset.check())
    selected = cfg.metrics if cfg.metrics is not None else list(METRIC_FAMILIES)
    avail = set(pipe.fset.variables)
    if ("extremes" in selected or "hmas" in selected):
        v = cfg.extremes_variable
        if v not in cfg.climatology:
            findings.append(f"extremes selected but no climatology configured for {v}")
        elif not Path(cfg.climatology[v]).exists():
            findings.append(f"climatology sidecar missing: {cfg.climatology[v]}")
    if ("balance" in selected or "hmas" in selected):
        gaps = sorted(set(BALANCE_VARIABLES) - avail)
        if gaps:
            findings.append(f"balance needs missing variables: {', '.join(gaps)}")
    if ("dynamics" in selected or "hmas" in selected):
        for v in (cfg.dynamics_variable, *cfg.ke_variables):
            if v not in avail:
                findings.append(f"dynamics needs missing variable: {v}")
    return findings


def _add_common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="run config JSON")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--vars", default=None, help="comma-separated variable filter")
    p.add_argument("--leads", default=None, help="comma-separated lead hours filter")
    p.add_argument("--models", default=None, help="comma-separated model filter")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = argparse.ArgumentParser(prog="wxdiag",
                                     description="Gridded forecast diagnostics pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectra", "skill", "consensus", "dynamics", "balance",
                 "extremes", "hmas", "validate"):
        _add_common(sub.add_parser(name))
    p_sfs = sub.add_parser("sfs")
    p_sfs.add_argument("--config", required=True, help="sfs spec JSON")
    p_sfs.add_argument("--out", default=None)
    p_sfs.add_argument("--seed", type=int, default=0)
    p_synth = sub.add_parser("synth")
    p_synth.add_argument("--out", required=True, help="dataset output directory")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--nlat", type=int, default=48)
    p_synth.add_argument("--nlon", type=int, default=96)
    p_synth.add_argument("--inits", type=int, default=3)
    args = parser.parse_args(argv)

    try:
        if args.command == "synth":
            from .synth import write_synthetic_case

            write_synthetic_case(args.out, seed=args.seed, nlat=args.nlat,
                                 nlon=args.nlon, n_inits=args.inits)
            print(f"synthetic case written to {args.out}")
            return 0
        if args.command == "sfs":
            run_sfs(Path(args.config), Path(args.out) if args.out else None, args.seed)
            return 0
        cfg = load_config(args.config, overrides=args)
        if args.command == "validate":
            findings = validate(cfg)
            for f in findings:
                print(f)
            print(f"{len(findings)} finding(s)")
            return 0
        if not _family_selected(cfg, args.command):
            return 0
        runner = {
            "spectra": run_spectra,
            "skill": run_skill,
            "consensus": run_consensus,
            "dynamics": run_dynamics,
            "balance": run_balance,
            "extremes": run_extremes,
            "hmas": run_hmas,
        }[args.command]
        runner(cfg)
        return 0
    except ConfigError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
