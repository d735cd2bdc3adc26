"""WXG1 binary grid files, JSON manifests and the forecast index.

WXG1 layout: magic bytes ``WXG1``, little-endian u32 nlat, u32 nlon,
f64 lats[nlat] (degrees), f64 lons[nlon] (degrees), f64 values[nlat*nlon]
row-major (lat-major).

A manifest is a JSON list of entries
``{model, variable, init_time (ISO-8601), lead_hours, path}``.
Verification manifests reuse the same schema with lead_hours = 0, so
init_time doubles as the valid time. Relative paths resolve against the
WXDIAG_DATA_DIR environment variable when set, else the manifest's
directory.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidField
from .grid import LatLonGrid, ScalarField

MAGIC = b"WXG1"
_HEADER = struct.Struct("<4sII")


def write_wxg(path: str | Path, grid: LatLonGrid, values: np.ndarray) -> None:
    """Write one field to a WXG1 file, preserving the grid's source order."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise InvalidField(f"values shape {values.shape} does not match grid {grid.shape}")
    lats = grid.lats
    if grid.source_descending:
        lats = lats[::-1]
        values = values[::-1, :]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, grid.nlat, grid.nlon))
        fh.write(np.ascontiguousarray(lats, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(grid.lons, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_wxg(path: str | Path) -> tuple[LatLonGrid, np.ndarray]:
    """Read a WXG1 file; latitudes are normalized to ascending order."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise ConfigError(f"{path}: not a WXG1 file")
    _, nlat, nlon = _HEADER.unpack_from(raw)
    need = _HEADER.size + 8 * (nlat + nlon + nlat * nlon)
    if len(raw) != need:
        raise ConfigError(f"{path}: truncated WXG1 file ({len(raw)} != {need} bytes)")
    off = _HEADER.size
    lats = np.frombuffer(raw, dtype="<f8", count=nlat, offset=off)
    off += 8 * nlat
    lons = np.frombuffer(raw, dtype="<f8", count=nlon, offset=off)
    off += 8 * nlon
    values = np.frombuffer(raw, dtype="<f8", count=nlat * nlon, offset=off)
    values = values.reshape(nlat, nlon)
    if nlat >= 2 and lats[0] > lats[-1]:
        grid = LatLonGrid(lats=lats.copy(), lons=lons.copy())
        values = values[::-1, :]
    else:
        grid = LatLonGrid(lats=lats.copy(), lons=lons.copy())
    return grid, values.copy()


def parse_time(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; a trailing Z means UTC."""
    try:
        t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ConfigError(f"bad ISO-8601 timestamp {text!r}") from exc
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t


def format_time(t: datetime) -> str:
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ManifestEntry:
    model: str
    variable: str
    init_time: datetime
    lead_hours: int
    path: Path

    @property
    def valid_time(self) -> datetime:
        from datetime import timedelta

        return self.init_time + timedelta(hours=int(self.lead_hours))

    def load(self) -> ScalarField:
        grid, values = read_wxg(self.path)
        return ScalarField(
            grid=grid,
            values=values,
            variable=self.variable,
            model=self.model,
            init_time=self.init_time,
            lead_hours=self.lead_hours,
        )


def _data_root(manifest_path: Path) -> Path:
    env = os.environ.get("WXDIAG_DATA_DIR")
    return Path(env) if env else manifest_path.parent


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: manifest must be a JSON list of entries")
    root = _data_root(path)
    entries = []
    for i, item in enumerate(raw):
        try:
            entries.append(
                ManifestEntry(
                    model=str(item.get("model", "")),
                    variable=str(item["variable"]),
                    init_time=parse_time(item["init_time"]),
                    lead_hours=int(item["lead_hours"]),
                    path=root / item["path"],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad manifest entry #{i}: {exc}") from exc
    return entries


def write_manifest(path: str | Path, entries: list[dict]) -> None:
    """Write manifest entries (dicts with model/variable/init_time/lead_hours/path)."""
    with open(path, "w") as fh:
        json.dump(entries, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_climatology(out_dir: str | Path, clim, stem: str) -> Path:
    """Write per-(DOY, hour) mu/sigma WXG1 files plus a sidecar index.

    Returns the sidecar path. The sidecar lists one entry per (doy, hour)
    with paths relative to its own directory.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for hour in clim.hours():
        for doy in range(1, clim.mu[hour].shape[0] + 1):
            names = {}
            for stat, cube in (("mu", clim.mu), ("sigma", clim.sigma)):
                name = f"{stem}_d{doy:03d}_h{hour:02d}_{stat}.wxg"
                write_wxg(out_dir / name, clim.grid, cube[hour][doy - 1])
                names[stat] = name
            entries.append({"doy": doy, "hour": hour, **names})
    sidecar = out_dir / f"{stem}_climatology.json"
    payload = {
        "variable": clim.variable,
        "sigma_floor": clim.sigma_floor,
        "kind": "per_doy",
        "entries": entries,
    }
    with open(sidecar, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return sidecar


def write_constant_climatology(out_dir: str | Path, clim, stem: str) -> Path:
    """Compact sidecar for a climatology that does not vary with DOY."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for hour in clim.hours():
        names = {}
        for stat, cube in (("mu", clim.mu), ("sigma", clim.sigma)):
            name = f"{stem}_h{hour:02d}_{stat}.wxg"
            write_wxg(out_dir / name, clim.grid, cube[hour][0])
            names[stat] = name
        entries.append({"hour": hour, **names})
    sidecar = out_dir / f"{stem}_climatology.json"
    payload = {
        "variable": clim.variable,
        "sigma_floor": clim.sigma_floor,
        "kind": "constant",
        "entries": entries,
    }
    with open(sidecar, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_climatology(sidecar: str | Path):
    """Load a climatology sidecar written by write_climatology or ingest."""
    from .skill import DOY_SLOTS, Climatology

    sidecar = Path(sidecar)
    try:
        with open(sidecar) as fh:
            payload = json.load(fh)
        variable = payload["variable"]
        kind = payload.get("kind", "per_doy")
        entries = payload["entries"]
        sigma_floor = float(payload.get("sigma_floor", 0.0))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read climatology sidecar {sidecar}: {exc}") from exc
    root = sidecar.parent
    grid = None
    mu: dict[int, np.ndarray] = {}
    sigma: dict[int, np.ndarray] = {}
    if kind == "constant":
        for item in entries:
            hour = int(item["hour"])
            g, mu2 = read_wxg(root / item["mu"])
            _, sg2 = read_wxg(root / item["sigma"])
            grid = grid or g
            shape = (DOY_SLOTS,) + g.shape
            mu[hour] = np.broadcast_to(mu2, shape).copy()
            sigma[hour] = np.broadcast_to(sg2, shape).copy()
    elif kind == "per_doy":
        slots: dict[int, dict[int, tuple[np.ndarray, np.ndarray]]] = {}
        for item in entries:
            hour, doy = int(item["hour"]), int(item["doy"])
            g, mu2 = read_wxg(root / item["mu"])
            _, sg2 = read_wxg(root / item["sigma"])
            grid = grid or g
            slots.setdefault(hour, {})[doy] = (mu2, sg2)
        for hour, per_doy in slots.items():
            if sorted(per_doy) != list(range(1, DOY_SLOTS + 1)):
                raise ConfigError(
                    f"{sidecar}: hour {hour:02d} does not cover all {DOY_SLOTS} DOY slots"
                )
            mu[hour] = np.stack([per_doy[d][0] for d in range(1, DOY_SLOTS + 1)])
            sigma[hour] = np.stack([per_doy[d][1] for d in range(1, DOY_SLOTS + 1)])
    else:
        raise ConfigError(f"{sidecar}: unknown climatology kind {kind!r}")
    if grid is None:
        raise ConfigError(f"{sidecar}: climatology sidecar has no entries")
    return Climatology(grid=grid, variable=variable, mu=mu, sigma=sigma,
                       sigma_floor=sigma_floor)


@dataclass
class ForecastSet:
    """Indexed forecast/verification fields plus per-model metadata.

    forecasts: (model, variable, init_time, lead_hours) -> entry
    verifications: (variable, valid_time) -> entry
    model_meta: model -> {"family": ..., "loss": ...} tags used for
        within-family error grouping.
    """

    forecasts: dict[tuple[str, str, datetime, int], ManifestEntry] = field(default_factory=dict)
    verifications: dict[tuple[str, datetime], ManifestEntry] = field(default_factory=dict)
    model_meta: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def from_manifests(
        cls,
        forecast_manifest: str | Path,
        verification_manifest: str | Path,
        model_meta: dict[str, dict[str, str]] | None = None,
    ) -> "ForecastSet":
        fset = cls(model_meta=dict(model_meta or {}))
        for e in read_manifest(forecast_manifest):
            fset.forecasts[(e.model, e.variable, e.init_time, e.lead_hours)] = e
        for e in read_manifest(verification_manifest):
            fset.verifications[(e.variable, e.valid_time)] = e
        return fset

    @property
    def models(self) -> list[str]:
        return sorted({k[0] for k in self.forecasts})

    @property
    def variables(self) -> list[str]:
        return sorted({k[1] for k in self.forecasts})

    @property
    def init_times(self) -> list[datetime]:
        return sorted({k[2] for k in self.forecasts})

    def leads(self, model: str | None = None) -> list[int]:
        return sorted({k[3] for k in self.forecasts if model is None or k[0] == model})

    def forecast(self, model: str, variable: str, init_time: datetime, lead_hours: int):
        return self.forecasts.get((model, variable, init_time, lead_hours))

    def verification_for(self, entry: ManifestEntry):
        return self.verifications.get((entry.variable, entry.valid_time))

    def check(self) -> list[str]:
        """List structural findings without loading any field data."""
        findings = []
        for key in sorted(self.forecasts, key=lambda k: (k[0], k[1], k[2].isoformat(), k[3])):
            e = self.forecasts[key]
            if self.verification_for(e) is None:
                findings.append(
                    f"no verification for {e.variable} at {format_time(e.valid_time)}"
                    f" (model {e.model}, lead {e.lead_hours}h)"
                )
            if not e.path.exists():
                findings.append(f"missing file {e.path}")
        lead_sets = {m: tuple(self.leads(m)) for m in self.models}
        distinct = sorted(set(lead_sets.values()))
        if len(distinct) > 1:
            detail = "; ".join(f"{m}: {list(v)}" for m, v in sorted(lead_sets.items()))
            findings.append(f"lead grids differ across models ({detail})")
        for key, e in sorted(self.verifications.items(), key=lambda kv: (kv[0][0], kv[0][1].isoformat())):
            if not e.path.exists():
                findings.append(f"missing file {e.path}")
        return findings
