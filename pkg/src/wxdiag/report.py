"""Plot-ready CSV/JSON report writers.

Every writer emits rows in a fixed sorted order and formats floats with
repr-stable precision, so reruns with identical inputs produce
byte-identical files regardless of worker count. Headers carry the run
seed but never timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if np.isnan(x):
            return "nan"
        return format(x, ".10g")
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence],
              seed: int | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if seed is not None:
            fh.write(f"# wxdiag seed={seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def write_json(path: str | Path, payload, seed: int | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"seed": seed, **payload} if seed is not None else payload
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def spectra_rows(spectra: Mapping[tuple[str, str, int], "object"]) -> list[tuple]:
    """(model, variable, lead) -> Spectrum, flattened to long-form rows."""
    rows = []
    for (model, variable, lead) in sorted(spectra):
        s = spectra[(model, variable, lead)]
        for k, e in zip(s.wavenumbers.tolist(), s.energy.tolist()):
            rows.append((model, variable, lead, k, e))
    return rows


def ratio_rows(ratios: Mapping[tuple[str, str, int], "object"]) -> list[tuple]:
    rows = []
    for (model, variable, lead) in sorted(ratios):
        r = ratios[(model, variable, lead)]
        for k, val, ok in zip(r.wavenumbers.tolist(), r.ratio.tolist(), r.defined.tolist()):
            rows.append((model, variable, lead, k, val if ok else float("nan"), int(not ok)))
    return rows


def hmas_table_payload(records: Sequence["object"]) -> dict:
    """HMAS table mirroring the per-horizon layout, ranked by score."""
    ordered = sorted(records, key=lambda r: (-r.hmas, r.model))
    return {
        "columns": ["model", "sfi", "l_eff", "tau_d", "ees", "pcs", "asi", "hmas"],
        "rows": [
            {
                "model": r.model,
                "sfi": r.sfi,
                "l_eff": r.l_eff,
                "tau_d": r.tau_d,
                "ees": r.ees,
                "pcs": r.pcs,
                "asi": r.asi,
                "hmas": r.hmas,
            }
            for r in ordered
        ],
    }
