import json
from datetime import datetime, timezone

import numpy as np
import pytest

from wxdiag.errors import ConfigError
from wxdiag.grid import LatLonGrid, uniform_grid
from wxdiag.io import (
    ForecastSet,
    read_climatology,
    read_manifest,
    read_wxg,
    write_climatology,
    write_constant_climatology,
    write_manifest,
    write_wxg,
)
from wxdiag.skill import Climatology


class TestWxgFormat:
    def test_round_trip_byte_identical(self, small_grid, rng, tmp_path):
        values = rng.standard_normal(small_grid.shape)
        p1 = tmp_path / "a.wxg"
        p2 = tmp_path / "b.wxg"
        write_wxg(p1, small_grid, values)
        grid2, values2 = read_wxg(p1)
        write_wxg(p2, grid2, values2)
        assert p1.read_bytes() == p2.read_bytes()
        assert np.array_equal(values, values2)

    def test_header_layout(self, small_grid, tmp_path):
        p = tmp_path / "h.wxg"
        write_wxg(p, small_grid, np.zeros(small_grid.shape))
        raw = p.read_bytes()
        assert raw[:4] == b"WXG1"
        nlat = int.from_bytes(raw[4:8], "little")
        nlon = int.from_bytes(raw[8:12], "little")
        assert (nlat, nlon) == small_grid.shape
        assert len(raw) == 12 + 8 * (nlat + nlon + nlat * nlon)

    def test_descending_source_reordered_with_values(self, tmp_path):
        # marked corner cell: value 99 sits at (lat=+60, lon=0) in the file
        lats_desc = np.array([60.0, 30.0, 0.0, -30.0, -60.0])
        lons = np.arange(0, 360, 90.0)
        values = np.zeros((5, 4))
        values[0, 0] = 99.0
        import struct

        p = tmp_path / "desc.wxg"
        with open(p, "wb") as fh:
            fh.write(struct.pack("<4sII", b"WXG1", 5, 4))
            fh.write(lats_desc.astype("<f8").tobytes())
            fh.write(lons.astype("<f8").tobytes())
            fh.write(values.astype("<f8").tobytes())
        grid, got = read_wxg(p)
        assert grid.lats[0] == -60.0
        assert got[-1, 0] == 99.0  # +60 row is now the last row

    def test_descending_grid_written_in_file_order(self, tmp_path):
        grid = LatLonGrid(lats=np.array([60.0, 30.0, 0.0, -30.0]),
                          lons=np.arange(0, 360, 90.0))
        values = np.arange(16, dtype=float).reshape(4, 4)  # ascending-lat order
        p = tmp_path / "keep.wxg"
        write_wxg(p, grid, values)
        raw = p.read_bytes()
        lats_in_file = np.frombuffer(raw, dtype="<f8", count=4, offset=12)
        assert lats_in_file[0] == 60.0
        grid2, values2 = read_wxg(p)
        assert np.array_equal(values2, values)

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "bad.wxg"
        p.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(ConfigError):
            read_wxg(p)


class TestManifests:
    def test_round_trip_and_ordering(self, small_grid, tmp_path):
        write_wxg(tmp_path / "f.wxg", small_grid, np.zeros(small_grid.shape))
        entries = [{"model": "m1", "variable": "z500",
                    "init_time": "2024-01-05T00:00:00Z", "lead_hours": 24,
                    "path": "f.wxg"}]
        write_manifest(tmp_path / "man.json", entries)
        got = read_manifest(tmp_path / "man.json")
        assert got[0].model == "m1"
        assert got[0].init_time == datetime(2024, 1, 5, tzinfo=timezone.utc)
        assert got[0].valid_time == datetime(2024, 1, 6, tzinfo=timezone.utc)
        field = got[0].load()
        assert field.variable == "z500" and field.lead_hours == 24

    def test_data_dir_env_root(self, small_grid, tmp_path, monkeypatch):
        data = tmp_path / "data"
        data.mkdir()
        write_wxg(data / "f.wxg", small_grid, np.ones(small_grid.shape))
        write_manifest(tmp_path / "man.json",
                       [{"model": "m", "variable": "t2m",
                         "init_time": "2024-06-01T12:00:00Z", "lead_hours": 0,
                         "path": "f.wxg"}])
        monkeypatch.setenv("WXDIAG_DATA_DIR", str(data))
        got = read_manifest(tmp_path / "man.json")
        assert got[0].path.exists()

    def test_malformed_manifest(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"entries": "not-a-list"}))
        with pytest.raises(ConfigError):
            read_manifest(p)
        p.write_text(json.dumps([{"variable": "z500"}]))
        with pytest.raises(ConfigError):
            read_manifest(p)


class TestClimatologyFiles:
    def test_constant_round_trip(self, small_grid, tmp_path):
        clim = Climatology.constant(small_grid, "t2m", 288.0, 3.0)
        sidecar = write_constant_climatology(tmp_path, clim, "t2m")
        got = read_climatology(sidecar)
        when = datetime(2021, 6, 22, tzinfo=timezone.utc)
        mu0, sg0 = clim.lookup(when)
        mu1, sg1 = got.lookup(when)
        assert np.array_equal(mu0, mu1) and np.array_equal(sg0, sg1)
        assert got.sigma_floor == 0.5

    def test_per_doy_round_trip(self, tmp_path):
        g = uniform_grid(6, 8)
        clim = Climatology.constant(g, "t850", 275.0, 2.0)
        # make DOY 100 distinctive to prove per-slot storage
        clim.mu[0][99] = np.full(g.shape, 300.0)
        sidecar = write_climatology(tmp_path, clim, "t850")
        got = read_climatology(sidecar)
        when = datetime(2023, 4, 9, tzinfo=timezone.utc)  # DOY 100 in leap calendar
        mu, _ = got.lookup(when)
        assert np.all(mu == 300.0)

    def test_incomplete_per_doy_rejected(self, tmp_path):
        g = uniform_grid(6, 8)
        write_wxg(tmp_path / "x_mu.wxg", g, np.zeros(g.shape))
        write_wxg(tmp_path / "x_sg.wxg", g, np.ones(g.shape))
        sidecar = tmp_path / "c.json"
        sidecar.write_text(json.dumps({
            "variable": "t2m", "sigma_floor": 0.5, "kind": "per_doy",
            "entries": [{"doy": 1, "hour": 0, "mu": "x_mu.wxg", "sigma": "x_sg.wxg"}],
        }))
        with pytest.raises(ConfigError):
            read_climatology(sidecar)


class TestForecastSet:
    def _write_case(self, tmp_path, grid, lead_sets):
        fc, vf = [], []
        seen = set()
        for model, leads in lead_sets.items():
            for lead in leads:
                path = f"{model}_{lead}.wxg"
                write_wxg(tmp_path / path, grid, np.zeros(grid.shape))
                fc.append({"model": model, "variable": "z500",
                           "init_time": "2024-01-05T00:00:00Z",
                           "lead_hours": lead, "path": path})
                valid = datetime(2024, 1, 5, tzinfo=timezone.utc)
                from datetime import timedelta

                valid += timedelta(hours=lead)
                tag = valid.isoformat()
                if tag not in seen:
                    seen.add(tag)
                    vpath = f"v_{lead}.wxg"
                    write_wxg(tmp_path / vpath, grid, np.zeros(grid.shape))
                    vf.append({"model": "era5", "variable": "z500",
                               "init_time": valid.strftime("%Y-%m-%dT%H:%M:%SZ"),
                               "lead_hours": 0, "path": vpath})
        write_manifest(tmp_path / "fc.json", fc)
        write_manifest(tmp_path / "vf.json", vf)
        return ForecastSet.from_manifests(tmp_path / "fc.json", tmp_path / "vf.json")

    def test_clean_case_has_no_findings(self, small_grid, tmp_path):
        fset = self._write_case(tmp_path, small_grid, {"a": [0, 24], "b": [0, 24]})
        assert fset.check() == []

    def test_missing_verification_reported(self, small_grid, tmp_path):
        fset = self._write_case(tmp_path, small_grid, {"a": [0, 24]})
        key = ("z500", fset.forecasts[("a", "z500", fset.init_times[0], 24)].valid_time)
        del fset.verifications[key]
        findings = fset.check()
        assert any("no verification" in f for f in findings)

    def test_lead_mismatch_names_models(self, small_grid, tmp_path):
        fset = self._write_case(tmp_path, small_grid, {"a": [0, 24], "b": [0, 48]})
        findings = fset.check()
        assert any("lead grids differ" in f and "a" in f and "b" in f for f in findings)
