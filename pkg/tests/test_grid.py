import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wxdiag.errors import InvalidField
from wxdiag.grid import (
    BANDS,
    LatLonGrid,
    ScalarField,
    area_weighted_mean,
    band_mask,
    uniform_grid,
)


def quadrature_mean(values, lats):
    """Independent oracle: explicit cos-phi quadrature, point by point."""
    num = den = 0.0
    for i, lat in enumerate(lats):
        w = np.cos(np.deg2rad(lat))
        if abs(lat) == 90.0:
            w = 0.0
        for j in range(values.shape[1]):
            num += w * values[i, j]
            den += w
    return num / den


class TestLatLonGrid:
    def test_weights_normalized_to_mean_one(self, oracle_grid):
        assert abs(oracle_grid.area_weights().mean() - 1.0) < 1e-12

    def test_pole_rows_get_exactly_zero_weight(self):
        g = LatLonGrid(lats=np.linspace(-90, 90, 19), lons=np.arange(0, 360, 10))
        w = g.area_weights()
        assert w[0, 0] == 0.0 and w[-1, 0] == 0.0

    def test_descending_latitudes_normalized(self):
        g = LatLonGrid(lats=np.linspace(60, -60, 7), lons=np.arange(0, 360, 45))
        assert g.lats[0] == -60.0 and g.source_descending

    @pytest.mark.parametrize("lats,lons", [
        (np.array([0.0, 1.0]), np.arange(0, 360, 90)),           # nlat < 3
        (np.linspace(-60, 60, 5), np.array([0.0, 90.0, 180.0])),  # nlon < 4
        (np.array([-95.0, 0.0, 95.0]), np.arange(0, 360, 90)),    # out of range
        (np.array([0.0, 10.0, 5.0]), np.arange(0, 360, 90)),      # not monotone
        (np.linspace(-60, 60, 5), np.arange(0, 450, 90)),         # span >= 360
        (np.linspace(-60, 60, 5), np.array([0.0, 10.0, 30.0, 40.0])),  # nonuniform
    ])
    def test_invalid_grids_rejected(self, lats, lons):
        with pytest.raises(InvalidField):
            LatLonGrid(lats=lats, lons=lons)

    def test_fields_are_immutable(self, small_grid):
        f = ScalarField(grid=small_grid, values=np.zeros(small_grid.shape), variable="t2m")
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestAreaWeightedMean:
    def test_constant_field(self, oracle_grid):
        f = ScalarField(grid=oracle_grid, values=np.full(oracle_grid.shape, 7.25),
                        variable="t2m")
        assert area_weighted_mean(f) == pytest.approx(7.25, abs=1e-12)

    def test_odd_symmetry(self, oracle_grid):
        vals = np.sin(oracle_grid.lat_radians())[:, None] * np.ones((1, oracle_grid.nlon))
        f = ScalarField(grid=oracle_grid, values=vals, variable="t2m")
        assert area_weighted_mean(f) == pytest.approx(0.0, abs=1e-12)

    def test_matches_quadrature_oracle(self):
        g = uniform_grid(64, 128)
        vals = np.cos(2.0 * g.lon_radians())[None, :] ** 2 * np.ones((64, 1))
        f = ScalarField(grid=g, values=vals, variable="z500")
        assert area_weighted_mean(f) == pytest.approx(
            quadrature_mean(vals, g.lats), abs=1e-12)

    def test_linearity(self, small_grid, rng):
        f = rng.standard_normal(small_grid.shape)
        h = rng.standard_normal(small_grid.shape)
        lhs = area_weighted_mean(2.5 * f - 1.25 * h, small_grid)
        rhs = 2.5 * area_weighted_mean(f, small_grid) - 1.25 * area_weighted_mean(h, small_grid)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_nonfinite_rejected(self, small_grid):
        vals = np.zeros(small_grid.shape)
        vals[3, 4] = np.nan
        with pytest.raises(InvalidField):
            area_weighted_mean(vals, small_grid)


class TestBandMask:
    def test_equator_is_tropics(self, oracle_grid):
        g = uniform_grid(91, 180)  # includes phi = 0 row
        mask = band_mask(g, "tropics")
        assert mask[np.argmin(np.abs(g.lats)), 0]

    def test_sixty_degrees_is_polar(self):
        g = LatLonGrid(lats=np.arange(-90, 91, 30.0), lons=np.arange(0, 360, 90.0))
        polar = band_mask(g, "polar")
        extra = band_mask(g, "extratropics")
        i60 = list(g.lats).index(60.0)
        i_minus60 = list(g.lats).index(-60.0)
        assert polar[i60, 0] and polar[i_minus60, 0]
        assert not extra[i60, 0]

    @given(nlat=st.integers(3, 73), nlon=st.integers(4, 64),
           include_poles=st.booleans())
    @settings(max_examples=25, deadline=None)
    def test_masks_partition_every_grid(self, nlat, nlon, include_poles):
        if include_poles:
            g = LatLonGrid(lats=np.linspace(-90, 90, nlat),
                           lons=np.arange(nlon) * 360.0 / nlon)
        else:
            g = uniform_grid(nlat, nlon)
        masks = [band_mask(g, b) for b in BANDS]
        union = masks[0] | masks[1] | masks[2]
        assert np.all(union)
        assert not np.any(masks[0] & masks[1])
        assert not np.any(masks[0] & masks[2])
        assert not np.any(masks[1] & masks[2])
