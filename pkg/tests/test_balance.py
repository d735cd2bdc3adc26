import numpy as np
import pytest

from wxdiag.balance import (
    BalanceComponent,
    BalanceNormalizers,
    GRAVITY,
    PhysicalConstants,
    divergence,
    geostrophic_score,
    hydrostatic_score,
    midlatitude_mask,
    nondivergence_score,
    pcs_composite,
    sphere_gradient,
    thermal_wind_score,
    vorticity,
)
from wxdiag.errors import DegenerateFlow, DegenerateShear, DegenerateThickness, IncompleteBalance
from wxdiag.grid import ScalarField, area_weighted_mean, uniform_grid
from wxdiag.synth import balanced_state, perturb_winds

CONST = PhysicalConstants()


def field(grid, values, variable="z500"):
    return ScalarField(grid=grid, values=values, variable=variable)


class TestSphereDerivatives:
    def test_gradient_matches_analytic(self):
        g = uniform_grid(90, 180)
        lat = g.lat_radians()[:, None]
        lon = g.lon_radians()[None, :]
        f = np.sin(2.0 * lat) * np.cos(3.0 * lon)
        ddx, ddy = sphere_gradient(f, g, CONST)
        a = CONST.radius_m
        truth_x = -3.0 * np.sin(2.0 * lat) * np.sin(3.0 * lon) / (a * np.cos(lat))
        truth_y = 2.0 * np.cos(2.0 * lat) * np.cos(3.0 * lon) / a
        mask = midlatitude_mask(g, CONST)
        assert np.max(np.abs((ddx - truth_x)[mask])) < 2e-9 / a * 1e9  # ~1e-3 rel scale
        assert np.max(np.abs((ddy - truth_y)[mask])) * a < 5e-3

    def test_second_order_convergence(self):
        errs = []
        for nlat in (32, 64, 128):
            g = uniform_grid(nlat, 2 * nlat)
            lat = g.lat_radians()[:, None]
            lon = g.lon_radians()[None, :]
            f = np.sin(2.0 * lat) * np.cos(3.0 * lon)
            _, ddy = sphere_gradient(f, g, CONST)
            truth_y = 2.0 * np.cos(2.0 * lat) * np.cos(3.0 * lon) / CONST.radius_m
            mask = midlatitude_mask(g, CONST)
            errs.append(np.max(np.abs((ddy - truth_y)[mask])))
        assert errs[0] / errs[1] > 3.0
        assert errs[1] / errs[2] > 3.0

    def test_solid_body_rotation_is_divergence_free(self):
        g = uniform_grid(96, 192)
        u = 20.0 * np.cos(g.lat_radians())[:, None] * np.ones((1, g.nlon))
        v = np.zeros(g.shape)
        div = divergence(u, v, g, CONST)
        mask = midlatitude_mask(g, CONST)
        assert np.max(np.abs(div[mask])) < 1e-12
        zeta = vorticity(u, v, g, CONST)
        truth = 2.0 * 20.0 * np.sin(g.lat_radians())[:, None] / CONST.radius_m
        assert np.max(np.abs((zeta - truth * np.ones((1, g.nlon)))[mask])) < 1e-8


class TestGeostrophic:
    def test_balanced_state_scores_one(self, oracle_grid):
        u, v, z500, _, _ = balanced_state(oracle_grid)
        geo = geostrophic_score(u, v, z500)
        assert geo.ratio < 1e-10
        assert geo.score == pytest.approx(1.0, abs=1e-10)

    def test_doubled_winds_give_half(self, oracle_grid):
        # v = 2 v_g, so |v - v_g| = |v_g| = |v|/2: AGR is exactly 0.5
        u, v, z500, _, _ = balanced_state(oracle_grid)
        geo = geostrophic_score(u.with_values(2.0 * u.values),
                                v.with_values(2.0 * v.values), z500)
        assert geo.ratio == pytest.approx(0.5, abs=1e-12)
        assert geo.score == pytest.approx(0.5, abs=1e-12)

    def test_zero_winds_nonzero_gradient(self, oracle_grid):
        _, _, z500, _, _ = balanced_state(oracle_grid)
        zero = field(oracle_grid, np.zeros(oracle_grid.shape), "u500")
        geo = geostrophic_score(zero, zero, z500)
        assert not np.isfinite(geo.ratio)
        assert geo.score == 0.0

    def test_noise_injection_recovers_rho(self, oracle_grid):
        u, v, z500, _, _ = balanced_state(oracle_grid)
        for rho in (0.1, 0.3, 0.5):
            up, vp = perturb_winds(u, v, rho, seed=99)
            geo = geostrophic_score(up, vp, z500)
            assert abs(geo.ratio - rho) / rho < 0.05


class TestNondivergence:
    def test_streamfunction_flow_is_rotational(self):
        # winds from a streamfunction via the same discrete operators make
        # the discrete divergence vanish identically
        g = uniform_grid(96, 192)
        lat = g.lat_radians()[:, None]
        lon = g.lon_radians()[None, :]
        psi = 1e7 * np.sin(2.0 * lat) * np.cos(2.0 * lon)
        dpsi_dx, dpsi_dy = sphere_gradient(psi, g, CONST)
        u = field(g, -dpsi_dy, "u500")
        v = field(g, dpsi_dx * np.ones_like(lon), "v500")
        res = nondivergence_score(u, v)
        assert res.ratio < 1e-3
        assert res.score > 0.999

    def test_divergent_flow_scores_zero(self):
        # velocity-potential flow: discretely irrotational, so NDR blows up
        g = uniform_grid(96, 192)
        lat = g.lat_radians()[:, None]
        lon = g.lon_radians()[None, :]
        chi = 1e7 * np.sin(2.0 * lat) * np.cos(2.0 * lon)
        dchi_dx, dchi_dy = sphere_gradient(chi, g, CONST)
        u = field(g, dchi_dx, "u500")
        v = field(g, dchi_dy * np.ones_like(lon), "v500")
        res = nondivergence_score(u, v)
        assert res.ratio > 10.0
        assert res.score == 0.0

    def test_zero_flow_degenerate(self):
        g = uniform_grid(96, 192)
        zero = field(g, np.zeros(g.shape), "u500")
        with pytest.raises(DegenerateFlow):
            nondivergence_score(zero, zero)


class TestThermalWind:
    def _balanced_shear_case(self, grid):
        u500, v500, z500, _, t = balanced_state(grid)
        dlnp = np.log(850.0 / 500.0)
        dt_dx, dt_dy = sphere_gradient(t.values, grid, CONST)
        f = grid.coriolis(CONST.omega)[:, None]
        f_safe = np.where(np.abs(f) < CONST.f_floor,
                          np.where(f < 0, -CONST.f_floor, CONST.f_floor), f)
        du = -(CONST.r_dry / f_safe) * dt_dy * dlnp
        dv = (CONST.r_dry / f_safe) * dt_dx * dlnp
        u850 = field(grid, u500.values - du, "u850")
        v850 = field(grid, v500.values - dv, "v850")
        return u500, v500, u850, v850, t, du, dv

    def test_balanced_construction_scores_one(self, oracle_grid):
        u500, v500, u850, v850, t, _, _ = self._balanced_shear_case(oracle_grid)
        res = thermal_wind_score(u500, v500, u850, v850, t)
        assert res.ratio < 1e-12
        assert res.score == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_shear_ratio_sqrt_two(self, oracle_grid):
        # actual shear rotated 90 degrees from the thermal-wind shear with
        # equal magnitude: |s - tw|^2 = 2 |s|^2 pointwise
        u500, v500, u850, v850, t, du, dv = self._balanced_shear_case(oracle_grid)
        u850_rot = field(oracle_grid, u500.values - (-dv), "u850")
        v850_rot = field(oracle_grid, v500.values - du, "v850")
        res = thermal_wind_score(u500, v500, u850_rot, v850_rot, t)
        assert res.ratio == pytest.approx(np.sqrt(2.0), rel=1e-10)
        assert res.score == pytest.approx(1.0 - np.sqrt(2.0) / 2.0, rel=1e-9)

    def test_uniform_temperature_closed_form(self, oracle_grid):
        u500, v500, u850, v850, _, _, _ = self._balanced_shear_case(oracle_grid)
        t_uniform = field(oracle_grid, np.full(oracle_grid.shape, 250.0), "t850")
        res = thermal_wind_score(u500, v500, u850, v850, t_uniform)
        assert res.ratio == pytest.approx(1.0, abs=1e-12)
        assert res.score == pytest.approx(0.5, abs=1e-12)

    def test_zero_shear_degenerate(self, oracle_grid):
        u, v, _, _, t = balanced_state(oracle_grid)
        with pytest.raises(DegenerateShear):
            thermal_wind_score(u, v, u, v, t)


class TestHydrostatic:
    def test_exact_thickness_scores_one(self, oracle_grid):
        _, _, z500, z850, t = balanced_state(oracle_grid)
        res = hydrostatic_score(z500, z850, t)
        assert res.ratio < 1e-10
        assert res.score == pytest.approx(1.0, abs=1e-8)

    def test_uniform_warm_bias_closed_form(self, oracle_grid):
        _, _, z500, z850, t = balanced_state(oracle_grid)
        biased = t.with_values(t.values + 10.0)
        res = hydrostatic_score(z500, z850, biased)
        actual = GRAVITY * (z500.values - z850.values)
        expected_err = CONST.r_dry * 10.0 * np.log(850.0 / 500.0) / area_weighted_mean(
            np.abs(actual), oracle_grid)
        assert res.ratio == pytest.approx(expected_err, rel=1e-10)

    def test_zero_thickness_degenerate(self, oracle_grid):
        z = field(oracle_grid, np.full(oracle_grid.shape, 5000.0))
        t = field(oracle_grid, np.full(oracle_grid.shape, 260.0), "t850")
        with pytest.raises(DegenerateThickness):
            hydrostatic_score(z, z, t)


class TestComposite:
    def mk(self, score):
        return BalanceComponent(ratio=1.0 - score, score=score)

    def test_all_ones(self):
        rep = pcs_composite(self.mk(1.0), self.mk(1.0), self.mk(1.0), self.mk(1.0))
        assert rep.pcs_composite == 1.0

    def test_half_and_half(self):
        rep = pcs_composite(self.mk(1.0), self.mk(0.0), self.mk(1.0), self.mk(0.0))
        assert rep.pcs_composite == 0.5

    def test_arithmetic_example(self):
        rep = pcs_composite(self.mk(0.9), self.mk(0.1), self.mk(0.6), self.mk(0.9))
        assert rep.pcs_composite == pytest.approx(0.625, abs=1e-12)

    def test_permutation_symmetric(self):
        a = pcs_composite(self.mk(0.2), self.mk(0.4), self.mk(0.6), self.mk(0.8))
        b = pcs_composite(self.mk(0.8), self.mk(0.6), self.mk(0.4), self.mk(0.2))
        assert a.pcs_composite == pytest.approx(b.pcs_composite, abs=1e-15)

    def test_missing_component_rejected(self):
        with pytest.raises(IncompleteBalance):
            pcs_composite(self.mk(1.0), None, self.mk(1.0), self.mk(1.0))

    def test_scores_bounded(self, oracle_grid, rng):
        u, v, z500, z850, t = balanced_state(oracle_grid)
        up, vp = perturb_winds(u, v, 0.9, seed=5)
        for comp in (geostrophic_score(up, vp, z500),
                     nondivergence_score(up, vp),
                     hydrostatic_score(z500, z850, t.with_values(t.values + 40.0))):
            assert 0.0 <= comp.score <= 1.0


class TestNormalizers:
    def test_custom_normalizer_changes_score(self, oracle_grid):
        u, v, z500, _, _ = balanced_state(oracle_grid)
        up, vp = perturb_winds(u, v, 0.4, seed=1)
        default = geostrophic_score(up, vp, z500)
        loose = geostrophic_score(up, vp, z500,
                                  normalizers=BalanceNormalizers(agr_max=2.0))
        assert loose.score > default.score
