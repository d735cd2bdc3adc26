"""Synthetic-field generators that make the framework's claims testable.

Fields are synthesized in sqrt(cos phi)-weighted coefficient space with
Gaussian amplitudes per shell, then divided by sqrt(cos phi) on the way
back to the grid, so the spectral pipeline recovers the planted shell
energies exactly up to sampling noise. Grids must therefore exclude the
pole rows (use grid.uniform_grid). Every generator is deterministic
given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from zlib import crc32

import numpy as np

from .balance import GRAVITY, PhysicalConstants, midlatitude_mask
from .errors import GridTooCoarse, InvalidField
from .grid import LatLonGrid, ScalarField, area_weighted_mean, uniform_grid
from .skill import Climatology
from .spectral import _shell_index, grid_k_max

DEFAULT_ORACLE_SHAPE = (96, 192)


@dataclass(frozen=True)
class SpectralRecipe:
    """Target shell energies E(k) for k = 1..k_max plus an RNG seed."""

    energy: np.ndarray
    seed: int = 0

    def __post_init__(self):
        e = np.asarray(self.energy, dtype=float)
        if e.ndim != 1 or e.size == 0:
            raise InvalidField("recipe energy must be a 1D array for k = 1..k_max")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise InvalidField("recipe energies must be finite and nonnegative")
        object.__setattr__(self, "energy", e)

    @property
    def k_max(self) -> int:
        return self.energy.size

    @classmethod
    def power_law(cls, k_max: int, exponent: float, amplitude: float = 1.0, seed: int = 0):
        k = np.arange(1, k_max + 1, dtype=float)
        return cls(energy=amplitude * k**exponent, seed=seed)

    @classmethod
    def single_shell(cls, k: int, k_max: int, energy: float = 1.0, seed: int = 0):
        e = np.zeros(k_max)
        e[k - 1] = energy
        return cls(energy=e, seed=seed)

    @classmethod
    def scaled(cls, other: "SpectralRecipe", factor: float, seed: int | None = None):
        return cls(energy=other.energy * factor, seed=other.seed if seed is None else seed)


def _check_no_poles(grid: LatLonGrid) -> np.ndarray:
    c = grid.cos_lat()
    if np.any(c <= 0.0):
        raise InvalidField("synthetic generators need a grid without pole rows")
    return c


def _shell_mode_counts(shells: np.ndarray, k_max: int) -> np.ndarray:
    counts = np.bincount(shells.ravel(), minlength=k_max + 1)
    return counts[: k_max + 1]


def _weighted_noise_with_spectrum(recipe: SpectralRecipe, grid: LatLonGrid,
                                  rng: np.random.Generator) -> np.ndarray:
    """Real field in weighted space whose expected shell energies equal E(k).

    The DFT of real white noise is Hermitian; scaling it by a radially
    symmetric factor per shell keeps it Hermitian, so the inverse
    transform is real and the realized shell energy is chi^2-distributed
    around the target.
    """
    nlat, nlon = grid.shape
    n = nlat * nlon
    k_max = grid_k_max(grid)
    if recipe.k_max > k_max:
        raise GridTooCoarse(
            f"recipe k_max={recipe.k_max} exceeds grid support {k_max}"
        )
    shells = _shell_index(nlat, nlon)
    counts = _shell_mode_counts(shells, recipe.k_max)
    # Per-mode amplitude c(k): shell energy sum |c W|^2 / n^2 targets E(k)
    # with E|W|^2 = n for white noise.
    scale = np.zeros(shells.max() + 1)
    for k in range(1, recipe.k_max + 1):
        if counts[k] > 0 and recipe.energy[k - 1] > 0:
            scale[k] = np.sqrt(n * recipe.energy[k - 1] / counts[k])
    white = rng.standard_normal((nlat, nlon))
    coeffs = np.fft.fft2(white) * scale[shells]
    return np.fft.ifft2(coeffs).real


def field_with_spectrum(recipe: SpectralRecipe, grid: LatLonGrid,
                        variable: str = "z500", model: str = "synthetic",
                        rng: np.random.Generator | None = None,
                        **field_kwargs) -> ScalarField:
    """Random-phase field whose isotropic spectrum matches the recipe."""
    c = _check_no_poles(grid)
    if rng is None:
        rng = np.random.default_rng(recipe.seed)
    g = _weighted_noise_with_spectrum(recipe, grid, rng)
    sqrt_c = np.sqrt(c)[:, None]
    # project out the component that would leave the grid-space field with a
    # nonzero area-weighted mean, so the analysis round-trips exactly
    g = g - (sqrt_c * g).mean() / c.mean() * sqrt_c
    values = g / sqrt_c
    return ScalarField(grid=grid, values=values, variable=variable, model=model,
                       **field_kwargs)


def ensemble_with_conditional_variance(
    mean_recipe: SpectralRecipe,
    var_recipe: SpectralRecipe,
    members: int,
    grid: LatLonGrid,
    variable: str = "z500",
) -> list[ScalarField]:
    """Members = one fixed mean field + independent per-member perturbations.

    Perturbation shell energies follow var_recipe, so the ensemble-mean
    spectrum deficit relative to the per-member expected spectrum equals
    the planted variance.
    """
    if members < 2:
        raise InvalidField(f"need >= 2 members, got {members}")
    if mean_recipe.k_max != var_recipe.k_max:
        raise InvalidField("mean and variance recipes must share k_max")
    c = _check_no_poles(grid)
    rng = np.random.default_rng(mean_recipe.seed)
    mean_g = _weighted_noise_with_spectrum(mean_recipe, grid, rng)
    sqrt_c = np.sqrt(c)[:, None]
    out = []
    for i in range(members):
        g = mean_g + _weighted_noise_with_spectrum(var_recipe, grid, rng)
        g = g - (sqrt_c * g).mean() / c.mean() * sqrt_c
        out.append(
            ScalarField(
                grid=grid,
                values=g / sqrt_c,
                variable=variable,
                model=f"member{i:03d}",
            )
        )
    return out


def shifted_wave_pair(amplitude: float, wavenumber: int, shift: float,
                      grid: LatLonGrid, variable: str = "z500") -> tuple[ScalarField, ScalarField]:
    """(truth, forecast) zonal waves displaced by `shift` radians.

    truth = A cos(l0 * lon), forecast = A cos(l0 * (lon - shift)); the
    unweighted zonal MSE is A^2 (1 - cos(l0 * shift)) up to discretization.
    """
    if wavenumber < 1 or 2 * wavenumber >= grid.nlon:
        raise GridTooCoarse(f"wavenumber {wavenumber} not resolvable on nlon={grid.nlon}")
    lon = grid.lon_radians()
    truth_row = amplitude * np.cos(wavenumber * lon)
    fcst_row = amplitude * np.cos(wavenumber * (lon - shift))
    ones = np.ones((grid.nlat, 1))
    truth = ScalarField(grid=grid, values=ones * truth_row[None, :],
                        variable=variable, model="truth")
    forecast = ScalarField(grid=grid, values=ones * fcst_row[None, :],
                           variable=variable, model="shifted")
    return truth, forecast


def balanced_state(
    grid: LatLonGrid,
    constants: PhysicalConstants | None = None,
    z_amplitude: float = 120.0,
    t_mean_k: float = 260.0,
) -> tuple[ScalarField, ScalarField, ScalarField, ScalarField, ScalarField]:
    """(u, v, z500, z850, t_layer) satisfying the discrete balance stencils.

    Winds come from the same centered-difference geostrophic stencil the
    diagnostics use (with |f| clamped outside the midlatitude band so the
    equatorial rows stay finite); thickness follows the hydrostatic
    relation pointwise. geostrophic and hydrostatic scores are therefore
    ~exact by construction.
    """
    from . import balance as _balance

    constants = constants or PhysicalConstants()
    if not np.any(midlatitude_mask(grid, constants)):
        raise InvalidField("grid has no midlatitude rows for the balance oracle")
    lat = grid.lat_radians()[:, None]
    lon = grid.lon_radians()[None, :]
    z500_vals = 5500.0 + z_amplitude * np.sin(2.0 * lat) * np.cos(3.0 * lon) \
        - 400.0 * np.sin(lat) ** 2
    phi = GRAVITY * z500_vals
    dphi_dx, dphi_dy = _balance.sphere_gradient(phi, grid, constants)
    f = grid.coriolis(constants.omega)[:, None]
    f_safe = np.where(np.abs(f) < constants.f_floor,
                      np.where(f < 0, -constants.f_floor, constants.f_floor), f)
    u_vals = -dphi_dy / f_safe
    v_vals = dphi_dx / f_safe
    t_vals = np.full(grid.shape, t_mean_k) + 10.0 * np.cos(lat) * np.ones_like(lon)
    z850_vals = z500_vals - constants.r_dry * t_vals * np.log(850.0 / 500.0) / GRAVITY
    mk = lambda vals, var: ScalarField(grid=grid, values=vals, variable=var, model="balanced")
    return (
        mk(u_vals, "u500"),
        mk(v_vals, "v500"),
        mk(z500_vals, "z500"),
        mk(z850_vals, "z850"),
        mk(t_vals, "t850"),
    )


def perturb_winds(u: ScalarField, v: ScalarField, rho: float, seed: int,
                  constants: PhysicalConstants | None = None) -> tuple[ScalarField, ScalarField]:
    """Add white noise so the perturbed wind has ageostrophic fraction rho.

    The noise RMS is rho times the RMS of the *perturbed* wind over the
    midlatitude mask, i.e. sigma^2 = rho^2 V / (1 - rho^2) with V the
    area-weighted mean squared speed of the balanced wind.
    """
    if not (0.0 <= rho < 1.0):
        raise ValueError("rho must be in [0, 1)")
    if rho == 0.0:
        return u, v
    constants = constants or PhysicalConstants()
    mask = midlatitude_mask(u.grid, constants)
    speed2 = area_weighted_mean(u.values**2 + v.values**2, u.grid, mask=mask)
    total_noise_var = rho**2 * speed2 / (1.0 - rho**2)
    sigma = np.sqrt(total_noise_var / 2.0)
    rng = np.random.default_rng(seed)
    u_p = u.with_values(u.values + sigma * rng.standard_normal(u.grid.shape))
    v_p = v.with_values(v.values + sigma * rng.standard_normal(v.grid.shape))
    return u_p, v_p


def drifting_ke_series(gamma_per_day: float, lead_hours: list[int]) -> dict[int, float]:
    """KE ratio series ratio(tau) = exp(gamma * tau_days)."""
    if not lead_hours:
        raise InvalidField("lead list must be nonempty")
    return {int(h): float(np.exp(gamma_per_day * h / 24.0)) for h in lead_hours}


def dampen_high_wavenumbers(field: ScalarField, cutoff: int, factor: float) -> ScalarField:
    """Scale spectral amplitudes above `cutoff` by `factor` (in weighted space).

    factor < 1 mimics the loss-induced deficit of a conditional-mean
    forecast; factor > 1 mimics sampling-noise inflation.
    """
    grid = field.grid
    c = _check_no_poles(grid)
    sqrt_c = np.sqrt(c)[:, None]
    g = field.values * sqrt_c
    shells = _shell_index(grid.nlat, grid.nlon)
    gain = np.where(shells > cutoff, factor, 1.0)
    damped = np.fft.ifft2(np.fft.fft2(g) * gain).real
    return field.with_values(damped / sqrt_c)


_DEFAULT_MODEL_PROFILES = {
    # name: family, loss, spectral gain above k=12, KE drift/day, tail alpha,
    # day-1 error amplitude (fraction of truth variance)
    "specnet": {"family": "spectral", "loss": "crps", "gain": 1.0, "gamma": -0.002,
                "alpha": 0.05, "err0": 0.02},
    "meanopt": {"family": "gnn", "loss": "mse", "gain": 0.45, "gamma": -0.02,
                "alpha": 0.30, "err0": 0.015},
    "driftnet": {"family": "vit", "loss": "mse", "gain": 0.7, "gamma": -0.06,
                 "alpha": 0.15, "err0": 0.025},
}


def write_synthetic_case(out_dir, seed: int = 0, nlat: int = 48, nlon: int = 96,
                         n_inits: int = 3,
                         lead_hours: tuple[int, ...] = (0, 24, 72, 120),
                         model_profiles: dict | None = None) -> dict:
    """Write a complete synthetic WXG1 dataset the CLI can evaluate.

    Produces verification truth, per-model forecasts with controlled
    corruption (spectral damping, growing noise, KE drift, warm-tail
    attenuation on t2m), constant climatologies, manifests and a run
    config. Returns the config dict; everything is deterministic in seed.
    """
    import json
    from pathlib import Path

    from . import io as wio

    out = Path(out_dir)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    grid = uniform_grid(nlat, nlon)
    profiles = model_profiles or _DEFAULT_MODEL_PROFILES
    inits = [datetime(2024, 1, 5 + 10 * i, tzinfo=timezone.utc) for i in range(n_inits)]
    rng = np.random.default_rng(seed)
    k_cap = grid_k_max(grid)
    base_recipe = SpectralRecipe.power_law(min(k_cap, 40), -3.0, amplitude=40.0)

    clims = {
        "t2m": Climatology.constant(grid, "t2m", 288.0, 3.0),
        "t850": Climatology.constant(grid, "t850", 275.0, 3.0),
    }
    mk = lambda vals, var, model, t0, lead: ScalarField(
        grid=grid, values=vals, variable=var, model=model, init_time=t0, lead_hours=lead)

    lat = grid.lat_radians()[:, None]
    lon = grid.lon_radians()[None, :]

    def truth_fields(valid_seed: int) -> dict[str, np.ndarray]:
        trng = np.random.default_rng(valid_seed)
        u, v, z500, z850, t850 = balanced_state(
            grid, z_amplitude=120.0 + 10.0 * trng.standard_normal())
        # heavy warm tail on t2m so the exceedance machinery has support
        x = trng.standard_normal(grid.shape)
        heavy = trng.random(grid.shape) < 0.08
        x = np.where(heavy, 2.0 + trng.exponential(1.0, grid.shape), x)
        t2m = 288.0 + 3.0 * x
        q700 = np.clip(0.004 + 0.001 * np.cos(2 * lat) * np.cos(3 * lon)
                       + 0.0002 * trng.standard_normal(grid.shape), 1e-6, None)
        return {
            "u500": u.values, "v500": v.values, "z500": z500.values,
            "z850": z850.values, "t850": t850.values, "t2m": t2m, "q700": q700,
            "u850": 0.6 * u.values, "v850": 0.6 * v.values,
        }

    forecast_entries = []
    verif_entries = []
    written_verif = set()
    variables = ("z500", "t2m", "u500", "v500", "t850", "q700", "u850", "v850", "z850")
    lam_growth = 0.35  # per day, planted log-RMSE slope

    for t0 in inits:
        for lead in lead_hours:
            valid = t0 + timedelta(hours=int(lead))
            valid_tag = valid.strftime("%Y%m%d%H")
            truth = truth_fields(seed * 1_000_000 + int(valid_tag) % 1_000_000)
            for var in variables:
                key = (var, valid_tag)
                if key not in written_verif:
                    path = f"fields/verif_{var}_{valid_tag}.wxg"
                    wio.write_wxg(out / path, grid, truth[var])
                    verif_entries.append({
                        "model": "era5", "variable": var,
                        "init_time": wio.format_time(valid), "lead_hours": 0,
                        "path": path,
                    })
                    written_verif.add(key)
            for name, prof in sorted(profiles.items()):
                mrng = np.random.default_rng(
                    seed * 7_000_000 + int(valid_tag) % 1_000_000 + crc32(name.encode()) % 4096)
                days = lead / 24.0
                err_amp = prof["err0"] * np.exp(lam_growth * days)
                drift = np.exp(prof["gamma"] * days / 2.0)
                for var in variables:
                    vals = truth[var].copy()
                    if var in ("u500", "v500", "u850", "v850"):
                        vals = vals * drift
                    if var == "t2m" and lead > 0:
                        delta = (truth["t2m"] - 288.0) / 3.0
                        vals = vals - prof["alpha"] * 3.0 * np.maximum(0.0, delta - 2.0)
                    if lead > 0:
                        noise = field_with_spectrum(
                            SpectralRecipe(base_recipe.energy * err_amp**2,
                                           seed=int(mrng.integers(2**31))),
                            grid, variable=var).values
                        scale = max(float(np.sqrt(np.mean(truth[var] ** 2))) / 40.0, 1e-6)
                        vals = vals + noise * scale * 0.02
                        f = mk(vals, var, name, t0, lead)
                        f = dampen_high_wavenumbers(f, cutoff=12, factor=prof["gain"])
                        vals = f.values
                    path = f"fields/{name}_{var}_{t0.strftime('%Y%m%d%H')}_L{lead:04d}.wxg"
                    wio.write_wxg(out / path, grid, vals)
                    forecast_entries.append({
                        "model": name, "variable": var,
                        "init_time": wio.format_time(t0), "lead_hours": int(lead),
                        "path": path,
                    })

    forecast_entries.sort(key=lambda e: (e["model"], e["variable"], e["init_time"], e["lead_hours"]))
    verif_entries.sort(key=lambda e: (e["variable"], e["init_time"]))
    wio.write_manifest(out / "forecasts.json", forecast_entries)
    wio.write_manifest(out / "verification.json", verif_entries)
    clim_paths = {}
    for var, clim in clims.items():
        sidecar = wio.write_constant_climatology(out / "climatology", clim, var)
        clim_paths[var] = str(sidecar.relative_to(out))

    config = {
        "forecast_manifest": "forecasts.json",
        "verification_manifest": "verification.json",
        "climatology": clim_paths,
        "variables": ["z500", "t2m", "u500", "v500", "t850", "q700"],
        "leads": [int(h) for h in lead_hours],
        "models": sorted(profiles),
        "model_meta": {m: {"family": p["family"], "loss": p["loss"]}
                       for m, p in profiles.items()},
        "output_dir": "reports",
        "seed": seed,
        "workers": 1,
    }
    with open(out / "config.json", "w") as fh:
        json.dump(config, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return config


def planted_tail_bias(
    clim: Climatology,
    alpha: float,
    grid: LatLonGrid,
    seed: int,
    valid_time: datetime | None = None,
    noise_sigma: float = 0.1,
    heavy_fraction: float = 0.1,
) -> tuple[ScalarField, ScalarField]:
    """(forecast, verify) pair with a planted linear warm-tail bias.

    verify has a heavy warm tail (an exponential tail grafted above
    2 sigma on a heavy_fraction of points) so the exceedance bins out to
    ~6 sigma are populated; forecast = verify - alpha*sigma*max(0, d-2)
    plus Gaussian noise, where d is the standardized exceedance.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not grid.same_geometry(clim.grid):
        raise InvalidField("grid does not match climatology grid")
    if valid_time is None:
        valid_time = datetime(2021, 6, 22, tzinfo=timezone.utc)
    mu, sigma = clim.lookup(valid_time)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(grid.shape)
    heavy = rng.random(grid.shape) < heavy_fraction
    x = np.where(heavy, 2.0 + rng.exponential(1.0, grid.shape), x)
    verify_vals = mu + sigma * x
    delta = x
    bias = -alpha * sigma * np.maximum(0.0, delta - 2.0)
    noise = noise_sigma * sigma * rng.standard_normal(grid.shape)
    forecast_vals = verify_vals + bias + noise
    verify = ScalarField(grid=grid, values=verify_vals, variable=clim.variable,
                         model="truth", init_time=valid_time, lead_hours=0)
    forecast = ScalarField(grid=grid, values=forecast_vals, variable=clim.variable,
                           model="planted", init_time=valid_time, lead_hours=0)
    return forecast, verify
