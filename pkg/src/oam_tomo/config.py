"""Run configuration: JSON-loadable parameters with validated defaults.

Defaults pin the reference setup: 256-point grid, 633 nm, 0.765 mm waist,
f = 336 mm lens tilted 27 degrees, 1-degree converter-scan step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .angles import deg, rad
from .fields import GridSpec, default_grid
from .imageio import read_json
from .lens import LensSpec
from .tomography import NOISELESS_TOL, NOISY_TOL


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs beyond its positional arguments."""

    grid: GridSpec = field(default_factory=default_grid)
    lens: LensSpec = field(default_factory=LensSpec)
    pipeline: str = "abstract"
    noise_sigma_rel: float = 0.0  # relative intensity noise on images
    alpha_sigma: float = 0.0  # angular noise on readings (radians)
    seed: int = 0
    seeds: int = 50  # ensemble size for noisy reproductions
    beta_step: float = rad(1.0)
    membership_tol_noiseless: float = NOISELESS_TOL
    membership_tol_noisy: float = NOISY_TOL
    out_dir: str = "out"

    def __post_init__(self):
        if self.pipeline not in ("abstract", "physical"):
            raise ConfigError(f"pipeline must be abstract or physical, got {self.pipeline!r}")
        if not 0.0 <= self.noise_sigma_rel < 1.0:
            raise ConfigError("noise_sigma_rel must lie in [0, 1)")
        if self.alpha_sigma < 0:
            raise ConfigError("alpha_sigma_deg must be non-negative")
        if not 0 < self.beta_step <= rad(2.0) + 1e-12:
            raise ConfigError("beta_step_deg must lie in (0, 2]")
        if self.seeds < 1:
            raise ConfigError("seeds must be at least 1")

    @property
    def noisy(self) -> bool:
        return self.noise_sigma_rel > 0 or self.alpha_sigma > 0

    @property
    def membership_tol(self) -> float:
        return self.membership_tol_noisy if self.noisy else self.membership_tol_noiseless

    def to_json_dict(self) -> dict:
        return {
            "grid": self.grid.to_json_dict(),
            "lens": self.lens.to_json_dict(),
            "pipeline": self.pipeline,
            "noise_sigma_rel": self.noise_sigma_rel,
            "alpha_sigma_deg": deg(self.alpha_sigma),
            "seed": self.seed,
            "seeds": self.seeds,
            "beta_step_deg": deg(self.beta_step),
            "membership_tol_noiseless_rad": self.membership_tol_noiseless,
            "membership_tol_noisy_deg": deg(self.membership_tol_noisy),
            "out_dir": self.out_dir,
        }


_KEYS = {
    "grid",
    "lens",
    "pipeline",
    "noise_sigma_rel",
    "alpha_sigma_deg",
    "seed",
    "seeds",
    "beta_step_deg",
    "membership_tol_noiseless_rad",
    "membership_tol_noisy_deg",
    "out_dir",
}


def _build_grid(d: dict) -> GridSpec:
    # A bare {"n": ...} (or partial spec) fills in the reference geometry.
    extra = set(d) - {"n", "pitch_m", "wavelength_m", "waist_m"}
    if extra:
        raise ConfigError(f"unknown grid keys: {sorted(extra)}")
    if "pitch_m" in d:
        return GridSpec.from_json_dict(d)
    from .fields import DEFAULT_WAIST, DEFAULT_WAVELENGTH

    return default_grid(
        n=int(d.get("n", 256)),
        waist=float(d.get("waist_m", DEFAULT_WAIST)),
        wavelength=float(d.get("wavelength_m", DEFAULT_WAVELENGTH)),
    )


def config_from_dict(d: dict) -> RunConfig:
    unknown = set(d) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(
            grid=_build_grid(d["grid"]) if "grid" in d else default_grid(),
            lens=LensSpec.from_json_dict(d["lens"]) if "lens" in d else LensSpec(),
            pipeline=d.get("pipeline", "abstract"),
            noise_sigma_rel=float(d.get("noise_sigma_rel", 0.0)),
            alpha_sigma=rad(float(d.get("alpha_sigma_deg", 0.0))),
            seed=int(d.get("seed", 0)),
            seeds=int(d.get("seeds", 50)),
            beta_step=rad(float(d.get("beta_step_deg", 1.0))),
            membership_tol_noiseless=float(d.get("membership_tol_noiseless_rad", NOISELESS_TOL)),
            membership_tol_noisy=rad(float(d.get("membership_tol_noisy_deg", deg(NOISY_TOL)))),
            out_dir=str(d.get("out_dir", "out")),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = read_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return config_from_dict(raw)


def override(cfg: RunConfig, **kwargs) -> RunConfig:
    """Apply non-None CLI overrides onto a loaded config."""
    clean = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **clean) if clean else cfg
