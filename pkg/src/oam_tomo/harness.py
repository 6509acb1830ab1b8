"""Sample sets, measurement providers, and batch reproduction runs.

Providers bridge states to ImageReadings through one of three paths:
geometry (exact transformed angles, no images), abstract (render the
transformed superposition and analyze the pixels), physical (render, pass
through the simulated tilted lens, propagate, analyze). Batch runs are
deterministic: every random draw descends from SeedSequence((seed, state
index, ensemble index)).
"""

from __future__ import annotations

import numpy as np

from .analysis import ImageReading, mode_orientation
from .angles import TWO_PI, ang_dist, deg, rad, wrap
from .config import RunConfig
from .converter import apply_mc
from .fields import GridSpec, IntensityImage, add_noise, render_state
from .imageio import read_image
from .lens import CalibrationResult, LensSpec, simulate_tilted_lens_measurement
from .states import PoincareState, spherical_distance, state_to_bloch
from .tomography import (
    Measurement,
    Method1Result,
    TriangleEstimate,
    default_beta_grid,
    estimate_state,
    method1_scan,
    table_row,
)

STANDARD_BETAS = (None, 0.0, np.pi / 2)


def _named_states(pairs) -> list[tuple[str, PoincareState]]:
    return [(name, PoincareState.from_degrees(t, p)) for name, t, p in pairs]


# Meridian sweep at phi = 0: pole, three latitudes, opposite pole.
SAMPLE_AE = _named_states(
    [("A", 0, 0), ("B", 45, 0), ("C", 90, 0), ("D", 135, 0), ("E", 180, 0)]
)

# Fixed latitude theta = 135, full turn of phi in 45-degree steps.
SAMPLE_D = _named_states([(f"D{i + 1}", 135, 45 * i) for i in range(8)])

# The 26-state tomography sample: both poles plus three latitude rings.
TABLE1_STATES = _named_states(
    [("1", 0, 0)]
    + [
        (str(2 + ring * 8 + i), theta, 45 * i)
        for ring, theta in enumerate((45, 90, 135))
        for i in range(8)
    ]
    + [("26", 180, 0)]
)


def transformed_state(state: PoincareState, beta: float | None) -> PoincareState:
    return state if beta is None else apply_mc(state, beta)


def exact_reading(state: PoincareState, beta: float | None) -> Measurement:
    """Geometry-path measurement: transformed longitude and visibility with
    no rendering or pixel analysis."""
    x, y, z = state_to_bloch(transformed_state(state, beta))
    vis = float(min(np.hypot(x, y), 1.0))
    alpha = wrap(np.arctan2(y, x), TWO_PI) / 2.0
    return Measurement(beta=beta, alpha=float(alpha), visibility=vis)


def exact_readings(state: PoincareState) -> list[Measurement]:
    return [exact_reading(state, beta) for beta in STANDARD_BETAS]


def abstract_image(state: PoincareState, beta: float | None, grid: GridSpec) -> IntensityImage:
    return render_state(grid, transformed_state(state, beta))


def abstract_provider(state: PoincareState, grid: GridSpec, rng=None, sigma_rel: float = 0.0):
    """Method I provider on rendered images of the transformed state."""

    def provider(beta, n_eta: int = 360) -> ImageReading:
        img = abstract_image(state, beta, grid)
        if rng is not None and sigma_rel > 0:
            img = add_noise(img, rng, gaussian_sigma_rel=sigma_rel)
        return mode_orientation(img, n_eta=n_eta, low_v_threshold=0.0)

    return provider


def physical_provider(
    state: PoincareState, grid: GridSpec, lens: LensSpec, calibration: CalibrationResult
):
    """Method I provider through the tilted-lens simulation; the direct image
    (beta None) never passes through the lens."""

    def provider(beta, n_eta: int = 360) -> ImageReading:
        if beta is None:
            img = render_state(grid, state)
        else:
            img = simulate_tilted_lens_measurement(state, beta, grid, lens, calibration.offset)
        return mode_orientation(img, n_eta=n_eta, low_v_threshold=0.0)

    return provider


class ScanImageCache:
    """Noiseless scan images of one state, rendered once and perturbed per
    seed; keeps 100-seed noise ensembles from re-rendering 360 frames each."""

    def __init__(self, state: PoincareState, grid: GridSpec, beta_grid: np.ndarray):
        self.state = state
        self.grid = grid
        self.images: dict[float | None, IntensityImage] = {
            None: abstract_image(state, None, grid)
        }
        for beta in beta_grid:
            self.images[round(float(beta), 12)] = abstract_image(state, float(beta), grid)

    def provider_for(self, rng, sigma_rel: float):
        def provider(beta, n_eta: int = 360) -> ImageReading:
            key = None if beta is None else round(float(beta), 12)
            img = self.images.get(key)
            if img is None:  # off-grid refined angle: render on demand
                img = abstract_image(self.state, float(beta), self.grid)
            if rng is not None and sigma_rel > 0:
                img = add_noise(img, rng, gaussian_sigma_rel=sigma_rel)
            return mode_orientation(img, n_eta=n_eta, low_v_threshold=0.0)

        return provider


class DirectoryScanProvider:
    """Analyzer for captured converter-scan frames: scan_bDDD.pgm/.png at
    integer degrees, plus an optional direct.pgm/.png for the pole gate.
    Off-grid queries fall back to the nearest captured frame."""

    def __init__(self, directory):
        from pathlib import Path

        directory = Path(directory)
        self.frames: dict[int, object] = {}
        for path in sorted(directory.glob("scan_b*")):
            if path.suffix.lower() not in (".pgm", ".png"):
                continue
            try:
                bdeg = int(path.stem[len("scan_b") :])
            except ValueError as exc:
                raise ValueError(f"bad scan frame name {path.name}") from exc
            self.frames[bdeg % 360] = path
        if len(self.frames) < 8:
            raise FileNotFoundError(f"{directory}: need scan_bDDD frames, found {len(self.frames)}")
        self.direct = None
        for ext in ("pgm", "png"):
            cand = directory / f"direct.{ext}"
            if cand.exists():
                self.direct = cand
                break

    @property
    def beta_grid(self) -> np.ndarray:
        return np.array(sorted(rad(b) for b in self.frames), dtype=float)

    def __call__(self, beta, n_eta: int = 360) -> ImageReading:
        if beta is None:
            if self.direct is None:
                raise FileNotFoundError("no direct.pgm/.png frame for the pole gate")
            path = self.direct
        else:
            bdeg = int(round(deg(wrap(float(beta), TWO_PI)))) % 360
            path = self.frames.get(bdeg) or self.frames[
                min(self.frames, key=lambda b: min(abs(b - bdeg), 360 - abs(b - bdeg)))
            ]
        return mode_orientation(read_image(path), n_eta=n_eta, low_v_threshold=0.0)


def image_readings(
    state: PoincareState,
    grid: GridSpec,
    rng=None,
    sigma_rel: float = 0.0,
    alpha_sigma: float = 0.0,
) -> list[Measurement]:
    """The standard three measurements from rendered images, with optional
    intensity noise (on pixels) and reading noise (on extracted alpha)."""
    out = []
    for beta in STANDARD_BETAS:
        img = abstract_image(state, beta, grid)
        if rng is not None and sigma_rel > 0:
            img = add_noise(img, rng, gaussian_sigma_rel=sigma_rel)
        reading = mode_orientation(img, n_eta=360, low_v_threshold=0.0)
        alpha = reading.alpha
        if rng is not None and alpha_sigma > 0:
            alpha += rng.normal(0.0, alpha_sigma)
        out.append(Measurement(beta=beta, alpha=wrap(alpha, np.pi), visibility=reading.visibility))
    return out


def physical_readings(
    state: PoincareState, grid: GridSpec, lens: LensSpec, calibration: CalibrationResult
) -> list[Measurement]:
    provider = physical_provider(state, grid, lens, calibration)
    out = []
    for beta in STANDARD_BETAS:
        reading = provider(beta, n_eta=360)
        out.append(Measurement(beta=beta, alpha=reading.alpha, visibility=reading.visibility))
    return out


def perturb_readings(measurements, rng, alpha_sigma: float) -> list[Measurement]:
    """Reading-noise model: jitter each alpha, keep visibilities."""
    return [
        Measurement(
            beta=m.beta,
            alpha=wrap(m.alpha + rng.normal(0.0, alpha_sigma), np.pi),
            visibility=m.visibility,
        )
        for m in measurements
    ]


def _rng_for(base_seed: int, state_idx: int, sample_idx: int):
    return np.random.default_rng(np.random.SeedSequence((base_seed, state_idx, sample_idx)))


def eq7_alpha(state: PoincareState) -> float:
    """Predicted lobe axis at the matched converter angle: (phi - theta)/2 + 45 deg."""
    return wrap((state.phi - state.theta) / 2.0 + np.pi / 4, np.pi)


def method1_row(name: str, target: PoincareState, result: Method1Result) -> dict:
    est = result.state
    d_phi = None
    if not (target.degenerate_phi or est.degenerate_phi):
        d_phi = deg(ang_dist(est.phi, target.phi, TWO_PI))
    return {
        "point": name,
        "theta_t_deg": target.theta_deg,
        "phi_t_deg": target.phi_deg,
        "beta_mc_deg": result.reading.beta_mc_deg,
        "alpha_hg_deg": result.reading.alpha_hg_deg,
        "alpha_eq7_deg": deg(eq7_alpha(target)),
        "theta_e_deg": est.theta_deg,
        "d_theta_deg": abs(est.theta_deg - target.theta_deg),
        "phi_e_deg": est.phi_deg,
        "d_phi_deg": d_phi,
        "pole": result.pole,
    }


def run_method1_set(
    sample, config: RunConfig, rng=None, sigma_rel: float = 0.0
) -> list[dict]:
    """Method I over a named state set via the abstract image pipeline."""
    beta_grid = default_beta_grid(config.beta_step)
    rows = []
    for name, state in sample:
        provider = abstract_provider(state, config.grid, rng=rng, sigma_rel=sigma_rel)
        rows.append(method1_row(name, state, method1_scan(provider, beta_grid)))
    return rows


def run_method1_noisy(
    sample,
    config: RunConfig,
    sigma_rel: float,
    seeds: int,
) -> dict:
    """Noise ensemble for the converter scan: empirical wrap-aware spreads of
    the recovered angles over per-seed intensity-noise realizations."""
    beta_grid = default_beta_grid(config.beta_step)
    theta_errs, phi_errs = [], []
    for state_idx, (name, state) in enumerate(sample):
        cache = ScanImageCache(state, config.grid, beta_grid)
        for sample_idx in range(seeds):
            rng = _rng_for(config.seed, state_idx, sample_idx)
            result = method1_scan(cache.provider_for(rng, sigma_rel), beta_grid)
            theta_errs.append(ang_dist(result.state.theta, state.theta, TWO_PI))
            if not (state.degenerate_phi or result.state.degenerate_phi):
                phi_errs.append(ang_dist(result.state.phi, state.phi, TWO_PI))
    theta_errs = np.array(theta_errs)
    phi_errs = np.array(phi_errs)
    return {
        "sigma_rel": sigma_rel,
        "seeds": seeds,
        "delta_theta_deg": float(deg(np.sqrt(np.mean(theta_errs**2)))),
        "delta_phi_deg": float(deg(np.sqrt(np.mean(phi_errs**2)))) if phi_errs.size else None,
        "samples": int(theta_errs.size),
    }


def run_table1(config: RunConfig, readings_fn=None) -> tuple[list[dict], dict]:
    """Noiseless Method II over the 26-state sample; readings_fn overrides
    the abstract image pipeline (e.g. exact_readings or a physical path)."""
    if readings_fn is None:
        readings_fn = lambda state: image_readings(state, config.grid)
    rows = []
    estimates = []
    for name, state in TABLE1_STATES:
        est = estimate_state(
            readings_fn(state), target=state, membership_tol=config.membership_tol_noiseless
        )
        estimates.append((state, est))
        rows.append(table_row(name, state, est))
    return rows, summarize_table(estimates)


def run_table1_noisy(config: RunConfig, alpha_sigma: float, seeds: int) -> dict:
    """Reading-noise ensemble over the 26 states: per-seed alpha jitter on
    noiseless extracted readings, noisy membership tolerance."""
    base = [
        (state, image_readings(state, config.grid)) for _, state in TABLE1_STATES
    ]
    estimates = []
    for state_idx, (state, readings) in enumerate(base):
        for sample_idx in range(seeds):
            rng = _rng_for(config.seed, state_idx, sample_idx)
            noisy = perturb_readings(readings, rng, alpha_sigma)
            est = estimate_state(noisy, target=state, membership_tol=config.membership_tol_noisy)
            estimates.append((state, est))
    summary = summarize_table(estimates)
    summary.update({"alpha_sigma_deg": float(deg(alpha_sigma)), "seeds": seeds})
    return summary


def summarize_table(estimates: list[tuple[PoincareState, TriangleEstimate]]) -> dict:
    """Ensemble aggregates; phi errors skip rows where either the target or
    the estimate sits at a pole (phi undefined there)."""
    fids = np.array([e.fidelity_vs_target for _, e in estimates], dtype=float)
    theta_err = np.array(
        [abs(e.state.theta - s.theta) for s, e in estimates], dtype=float
    )
    phi_err = np.array(
        [
            ang_dist(e.state.phi, s.phi, TWO_PI)
            for s, e in estimates
            if not (s.degenerate_phi or e.state.degenerate_phi)
        ],
        dtype=float,
    )
    dist = np.array(
        [spherical_distance(e.state, s) for s, e in estimates], dtype=float
    )
    branches = sorted({e.branch for _, e in estimates})
    return {
        "samples": len(estimates),
        "mean_fidelity": float(fids.mean()),
        "sd_fidelity": float(fids.std(ddof=1)) if fids.size > 1 else 0.0,
        "min_fidelity": float(fids.min()),
        "mean_d_theta_deg": float(deg(theta_err.mean())),
        "mean_d_phi_deg": float(deg(phi_err.mean())) if phi_err.size else None,
        "max_distance_deg": float(deg(dist.max())),
        "branches": branches,
    }
