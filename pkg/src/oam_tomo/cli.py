"""Command-line interface.

Commands: render, calibrate, method1, method2, reproduce. Angles cross this
boundary in degrees; outputs are deterministic for a fixed (config, seed).
Exit codes: 0 success, 2 usage/config error, 3 analysis failure
(too many blind readings, failed calibration).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import mode_orientation
from .angles import deg, rad
from .config import ConfigError, RunConfig, load_config, override
from .fields import add_noise, render_state
from .harness import (
    SAMPLE_AE,
    SAMPLE_D,
    DirectoryScanProvider,
    abstract_provider,
    image_readings,
    physical_provider,
    physical_readings,
    run_method1_noisy,
    run_method1_set,
    run_table1,
    run_table1_noisy,
    transformed_state,
)
from .imageio import (
    find_triplet,
    read_image,
    round_floats,
    triplet_paths,
    write_json,
    write_pgm,
    write_png,
    write_rows_csv,
    write_rows_json,
)
from .lens import CalibrationFailedError, CalibrationResult, calibrate_tilt
from .states import PoincareState
from .tomography import (
    Measurement,
    TooManyBlindError,
    default_beta_grid,
    estimate_state,
    method1_scan,
    table_row,
)

# Reference noise levels for `reproduce` when the config leaves noise at 0:
# relative intensity noise for the scan figures, reading noise for the table.
REPRODUCE_SIGMA_REL = 0.05
REPRODUCE_ALPHA_SIGMA = rad(2.0)


def _state_from_args(args) -> PoincareState:
    if args.theta_deg is None or args.phi_deg is None:
        raise ConfigError("--theta-deg and --phi-deg are required without --images")
    if not 0.0 <= args.theta_deg <= 180.0:
        raise ConfigError(f"--theta-deg must lie in [0, 180], got {args.theta_deg:g}")
    return PoincareState.from_degrees(args.theta_deg, args.phi_deg)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _calibration_path(cfg: RunConfig) -> Path:
    return _out_dir(cfg) / "calibration.json"


def _run_calibration(cfg: RunConfig) -> CalibrationResult:
    result = calibrate_tilt(cfg.grid, cfg.lens)
    record = {
        "grid": cfg.grid.to_json_dict(),
        "lens": cfg.lens.to_json_dict(),
        **result.to_json_dict(),
    }
    write_json(_calibration_path(cfg), record)
    return result


def _load_or_calibrate(cfg: RunConfig) -> CalibrationResult:
    """Reuse a persisted calibration when it matches the grid and lens."""
    path = _calibration_path(cfg)
    if path.exists():
        from .imageio import read_json

        record = read_json(path)
        if (
            record.get("grid") == cfg.grid.to_json_dict()
            and record.get("lens") == cfg.lens.to_json_dict()
        ):
            return CalibrationResult.from_json_dict(record)
    return _run_calibration(cfg)


def cmd_render(args, cfg: RunConfig) -> int:
    state = _state_from_args(args)
    out = _out_dir(cfg)
    rng = np.random.default_rng(cfg.seed) if cfg.noise_sigma_rel > 0 else None

    def prepared(beta):
        img = render_state(cfg.grid, transformed_state(state, beta))
        if rng is not None:
            img = add_noise(img, rng, gaussian_sigma_rel=cfg.noise_sigma_rel)
        return img

    paths = triplet_paths(out, stem="state")
    direct = prepared(None)
    write_pgm(paths["direct"], direct)
    write_png(paths["direct"].with_suffix(".png"), direct)
    written = [paths["direct"], paths["direct"].with_suffix(".png")]
    if args.triplet:
        for suffix, beta in (("mc00", 0.0), ("mc45", np.pi / 2)):
            write_pgm(paths[suffix], prepared(beta))
            written.append(paths[suffix])
    write_json(out / "state.json", state.to_json_dict())
    for p in written:
        print(p)
    return 0


def cmd_calibrate(args, cfg: RunConfig) -> int:
    result = _run_calibration(cfg)
    print(
        f"calibrated: offset {result.offset * 1e3:+.3f} mm, "
        f"visibility {result.visibility:.3f}, alpha {result.alpha_deg:.2f} deg"
    )
    print(_calibration_path(cfg))
    return 0


def _method1_provider_and_grid(args, cfg: RunConfig):
    if args.images:
        provider = DirectoryScanProvider(args.images)
        return provider, provider.beta_grid, None
    state = _state_from_args(args)
    if cfg.pipeline == "physical":
        provider = physical_provider(state, cfg.grid, cfg.lens, _load_or_calibrate(cfg))
    else:
        rng = np.random.default_rng(cfg.seed) if cfg.noise_sigma_rel > 0 else None
        provider = abstract_provider(state, cfg.grid, rng=rng, sigma_rel=cfg.noise_sigma_rel)
    return provider, default_beta_grid(cfg.beta_step), state


def cmd_method1(args, cfg: RunConfig) -> int:
    provider, beta_grid, state = _method1_provider_and_grid(args, cfg)
    result = method1_scan(provider, beta_grid)
    out = _out_dir(cfg)
    payload = {
        **result.reading.to_json_dict(),
        "theta_deg": result.state.theta_deg,
        "phi_deg": result.state.phi_deg,
        "degenerate_phi": result.state.degenerate_phi,
        "pole": result.pole,
        "beta_raw_deg": deg(result.raw_beta),
    }
    if state is not None:
        payload["target"] = state.to_json_dict()
    write_json(out / "method1.json", round_floats(payload))
    write_rows_csv(
        out / "method1_scan.csv",
        [
            {"beta_deg": deg(b), "visibility": float(v)}
            for b, v in zip(result.beta_grid, result.visibilities)
        ],
    )
    print(out / "method1.json")
    return 0


def _method2_measurements(args, cfg: RunConfig):
    if args.images:
        found = find_triplet(args.images)
        betas = {"direct": None, "mc00": 0.0, "mc45": np.pi / 2}
        out = []
        for suffix, path in found.items():
            reading = mode_orientation(read_image(path), low_v_threshold=0.0)
            out.append(
                Measurement(
                    beta=betas[suffix], alpha=reading.alpha, visibility=reading.visibility
                )
            )
        return out, None
    state = _state_from_args(args)
    if cfg.pipeline == "physical":
        return physical_readings(state, cfg.grid, cfg.lens, _load_or_calibrate(cfg)), state
    rng = np.random.default_rng(cfg.seed) if cfg.noisy else None
    return (
        image_readings(
            state,
            cfg.grid,
            rng=rng,
            sigma_rel=cfg.noise_sigma_rel,
            alpha_sigma=cfg.alpha_sigma,
        ),
        state,
    )


def cmd_method2(args, cfg: RunConfig) -> int:
    measurements, state = _method2_measurements(args, cfg)
    estimate = estimate_state(measurements, target=state, membership_tol=cfg.membership_tol)
    out = _out_dir(cfg)
    if state is not None:
        row = table_row("-", state, estimate)
    else:
        row = {"point": "-", **estimate.to_json_dict()}
    write_json(out / "method2.json", round_floats(row))
    write_rows_csv(out / "method2.csv", [row])
    print(out / "method2.json")
    return 0


def cmd_reproduce(args, cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    target = args.target
    if target in ("fig5", "fig6"):
        sample = SAMPLE_AE if target == "fig5" else SAMPLE_D
        rows = run_method1_set(sample, cfg)
        write_rows_csv(out / f"{target}_points.csv", rows)
        line_dev = max(
            abs(r["alpha_hg_deg"] - r["alpha_eq7_deg"]) % 180.0 for r in rows
        )
        line_dev = min(line_dev, 180.0 - line_dev)
        sigma = cfg.noise_sigma_rel if cfg.noise_sigma_rel > 0 else REPRODUCE_SIGMA_REL
        noisy = run_method1_noisy(sample, cfg, sigma_rel=sigma, seeds=cfg.seeds)
        summary = {
            "target": target,
            "max_line_deviation_deg": line_dev,
            "noisy": noisy,
        }
        write_json(out / f"{target}_summary.json", round_floats(summary))
    else:
        rows, summary = run_table1(cfg)
        write_rows_csv(out / "table1_points.csv", rows)
        write_rows_json(out / "table1_points.json", rows)
        sigma = cfg.alpha_sigma if cfg.alpha_sigma > 0 else REPRODUCE_ALPHA_SIGMA
        noisy = run_table1_noisy(cfg, alpha_sigma=sigma, seeds=cfg.seeds)
        write_json(
            out / "table1_summary.json",
            round_floats({"target": target, "noiseless": summary, "noisy": noisy}),
        )
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oam-tomo",
        description="Simulate and reconstruct first-order OAM superpositions "
        "from intensity images.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, images_help=None):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default: config out_dir)")
        p.add_argument("--seed", type=int, help="random seed override")
        p.add_argument(
            "--noise-sigma",
            type=float,
            help="relative intensity noise on rendered images",
        )
        p.add_argument(
            "--pipeline", choices=("abstract", "physical"), help="measurement pipeline"
        )
        if images_help is not None:
            p.add_argument("--images", help=images_help)
            p.add_argument("--theta-deg", type=float, help="target polar angle")
            p.add_argument("--phi-deg", type=float, help="target azimuthal angle")

    p = sub.add_parser("render", help="write intensity images of a prepared state")
    common(p)
    p.add_argument("--theta-deg", type=float, required=True)
    p.add_argument("--phi-deg", type=float, required=True)
    p.add_argument(
        "--triplet",
        action="store_true",
        help="also write the converter images (state_mc00/state_mc45)",
    )
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("calibrate", help="locate the tilted-lens measurement plane")
    common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("method1", help="converter-scan reconstruction")
    common(p, images_help="directory of captured scan_bDDD.pgm frames")
    p.set_defaults(func=cmd_method1)

    p = sub.add_parser("method2", help="three-image reconstruction")
    common(p, images_help="directory holding a *_direct/*_mc00/*_mc45 triplet")
    p.set_defaults(func=cmd_method2)

    p = sub.add_parser("reproduce", help="run a full published sample set")
    common(p)
    p.add_argument("target", choices=("fig5", "fig6", "table1"))
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = override(
            cfg,
            pipeline=args.pipeline,
            noise_sigma_rel=args.noise_sigma,
            seed=args.seed,
            out_dir=args.out,
        )
        return args.func(args, cfg)
    except (TooManyBlindError, CalibrationFailedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
