"""Tilted-lens converter: astigmatic phase mask, measurement plane, calibration.

A spherical lens of focal length f tilted by angle xi about one axis acts as
an astigmatic lens with focal lengths f*cos(xi) and f/cos(xi) along its two
principal axes. Near one plane behind it, the accumulated Gouy-phase
difference between the principal axes reaches a quarter turn while the beam
widths match, and the lens acts as a pi/2 mode converter there. Rotating the
lens about the beam sets the converter angle: a converter angle beta needs
the strong principal axis at beta/2 + 90 degrees in the transverse plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import mode_orientation
from .angles import deg, rad
from .fields import ComplexField, GridSpec, IntensityImage, grid_coords, superpose
from .propagation import propagate
from .states import PoincareState

DEFAULT_FOCAL = 0.336
DEFAULT_TILT = rad(27.0)

# A converter plane with chord visibility below this cannot be trusted.
MIN_CONVERTER_VISIBILITY = 0.9


class CalibrationFailedError(RuntimeError):
    """No measurement plane with converter-grade contrast was found."""


@dataclass(frozen=True)
class LensSpec:
    """Tilted spherical lens: focal length (m) and tilt angle (radians)."""

    focal: float = DEFAULT_FOCAL
    tilt: float = DEFAULT_TILT

    def __post_init__(self):
        if not (np.isfinite(self.focal) and self.focal > 0):
            raise ValueError("focal length must be positive")
        if not (np.isfinite(self.tilt) and 0.0 <= self.tilt < np.pi / 2):
            raise ValueError("tilt must lie in [0, pi/2)")

    @property
    def tilt_deg(self) -> float:
        return deg(self.tilt)

    def to_json_dict(self) -> dict:
        return {"focal_m": self.focal, "tilt_deg": self.tilt_deg}

    @classmethod
    def from_json_dict(cls, d: dict) -> "LensSpec":
        return cls(focal=float(d["focal_m"]), tilt=rad(float(d["tilt_deg"])))


@dataclass(frozen=True)
class CalibrationResult:
    """Measurement plane for a grid/lens pair.

    offset: distance of the matched plane from the nominal focal plane (m).
    visibility: chord visibility of the converted probe mode there.
    alpha: recovered lobe axis of the probe (radians mod pi; ideal pi/4).
    """

    offset: float
    visibility: float
    alpha: float

    @property
    def alpha_deg(self) -> float:
        return deg(self.alpha)

    def to_json_dict(self) -> dict:
        return {
            "offset_m": self.offset,
            "visibility": self.visibility,
            "alpha_deg": self.alpha_deg,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CalibrationResult":
        return cls(
            offset=float(d["offset_m"]),
            visibility=float(d["visibility"]),
            alpha=rad(float(d["alpha_deg"])),
        )


def tilted_lens_mask(grid: GridSpec, lens: LensSpec, beta: float) -> np.ndarray:
    """Thin-element phase mask of the tilted lens set to converter angle beta.

    The strong axis (focal f*cos xi) sits at beta/2 + pi/2; the projection of
    the tilt shortens the focal length by cos xi along it and lengthens it by
    1/cos xi along the perpendicular axis.
    """
    X, Y = grid_coords(grid)
    half = (beta + np.pi) / 2.0
    xb = np.cos(half) * X + np.sin(half) * Y
    yb = -np.sin(half) * X + np.cos(half) * Y
    sec = 1.0 / np.cos(lens.tilt)
    profile = sec * xb**2 + np.cos(lens.tilt) * yb**2
    return np.exp(-1j * grid.k / (2.0 * lens.focal) * profile)


def apply_tilted_lens(field: ComplexField, lens: LensSpec, beta: float) -> ComplexField:
    return ComplexField(field.grid, field.values * tilted_lens_mask(field.grid, lens, beta))


def simulate_tilted_lens_measurement(
    state: PoincareState,
    beta: float,
    grid: GridSpec,
    lens: LensSpec,
    offset: float,
) -> IntensityImage:
    """Waist-plane state -> tilted lens at angle beta -> intensity at the
    calibrated measurement plane (focal + offset behind the lens)."""
    u = apply_tilted_lens(superpose(grid, state), lens, beta)
    out = propagate(u, lens.focal + offset)
    return IntensityImage(grid, out.values.real**2 + out.values.imag**2)


def _probe_image(grid: GridSpec, lens: LensSpec, distance: float) -> np.ndarray:
    """Pure ell=+1 probe through the lens at beta=0, intensity at distance."""
    probe = PoincareState(0.0, 0.0)
    u = apply_tilted_lens(superpose(grid, probe), lens, 0.0)
    out = propagate(u, distance)
    return out.values.real**2 + out.values.imag**2


def _moment_balance(grid: GridSpec, pixels: np.ndarray) -> float:
    """Normalized difference of the central second moments along x and y.

    The probe leaves the lens converging faster along one principal axis, so
    this signal crosses zero exactly where the two beam widths match - the
    converter plane - and does so monotonically across the focal region.
    """
    X, Y = grid_coords(grid)
    total = pixels.sum()
    mx = (pixels * X).sum() / total
    my = (pixels * Y).sum() / total
    sxx = (pixels * (X - mx) ** 2).sum() / total
    syy = (pixels * (Y - my) ** 2).sum() / total
    return (sxx - syy) / grid.waist**2


def calibrate_tilt(
    grid: GridSpec,
    lens: LensSpec,
    scan_half_width: float = 0.06,
    scan_step: float = 0.004,
    min_visibility: float = MIN_CONVERTER_VISIBILITY,
    n_eta: int = 90,
) -> CalibrationResult:
    """Locate the measurement plane behind the lens.

    A coarse scan of chord visibility around the focal plane finds the
    high-contrast region; the exact plane is the zero of the second-moment
    balance, found by bisection. Raises CalibrationFailedError when the best
    plane never reaches converter-grade visibility (e.g. tilt too small for
    a quarter-turn Gouy difference at this waist).
    """
    offsets = np.arange(-scan_half_width, scan_half_width + scan_step / 2, scan_step)
    vis = np.empty(offsets.size)
    for i, off in enumerate(offsets):
        img = _probe_image(grid, lens, lens.focal + off)
        vis[i] = mode_orientation(img, n_eta=n_eta, low_v_threshold=0.0).visibility
    best = int(np.argmax(vis))
    if vis[best] < min_visibility:
        raise CalibrationFailedError(
            f"best coarse visibility {vis[best]:.3f} below {min_visibility:.3f}"
        )

    lo = float(offsets[best]) - 2.0 * scan_step
    hi = float(offsets[best]) + 2.0 * scan_step
    b_lo = _moment_balance(grid, _probe_image(grid, lens, lens.focal + lo))
    b_hi = _moment_balance(grid, _probe_image(grid, lens, lens.focal + hi))
    widen = 0
    while b_lo * b_hi > 0 and widen < 4:
        lo -= scan_step
        hi += scan_step
        b_lo = _moment_balance(grid, _probe_image(grid, lens, lens.focal + lo))
        b_hi = _moment_balance(grid, _probe_image(grid, lens, lens.focal + hi))
        widen += 1
    if b_lo * b_hi > 0:
        raise CalibrationFailedError("moment balance does not change sign near the contrast peak")

    for _ in range(40):
        mid = 0.5 * (lo + hi)
        b_mid = _moment_balance(grid, _probe_image(grid, lens, lens.focal + mid))
        if (b_mid > 0) == (b_lo > 0):
            lo, b_lo = mid, b_mid
        else:
            hi, b_hi = mid, b_mid
        if hi - lo < 1e-5:
            break
    offset = 0.5 * (lo + hi)

    reading = mode_orientation(
        _probe_image(grid, lens, lens.focal + offset), n_eta=360, low_v_threshold=0.0
    )
    if reading.visibility < min_visibility:
        raise CalibrationFailedError(
            f"balanced-plane visibility {reading.visibility:.3f} below {min_visibility:.3f}"
        )
    return CalibrationResult(offset=offset, visibility=reading.visibility, alpha=reading.alpha)
