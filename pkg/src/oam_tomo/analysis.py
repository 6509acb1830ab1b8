"""Extract orientation and visibility from intensity images.

The pipeline runs on nothing but pixel values: background floor removal,
center of mass, chord sums at a fan of angles through the center, then the
nodal-line angle from the darkest chord and the lobe axis from the centroid
split of the two bright halves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .angles import deg, wrap
from .fields import IntensityImage

# Below this chord-sum visibility the image carries no usable nodal line.
LOW_VISIBILITY = 0.34

# Pixels closer than this to the nodal line are excluded from the lobe split.
NODAL_MARGIN_PX = 0.5


class EmptyImageError(ValueError):
    """Image has no positive signal to analyze."""


class LowVisibilityError(ValueError):
    """Chord-sum contrast too low to define a nodal orientation."""


@dataclass(frozen=True)
class LineScanCurve:
    """Chord sums through a fixed center at angles k*pi/n for k = 0..n-1."""

    etas: np.ndarray
    sums: np.ndarray

    def __post_init__(self):
        if self.etas.shape != self.sums.shape or self.etas.ndim != 1:
            raise ValueError("etas and sums must be matching 1-d arrays")
        if self.etas.size < 4:
            raise ValueError("need at least 4 scan angles")

    @property
    def visibility(self) -> float:
        hi = float(self.sums.max())
        lo = float(self.sums.min())
        if hi + lo <= 0:
            return 0.0
        return (hi - lo) / (hi + lo)

    @property
    def eta_min(self) -> float:
        """Angle of the darkest chord, refined by a parabola through the
        minimum and its two (periodically wrapped) neighbors."""
        n = self.sums.size
        i = int(np.argmin(self.sums))
        y1 = self.sums[(i - 1) % n]
        y2 = self.sums[i]
        y3 = self.sums[(i + 1) % n]
        denom = y1 - 2.0 * y2 + y3
        delta = 0.5 * (y1 - y3) / denom if denom > 1e-300 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        return wrap((i + delta) * np.pi / n, np.pi)


@dataclass(frozen=True)
class ImageReading:
    """Orientation measurement of a single two-lobe image.

    alpha is the lobe axis and eta_min the nodal-line angle, both mod pi;
    com is the intensity center of mass in pixel coordinates (x, y).
    """

    alpha: float
    visibility: float
    eta_min: float
    com: tuple[float, float]

    @property
    def alpha_deg(self) -> float:
        return deg(self.alpha)

    @property
    def eta_min_deg(self) -> float:
        return deg(self.eta_min)

    def to_json_dict(self) -> dict:
        return {
            "alpha_deg": self.alpha_deg,
            "visibility": self.visibility,
            "eta_min_deg": self.eta_min_deg,
            "com_px": [self.com[0], self.com[1]],
        }


def _pixels(img) -> np.ndarray:
    if isinstance(img, IntensityImage):
        return img.pixels
    return np.asarray(img, dtype=float)


def subtract_floor(pixels: np.ndarray, percentile: float = 1.0) -> np.ndarray:
    """Clip away the background pedestal estimated from a low percentile."""
    floor = float(np.percentile(pixels, percentile))
    if floor <= 0.0:
        return np.clip(pixels, 0.0, None)
    return np.clip(pixels - floor, 0.0, None)


def center_of_mass(img) -> tuple[float, float]:
    """Intensity centroid in pixel coordinates (x, y)."""
    pix = _pixels(img)
    total = pix.sum()
    if not np.isfinite(total) or total <= 0:
        raise EmptyImageError("image has no positive signal")
    h, w = pix.shape
    cx = float((pix.sum(axis=0) * np.arange(w)).sum() / total)
    cy = float((pix.sum(axis=1) * np.arange(h)).sum() / total)
    return cx, cy


def line_scan(img, n_eta: int = 180, center: tuple[float, float] | None = None) -> LineScanCurve:
    """Chord sums through the center of mass (or a given center)."""
    pix = _pixels(img)
    cx, cy = center_of_mass(pix) if center is None else center
    reach = _kernels._chord_reach(pix.shape, cx, cy)
    if reach < 2.0:
        raise EmptyImageError("center of mass too close to the image edge")
    sums = _kernels.line_sums(pix, cx, cy, int(n_eta))
    etas = np.arange(n_eta) * (np.pi / n_eta)
    return LineScanCurve(etas, sums)


def visibility(img, n_eta: int = 180) -> float:
    return line_scan(img, n_eta=n_eta).visibility


def nodal_orientation(img, n_eta: int = 360) -> float:
    """Nodal-line angle mod pi from the darkest chord."""
    return line_scan(img, n_eta=n_eta).eta_min


def mode_orientation(
    img,
    n_eta: int = 360,
    low_v_threshold: float = LOW_VISIBILITY,
    floor_percentile: float = 1.0,
) -> ImageReading:
    """Full orientation readout of a two-lobe image.

    Raises LowVisibilityError when the chord-sum visibility falls below
    low_v_threshold (pass 0.0 to always get a reading; alpha is then the
    best available guess, not a trustworthy angle).
    """
    pix = subtract_floor(_pixels(img), floor_percentile)
    cx, cy = center_of_mass(pix)
    curve = line_scan(pix, n_eta=n_eta, center=(cx, cy))
    vis = curve.visibility
    eta = curve.eta_min
    if vis < low_v_threshold:
        raise LowVisibilityError(f"visibility {vis:.3f} below {low_v_threshold:.3f}")

    # Lobe axis is perpendicular to the nodal line; the centroid split uses
    # all pixels and beats the chord-grid resolution.
    axis = eta + np.pi / 2.0
    c1x, c1y, m1, c2x, c2y, m2 = _kernels.side_centroids(
        pix, cx, cy, np.cos(axis), np.sin(axis), NODAL_MARGIN_PX
    )
    if m1 > 0 and m2 > 0:
        alpha = wrap(np.arctan2(c1y - c2y, c1x - c2x), np.pi)
    else:
        alpha = wrap(axis, np.pi)
    return ImageReading(alpha=alpha, visibility=vis, eta_min=eta, com=(cx, cy))
