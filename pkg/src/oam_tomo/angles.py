"""Angle bookkeeping. File formats and CLI speak degrees; everything internal is radians."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(angle, period: float = TWO_PI):
    """Wrap an angle (scalar or array) into [0, period)."""
    return np.mod(angle, period)


def ang_dist(a, b, period: float = TWO_PI):
    """Shortest wrap-aware separation between two angles."""
    d = np.abs(np.mod(a - b, period))
    return np.minimum(d, period - d)


def deg(x):
    return np.rad2deg(x)


def rad(x):
    return np.deg2rad(x)
