"""Shared fixtures for the test suite."""

import math

import numpy as np
import pytest

from oam_tomo.fields import default_grid


def rotate_bilinear(pixels, delta):
    """Bilinear rotation about the array center by delta radians (ccw)."""
    n = pixels.shape[0]
    c = (n - 1) / 2.0
    jj, ii = np.meshgrid(np.arange(n), np.arange(n))
    x = jj - c
    y = ii - c
    xs = math.cos(delta) * x + math.sin(delta) * y + c
    ys = -math.sin(delta) * x + math.cos(delta) * y + c
    x0 = np.clip(np.floor(xs).astype(int), 0, n - 2)
    y0 = np.clip(np.floor(ys).astype(int), 0, n - 2)
    fx = np.clip(xs - x0, 0.0, 1.0)
    fy = np.clip(ys - y0, 0.0, 1.0)
    p = pixels
    out = (
        p[y0, x0] * (1 - fx) * (1 - fy)
        + p[y0, x0 + 1] * fx * (1 - fy)
        + p[y0 + 1, x0] * (1 - fx) * fy
        + p[y0 + 1, x0 + 1] * fx * fy
    )
    inside = (xs >= 0) & (xs <= n - 1) & (ys >= 0) & (ys <= n - 1)
    return np.where(inside, out, 0.0)


@pytest.fixture(scope="session")
def grid128():
    # cheap rendering grid for abstract-pipeline tests
    return default_grid(n=128)


@pytest.fixture(scope="session")
def grid256():
    # full-resolution grid; required by the tilted-lens pipeline
    return default_grid(n=256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
