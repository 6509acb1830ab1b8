"""Hot inner loops: chord sampling, fused renders, half-plane centroids.

Each kernel ships in two interchangeable implementations: a numba-compiled
one and a vectorized numpy one. Set OAM_TOMO_DISABLE_NUMBA=1 (or uninstall
numba) to force the numpy path; benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_disable = os.environ.get("OAM_TOMO_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

if not _disable:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False
else:
    HAS_NUMBA = False


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


# Chords are sampled every half pixel; both implementations must keep the
# same t-grid so their sums agree to rounding error.
LINE_STEP = 0.5


def _chord_reach(shape, cx: float, cy: float) -> float:
    h, w = shape
    return min(cx, cy, (w - 1) - cx, (h - 1) - cy)


def line_sums_numpy(img: np.ndarray, cx: float, cy: float, n_eta: int) -> np.ndarray:
    """Bilinear chord sums through (cx, cy) at angles k*pi/n_eta, k = 0..n_eta-1."""
    reach = _chord_reach(img.shape, cx, cy)
    half = int(reach / LINE_STEP)
    ts = (np.arange(2 * half + 1) - half) * LINE_STEP
    etas = np.arange(n_eta) * (np.pi / n_eta)
    px = cx + np.cos(etas)[:, None] * ts[None, :]
    py = cy + np.sin(etas)[:, None] * ts[None, :]
    h, w = img.shape
    x0 = np.clip(px.astype(np.int64), 0, w - 2)
    y0 = np.clip(py.astype(np.int64), 0, h - 2)
    fx = px - x0
    fy = py - y0
    vals = (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x0 + 1] * fx * (1 - fy)
        + img[y0 + 1, x0] * (1 - fx) * fy
        + img[y0 + 1, x0 + 1] * fx * fy
    )
    return vals.sum(axis=1)


def render_intensity_numpy(
    lg_plus: np.ndarray, lg_minus: np.ndarray, c_plus: complex, c_minus: complex
) -> np.ndarray:
    """|c_plus * LG+ + c_minus * LG-|^2 without intermediate field storage."""
    field = c_plus * lg_plus + c_minus * lg_minus
    return field.real**2 + field.imag**2


def side_centroids_numpy(
    img: np.ndarray, cx: float, cy: float, nx: float, ny: float, margin: float = 0.5
):
    """Centroids and masses of the two half planes split by the line through
    (cx, cy) with normal (nx, ny); pixels within `margin` of the line are
    excluded so the dark ridge cannot bias either side."""
    h, w = img.shape
    xs = np.arange(w, dtype=float)
    ys = np.arange(h, dtype=float)
    s = (xs[None, :] - cx) * nx + (ys[:, None] - cy) * ny
    out = []
    for mask in (s > margin, s < -margin):
        m = img * mask
        tot = m.sum()
        if tot > 0:
            out.extend([(m * xs[None, :]).sum() / tot, (m * ys[:, None]).sum() / tot, tot])
        else:
            out.extend([np.nan, np.nan, 0.0])
    return tuple(out)


if HAS_NUMBA:

    @njit(cache=True, fastmath=True)
    def _line_sums_nb(img, cx, cy, n_eta):  # pragma: no cover - measured via dispatch
        h, w = img.shape
        reach = min(min(cx, cy), min((w - 1) - cx, (h - 1) - cy))
        half = int(reach / LINE_STEP)
        sums = np.zeros(n_eta)
        for k in range(n_eta):
            eta = k * (np.pi / n_eta)
            dx = np.cos(eta) * LINE_STEP
            dy = np.sin(eta) * LINE_STEP
            acc = 0.0
            for i in range(-half, half + 1):
                x = cx + i * dx
                y = cy + i * dy
                x0 = int(x)
                y0 = int(y)
                if x0 > w - 2:
                    x0 = w - 2
                if y0 > h - 2:
                    y0 = h - 2
                if x0 < 0:
                    x0 = 0
                if y0 < 0:
                    y0 = 0
                fx = x - x0
                fy = y - y0
                acc += (
                    img[y0, x0] * (1 - fx) * (1 - fy)
                    + img[y0, x0 + 1] * fx * (1 - fy)
                    + img[y0 + 1, x0] * (1 - fx) * fy
                    + img[y0 + 1, x0 + 1] * fx * fy
                )
            sums[k] = acc
        return sums

    @njit(cache=True)
    def _render_intensity_nb(lg_plus, lg_minus, c_plus, c_minus):  # pragma: no cover
        h, w = lg_plus.shape
        out = np.empty((h, w))
        for i in range(h):
            for j in range(w):
                v = c_plus * lg_plus[i, j] + c_minus * lg_minus[i, j]
                out[i, j] = v.real * v.real + v.imag * v.imag
        return out

    @njit(cache=True)
    def _side_centroids_nb(img, cx, cy, nx, ny, margin):  # pragma: no cover
        h, w = img.shape
        sx1 = sy1 = m1 = 0.0
        sx2 = sy2 = m2 = 0.0
        for i in range(h):
            for j in range(w):
                s = (j - cx) * nx + (i - cy) * ny
                v = img[i, j]
                if s > margin:
                    sx1 += v * j
                    sy1 += v * i
                    m1 += v
                elif s < -margin:
                    sx2 += v * j
                    sy2 += v * i
                    m2 += v
        c1x = sx1 / m1 if m1 > 0 else np.nan
        c1y = sy1 / m1 if m1 > 0 else np.nan
        c2x = sx2 / m2 if m2 > 0 else np.nan
        c2y = sy2 / m2 if m2 > 0 else np.nan
        return c1x, c1y, m1, c2x, c2y, m2

    def line_sums(img, cx, cy, n_eta):
        return _line_sums_nb(img, float(cx), float(cy), int(n_eta))

    def render_intensity(lg_plus, lg_minus, c_plus, c_minus):
        return _render_intensity_nb(lg_plus, lg_minus, complex(c_plus), complex(c_minus))

    def side_centroids(img, cx, cy, nx, ny, margin=0.5):
        return _side_centroids_nb(
            img, float(cx), float(cy), float(nx), float(ny), float(margin)
        )

else:
    line_sums = line_sums_numpy
    render_intensity = render_intensity_numpy
    side_centroids = side_centroids_numpy
