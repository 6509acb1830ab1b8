"""State reconstruction from intensity readings.

Method I rotates the converter until the transformed image reaches maximal
two-lobe contrast, then inverts (beta, alpha) to a state. Method II takes
three images (direct, converter at 0 and at 90 degrees); each orientation
reading confines the state to half of a great circle on the sphere, and the
three pairwise intersections span a triangle whose center (or degenerate
limit) is the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angles import TWO_PI, ang_dist, deg, rad, wrap
from .converter import (
    Method1Reading,
    PoleDegenerateError,
    method1_invert,
    method1_predict,
)
from .states import PoincareState, bloch_to_state, fidelity, state_to_bloch

# Chord visibility at or below this carries no orientation information.
BLIND_VISIBILITY = 0.34

# Longitude membership tolerances for half-arc tests (radians).
NOISELESS_TOL = 1e-6
NOISY_TOL = rad(2.0)

# A triangle side shorter than this is a numerically coincident point, not a
# genuinely narrow triangle; below it the branch choice must not depend on
# floating-point jitter.
POINT_GUARD = 1e-6

# Visibility spread below which a converter scan is angle-independent.
POLE_SPREAD = 0.02

_Z = np.array([0.0, 0.0, 1.0])


class TooManyBlindError(ValueError):
    """Two or more of the three readings fall in blind caps: corrupt input."""


class DegenerateOverlapError(ValueError):
    """The two half-arcs share a segment instead of a point."""


class NoIntersectionError(ValueError):
    """Neither antipodal plane-crossing point lies on both half-arcs."""


def visibility_threshold_cap(threshold: float = BLIND_VISIBILITY) -> tuple[float, float]:
    """Half-angle and solid angle of one blind polar cap under v = sin(theta)."""
    theta_cap = float(np.arcsin(threshold))
    return theta_cap, float(TWO_PI * (1.0 - np.cos(theta_cap)))


@dataclass(frozen=True)
class Measurement:
    """One orientation reading: beta is the converter angle, None for the
    direct image taken without the converter."""

    beta: float | None
    alpha: float
    visibility: float

    def __post_init__(self):
        if self.beta is not None and not np.isfinite(self.beta):
            raise ValueError("beta must be finite or None")
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not (0.0 <= self.visibility <= 1.0 + 1e-9):
            raise ValueError("visibility must lie in [0, 1]")
        object.__setattr__(self, "alpha", float(wrap(self.alpha, np.pi)))

    @property
    def blind(self) -> bool:
        return self.visibility <= BLIND_VISIBILITY


def _rotate_many(n: np.ndarray, beta: float | None) -> np.ndarray:
    """bloch_rotate applied to an (..., 3) stack; identity for beta None."""
    n = np.asarray(n, dtype=float)
    if beta is None:
        return n
    u = np.array([np.cos(beta), np.sin(beta), 0.0])
    return (n @ u)[..., None] * u - np.cross(np.broadcast_to(u, n.shape), n)


def _unrotate_many(n: np.ndarray, beta: float | None) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if beta is None:
        return n
    u = np.array([np.cos(beta), np.sin(beta), 0.0])
    return (n @ u)[..., None] * u + np.cross(np.broadcast_to(u, n.shape), n)


@dataclass(frozen=True)
class HalfGreatCircle:
    """States whose image under the measurement's sphere rotation has a fixed
    longitude: half of a great circle, bounded by the preimages of the poles.

    beta is the measurement's converter angle (None = direct, identity
    rotation); longitude = 2 alpha in [0, 2 pi).
    """

    beta: float | None
    longitude: float

    def __post_init__(self):
        object.__setattr__(self, "longitude", float(wrap(self.longitude, TWO_PI)))

    @property
    def endpoints(self) -> np.ndarray:
        """Preimages of the north and south poles, shape (2, 3)."""
        return _unrotate_many(np.array([_Z, -_Z]), self.beta)

    @property
    def plane_normal(self) -> np.ndarray:
        zeta = self.longitude
        return _unrotate_many(np.array([-np.sin(zeta), np.cos(zeta), 0.0]), self.beta)

    def contains_many(self, points: np.ndarray, tol: float) -> np.ndarray:
        """Membership mask: rotated longitude within tol of the locus
        longitude; points rotating to within 1e-9 of a pole are excluded
        because their longitude is undefined."""
        p = _rotate_many(np.atleast_2d(points), self.beta)
        on_pole = 1.0 - np.abs(p[..., 2]) < 1e-9
        lon = np.arctan2(p[..., 1], p[..., 0])
        return ~on_pole & (ang_dist(lon, self.longitude, TWO_PI) < tol)

    def contains(self, point: np.ndarray, tol: float) -> bool:
        return bool(self.contains_many(point, tol)[0])

    def points(self, step: float = rad(0.25)) -> np.ndarray:
        """Sample the open arc from pole preimage to pole preimage."""
        count = max(int(np.pi / step), 8)
        psi = np.linspace(0.0, np.pi, count + 2)[1:-1]
        zeta = self.longitude
        arc = np.stack(
            [np.sin(psi) * np.cos(zeta), np.sin(psi) * np.sin(zeta), np.cos(psi)], axis=-1
        )
        return _unrotate_many(arc, self.beta)


def measurement_locus(meas: Measurement) -> HalfGreatCircle:
    return HalfGreatCircle(beta=meas.beta, longitude=2.0 * meas.alpha)


def intersect_loci(a: HalfGreatCircle, b: HalfGreatCircle, tol: float = NOISELESS_TOL) -> np.ndarray:
    """The single point on both half-arcs, from the cross product of the two
    great-circle planes."""
    cross = np.cross(a.plane_normal, b.plane_normal)
    norm = np.linalg.norm(cross)
    if norm < 1e-9:
        raise DegenerateOverlapError("loci lie on the same great circle")
    candidates = np.array([cross / norm, -cross / norm])
    ok = a.contains_many(candidates, tol) & b.contains_many(candidates, tol)
    hits = int(ok.sum())
    if hits == 1:
        return candidates[int(np.argmax(ok))]
    if hits == 2:
        raise DegenerateOverlapError("both antipodal candidates satisfy membership")
    raise NoIntersectionError("no plane-crossing point lies on both half-arcs")


def _overlap_midpoint(a: HalfGreatCircle, b: HalfGreatCircle, tol: float) -> np.ndarray | None:
    """Midpoint of the shared sub-arc of two overlapping loci, or None."""
    pts = a.points(step=rad(0.1))
    mask = b.contains_many(pts, max(tol, rad(0.1)))
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    mid = pts[(idx[0] + idx[-1]) // 2]
    return mid / np.linalg.norm(mid)


def _closest_approach(a: HalfGreatCircle, b: HalfGreatCircle) -> np.ndarray:
    """Midpoint of the shortest geodesic between the two arcs."""
    pa = a.points(step=rad(0.25))
    pb = b.points(step=rad(0.25))
    dots = pa @ pb.T
    i, j = np.unravel_index(int(np.argmax(dots)), dots.shape)
    mid = pa[i] + pb[j]
    norm = np.linalg.norm(mid)
    if norm < 1e-9:  # antipodal arcs; any midpoint is equally (in)valid
        return pa[i]
    return mid / norm


def _vertex(a: HalfGreatCircle, b: HalfGreatCircle, tol: float) -> tuple[np.ndarray, bool]:
    """Intersection point with the degenerate-overlap and closest-approach
    fallbacks; the flag marks a closest-approach (inconsistent-readings) fix."""
    try:
        return intersect_loci(a, b, tol), False
    except DegenerateOverlapError:
        mid = _overlap_midpoint(a, b, tol)
        if mid is not None:
            return mid, False
        return _closest_approach(a, b), True
    except NoIntersectionError:
        return _closest_approach(a, b), True


@dataclass(frozen=True)
class TriangleEstimate:
    """Method II result: the estimate, the triangle it came from, and errors
    read off the vertex spread (wrap-aware for phi; None when phi is
    degenerate at a pole)."""

    state: PoincareState
    branch: str
    vertices: np.ndarray
    err_theta: float
    err_phi: float | None
    flagged: bool = False
    fidelity_vs_target: float | None = None
    err_fidelity: float | None = None

    def to_json_dict(self) -> dict:
        d = {
            "theta_e_deg": self.state.theta_deg,
            "phi_e_deg": self.state.phi_deg,
            "branch": self.branch,
            "d_theta_deg": deg(self.err_theta),
            "d_phi_deg": None if self.err_phi is None else deg(self.err_phi),
            "flagged": self.flagged,
        }
        if self.fidelity_vs_target is not None:
            d["fidelity"] = self.fidelity_vs_target
            d["d_fidelity"] = self.err_fidelity
        return d


def _spread_errors(
    est: PoincareState, points: np.ndarray
) -> tuple[float, float | None]:
    """Largest deviation of theta and phi over the points from the estimate."""
    thetas = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
    err_theta = float(np.max(np.abs(thetas - est.theta))) if points.size else 0.0
    if est.degenerate_phi:
        return err_theta, None
    phis = np.arctan2(points[:, 1], points[:, 0])
    err_phi = float(np.max(ang_dist(phis, est.phi, TWO_PI))) if points.size else 0.0
    return err_theta, err_phi


def _fidelity_errors(
    est: PoincareState, points: np.ndarray, target: PoincareState | None
) -> tuple[float | None, float | None]:
    if target is None:
        return None, None
    fid = fidelity(est, target)
    t = state_to_bloch(target)
    spread = 0.0
    for p in points:
        spread = max(spread, abs(float((1.0 + p @ t) / 2.0) - fid))
    return fid, spread


def estimate_state(
    measurements,
    target: PoincareState | None = None,
    membership_tol: float = NOISELESS_TOL,
) -> TriangleEstimate:
    """Reconstruct a state from the three standard readings.

    Readings with visibility at or below the blind threshold are dropped; one
    drop leaves a unique two-locus intersection (blind_spot branch, error bars
    from re-intersection under +-tol reading shifts), zero drops give three
    vertices resolved by the narrow-triangle/centroid rules. Two or more
    drops are geometrically impossible for sane data and raise TooManyBlind.
    """
    measurements = list(measurements)
    if len(measurements) != 3:
        raise ValueError("need exactly three measurements")
    live = [m for m in measurements if not m.blind]
    if len(live) < 2:
        raise TooManyBlindError(
            f"{len(measurements) - len(live)} of 3 readings fall below "
            f"visibility {BLIND_VISIBILITY}"
        )

    if len(live) == 2:
        locus_a, locus_b = (measurement_locus(m) for m in live)
        point, flagged = _vertex(locus_a, locus_b, membership_tol)
        est = bloch_to_state(point)
        # Error bars: re-intersect with each reading shifted by +-tol/2 in
        # alpha (tol in longitude), keeping the worst deviation.
        d_alpha = membership_tol / 2.0
        perturbed = []
        for sa in (-d_alpha, d_alpha):
            for sb in (-d_alpha, d_alpha):
                pa = HalfGreatCircle(locus_a.beta, locus_a.longitude + 2.0 * sa)
                pb = HalfGreatCircle(locus_b.beta, locus_b.longitude + 2.0 * sb)
                p, f = _vertex(pa, pb, membership_tol)
                perturbed.append(p)
                flagged = flagged or f
        pts = np.array(perturbed)
        err_theta, err_phi = _spread_errors(est, pts)
        fid, err_fid = _fidelity_errors(est, pts, target)
        return TriangleEstimate(
            state=est,
            branch="blind_spot",
            vertices=np.repeat(point[None, :], 3, axis=0),
            err_theta=err_theta,
            err_phi=err_phi,
            flagged=flagged,
            fidelity_vs_target=fid,
            err_fidelity=err_fid,
        )

    loci = [measurement_locus(m) for m in live]
    flagged = False
    vertices = []
    for i, j in ((0, 1), (1, 2), (0, 2)):
        v, f = _vertex(loci[i], loci[j], membership_tol)
        vertices.append(v)
        flagged = flagged or f
    vertices = np.array(vertices)

    sides = []  # (length, opposite-vertex index); side k joins the other two
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        dot = float(np.clip(vertices[i] @ vertices[j], -1.0, 1.0))
        sides.append((float(np.arccos(dot)), k))
    sides.sort()
    shortest, next_shortest = sides[0][0], sides[1][0]

    if next_shortest > POINT_GUARD and shortest < 0.5 * next_shortest:
        k = sides[0][1]
        i, j = [m for m in range(3) if m != k]
        mid = vertices[i] + vertices[j]
        est_vec = mid / np.linalg.norm(mid)
        branch = "narrow_triangle"
    else:
        total = vertices.sum(axis=0)
        norm = np.linalg.norm(total)
        if norm < 1e-12:  # pathological spread-out triangle; keep best vertex
            est_vec = vertices[0]
        else:
            est_vec = total / norm
        branch = "centroid"

    est = bloch_to_state(est_vec)
    err_theta, err_phi = _spread_errors(est, vertices)
    fid, err_fid = _fidelity_errors(est, vertices, target)
    return TriangleEstimate(
        state=est,
        branch=branch,
        vertices=vertices,
        err_theta=err_theta,
        err_phi=err_phi,
        flagged=flagged,
        fidelity_vs_target=fid,
        err_fidelity=err_fid,
    )


@dataclass(frozen=True)
class Method1Result:
    """Converter-scan result: the branch-normalized reading, the state, and
    the scan curve that produced them."""

    reading: Method1Reading
    state: PoincareState
    beta_grid: np.ndarray
    visibilities: np.ndarray
    pole: bool = False
    raw_beta: float = field(default=np.nan)
    raw_alpha: float = field(default=np.nan)


def default_beta_grid(step: float = rad(1.0)) -> np.ndarray:
    return np.arange(0.0, TWO_PI - step / 2, step)


def method1_scan(provider, beta_grid: np.ndarray | None = None) -> Method1Result:
    """Scan the converter angle for maximal two-lobe contrast and invert.

    provider(beta, n_eta=...) must return an ImageReading for the converter
    image at beta, or for the direct image when beta is None. The scan uses a
    coarse chord fan; the final angle readout at the refined beta uses the
    full fan. A contrast spread below POLE_SPREAD with a structureless direct
    image means a pole: the converter output is then an HG mode at every
    beta, and its orientation at beta = 0 (45 or 135 degrees) labels which
    pole, which is exactly what the inversion of (0, alpha) returns.
    """
    if beta_grid is None:
        beta_grid = default_beta_grid()
    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.size < 8:
        raise ValueError("beta grid too coarse")
    steps = np.diff(np.sort(beta_grid))
    if steps.size and float(steps.max()) > rad(2.0) + 1e-9:
        raise ValueError("beta grid step must not exceed 2 degrees")

    vis = np.empty(beta_grid.size)
    for i, beta in enumerate(beta_grid):
        vis[i] = provider(float(beta), n_eta=90).visibility
    spread = float(vis.max() - vis.min())

    if spread < POLE_SPREAD:
        direct = provider(None, n_eta=180)
        if direct.visibility < BLIND_VISIBILITY:
            witness = provider(0.0, n_eta=360)
            reading = Method1Reading(0.0, witness.alpha)
            return Method1Result(
                reading=reading,
                state=method1_invert(reading),
                beta_grid=beta_grid,
                visibilities=vis,
                pole=True,
                raw_beta=0.0,
                raw_alpha=witness.alpha,
            )

    i = int(np.argmax(vis))
    n = beta_grid.size
    y1, y2, y3 = vis[(i - 1) % n], vis[i], vis[(i + 1) % n]
    denom = y1 - 2.0 * y2 + y3
    delta = 0.5 * (y1 - y3) / denom if abs(denom) > 1e-300 else 0.0
    delta = float(np.clip(delta, -0.5, 0.5))
    step = beta_grid[1] - beta_grid[0] if n > 1 else rad(1.0)
    beta_star = float(wrap(beta_grid[i] + delta * step, TWO_PI))

    final = provider(beta_star, n_eta=360)
    raw = Method1Reading(beta_star, final.alpha)
    state = method1_invert(raw)
    # Normalize the reported reading to the beta = phi branch so that alpha
    # follows the single predicted line over any state sequence.
    if ang_dist(state.phi, beta_star, TWO_PI) > np.pi / 2 and not state.degenerate_phi:
        try:
            reading = method1_predict(state)
        except PoleDegenerateError:
            reading = raw
    else:
        reading = raw
    return Method1Result(
        reading=reading,
        state=state,
        beta_grid=beta_grid,
        visibilities=vis,
        pole=False,
        raw_beta=beta_star,
        raw_alpha=final.alpha,
    )


def table_row(
    point: str, target: PoincareState, estimate: TriangleEstimate
) -> dict:
    """One serialized result row: target, estimate, errors, branch."""
    return {
        "point": point,
        "theta_t_deg": target.theta_deg,
        "phi_t_deg": target.phi_deg,
        "theta_e_deg": estimate.state.theta_deg,
        "d_theta_deg": deg(estimate.err_theta),
        "phi_e_deg": estimate.state.phi_deg,
        "d_phi_deg": None if estimate.err_phi is None else deg(estimate.err_phi),
        "fidelity": estimate.fidelity_vs_target,
        "d_fidelity": estimate.err_fidelity,
        "branch": estimate.branch,
    }
