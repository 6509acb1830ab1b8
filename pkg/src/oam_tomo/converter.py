"""Astigmatic mode-converter action on the mode sphere.

A pi/2 converter whose Poincare-frame orientation angle is beta acts on the
mode amplitudes as the unitary

    MC(beta) = e^{i pi/4} / sqrt(2) * [[1, i e^{-i beta}], [i e^{i beta}, 1]],

whose eigenvectors are the equator states at longitudes beta and beta + pi.
On the sphere this is a rotation by -pi/2 about the equatorial axis
(cos beta, sin beta, 0); the convention is pinned by
bloch_rotate((0, 0, 1), 0) == (0, 1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import TWO_PI, wrap
from .states import (
    PoincareState,
    amplitudes,
    amplitudes_to_state,
    POLE_TOL,
)


class PoleDegenerateError(ValueError):
    """The operation needs a defined azimuth, but the state sits at a pole."""


class NoValidBranchError(ValueError):
    """No sphere point is consistent with the supplied reading."""


@dataclass(frozen=True)
class Method1Reading:
    """Converter orientation and lobe angle extracted by the scan method (radians)."""

    beta_mc: float
    alpha_hg: float

    def __post_init__(self):
        object.__setattr__(self, "beta_mc", float(wrap(self.beta_mc)))
        object.__setattr__(self, "alpha_hg", float(wrap(self.alpha_hg, np.pi)))

    @classmethod
    def from_degrees(cls, beta_mc_deg: float, alpha_hg_deg: float) -> "Method1Reading":
        return cls(np.deg2rad(beta_mc_deg), np.deg2rad(alpha_hg_deg))

    @property
    def beta_mc_deg(self) -> float:
        return float(np.rad2deg(self.beta_mc))

    @property
    def alpha_hg_deg(self) -> float:
        return float(np.rad2deg(self.alpha_hg))

    def to_json_dict(self) -> dict:
        return {
            "beta_mc_deg": float(np.rad2deg(self.beta_mc)),
            "alpha_hg_deg": float(np.rad2deg(self.alpha_hg)),
        }


def mc_unitary(beta: float) -> np.ndarray:
    """2x2 unitary of the converter at Poincare-frame angle beta."""
    return (np.exp(1j * np.pi / 4) / np.sqrt(2.0)) * np.array(
        [[1.0, 1j * np.exp(-1j * beta)], [1j * np.exp(1j * beta), 1.0]],
        dtype=complex,
    )


def apply_mc(state: PoincareState, beta: float) -> PoincareState:
    """State after the converter, with the global phase stripped."""
    return amplitudes_to_state(mc_unitary(beta) @ amplitudes(state))


def bloch_rotate(n: np.ndarray, beta: float) -> np.ndarray:
    """Rotate a Bloch vector by -pi/2 about the axis (cos beta, sin beta, 0).

    Equivalent to apply_mc on the sphere. The quarter-turn Rodrigues formula
    collapses to n' = u (u . n) - u x n.
    """
    n = np.asarray(n, dtype=float)
    u = np.array([np.cos(beta), np.sin(beta), 0.0])
    return u * np.dot(u, n) - np.cross(u, n)


def bloch_unrotate(n: np.ndarray, beta: float) -> np.ndarray:
    """Inverse of bloch_rotate: quarter turn by +pi/2 about the same axis."""
    n = np.asarray(n, dtype=float)
    u = np.array([np.cos(beta), np.sin(beta), 0.0])
    return u * np.dot(u, n) + np.cross(u, n)


def method1_predict(state: PoincareState) -> Method1Reading:
    """Scan observables of a known state: beta_mc = phi, alpha = (phi - theta)/2 + 45 deg."""
    if state.theta < POLE_TOL or state.theta > np.pi - POLE_TOL:
        raise PoleDegenerateError("scan observables are undefined at the poles")
    return Method1Reading(state.phi, (state.phi - state.theta) / 2 + np.pi / 4)


def method1_invert(reading: Method1Reading) -> PoincareState:
    """State consistent with a (beta_mc, alpha_hg) reading.

    Primary branch: phi = beta_mc, theta = beta_mc - 2 alpha + 90 deg reduced
    mod 360 deg. A reduced theta beyond 180 deg means the scan locked onto the
    secondary modulus-balance zero at beta = phi + pi; the consistent state is
    then (360 deg - theta, beta_mc + 180 deg), which is what the inverse sphere
    rotation of the equator point at longitude 2 alpha gives.
    """
    if not (np.isfinite(reading.beta_mc) and np.isfinite(reading.alpha_hg)):
        raise NoValidBranchError("reading contains non-finite angles")
    theta = wrap(reading.beta_mc - 2.0 * reading.alpha_hg + np.pi / 2, TWO_PI)
    if theta <= np.pi:
        return PoincareState(float(theta), reading.beta_mc)
    return PoincareState(float(TWO_PI - theta), wrap(reading.beta_mc + np.pi))


def equal_modulus_residual(state: PoincareState, beta: float) -> float:
    """Modulus imbalance of the converted amplitudes.

    For the unit-norm column this equals sin(theta) |sin(phi - beta)|, the
    |z| component of the converted Bloch vector: zero exactly when the
    converted state sits on the equator, i.e. beta = phi mod pi.
    """
    c = mc_unitary(beta) @ amplitudes(state)
    return float(abs(abs(c[0]) ** 2 - abs(c[1]) ** 2))
