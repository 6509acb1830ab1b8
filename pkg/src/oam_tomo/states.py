"""First-order OAM superpositions as points on a Poincare-like sphere.

A normalized superposition of the two first-order modes,

    |theta, phi> = cos(theta/2) |LG+> + e^{i phi} sin(theta/2) |LG->,

is parameterized exactly like a qubit: polar angle theta in [0, pi] from the
LG+ pole, azimuth phi in [0, 2 pi). The Bloch map sends it to the unit vector
(sin theta cos phi, sin theta sin phi, cos theta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import TWO_PI, wrap

# Polar angles closer than this to 0 or pi make phi physically meaningless.
POLE_TOL = 1e-9


@dataclass(frozen=True)
class PoincareState:
    """Sphere coordinates of a first-order mode superposition (radians)."""

    theta: float
    phi: float
    degenerate_phi: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ValueError("state angles must be finite")
        if self.theta < -POLE_TOL or self.theta > np.pi + POLE_TOL:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        theta = float(min(max(self.theta, 0.0), np.pi))
        phi = float(wrap(self.phi))
        degenerate = bool(self.degenerate_phi)
        if theta < POLE_TOL or theta > np.pi - POLE_TOL:
            degenerate = True
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "degenerate_phi", degenerate)

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float) -> "PoincareState":
        return cls(float(np.deg2rad(theta_deg)), float(np.deg2rad(phi_deg)))

    @property
    def theta_deg(self) -> float:
        return float(np.rad2deg(self.theta))

    @property
    def phi_deg(self) -> float:
        return float(np.rad2deg(self.phi))

    def to_json_dict(self) -> dict:
        return {
            "theta_deg": self.theta_deg,
            "phi_deg": self.phi_deg,
            "degenerate_phi": self.degenerate_phi,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PoincareState":
        return cls.from_degrees(float(d["theta_deg"]), float(d["phi_deg"]))


def normalize_amplitudes(c: np.ndarray) -> np.ndarray:
    """Normalize a 2-vector of mode amplitudes and fix its global phase.

    Convention: the LG+ amplitude is made real and non-negative; when it is
    numerically zero the LG- amplitude is made real and non-negative instead.
    """
    c = np.asarray(c, dtype=complex)
    if c.shape != (2,):
        raise ValueError("amplitude vector must have shape (2,)")
    norm = np.sqrt(abs(c[0]) ** 2 + abs(c[1]) ** 2)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("amplitude vector must be nonzero and finite")
    c = c / norm
    anchor = c[0] if abs(c[0]) > 1e-12 else c[1]
    c = c * np.exp(-1j * np.angle(anchor))
    return c


def amplitudes(state: PoincareState) -> np.ndarray:
    """Mode amplitudes (c_plus, c_minus) of the state, unit norm."""
    return np.array(
        [np.cos(state.theta / 2), np.exp(1j * state.phi) * np.sin(state.theta / 2)],
        dtype=complex,
    )


def amplitudes_to_state(c: np.ndarray) -> PoincareState:
    """Sphere coordinates of an amplitude 2-vector (global phase ignored)."""
    c = normalize_amplitudes(c)
    z = abs(c[0]) ** 2 - abs(c[1]) ** 2
    x = 2.0 * (np.conj(c[0]) * c[1]).real
    y = 2.0 * (np.conj(c[0]) * c[1]).imag
    return bloch_to_state(np.array([x, y, z]))


def state_to_bloch(state: PoincareState) -> np.ndarray:
    st = np.sin(state.theta)
    return np.array(
        [st * np.cos(state.phi), st * np.sin(state.phi), np.cos(state.theta)]
    )


def bloch_to_state(n: np.ndarray) -> PoincareState:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError("Bloch vector must have shape (3,)")
    norm = np.linalg.norm(n)
    if not np.isfinite(norm) or norm < 1e-12:
        raise ValueError("Bloch vector must be nonzero and finite")
    n = n / norm
    theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    phi = float(wrap(np.arctan2(n[1], n[0]), TWO_PI))
    return PoincareState(theta, phi)


def fidelity(a: PoincareState, b: PoincareState) -> float:
    """Squared overlap |<a|b>|^2 = (1 + n_a . n_b) / 2."""
    dot = float(np.dot(state_to_bloch(a), state_to_bloch(b)))
    return float(np.clip((1.0 + dot) / 2.0, 0.0, 1.0))


def spherical_distance(a: PoincareState, b: PoincareState) -> float:
    """Great-circle angle between two states on the sphere (radians)."""
    dot = float(np.dot(state_to_bloch(a), state_to_bloch(b)))
    return float(np.arccos(np.clip(dot, -1.0, 1.0)))
