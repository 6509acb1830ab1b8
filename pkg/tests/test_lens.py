"""Tilted-lens converter: mask, calibration, and agreement with the ideal map."""

import math

import numpy as np
import pytest

from oam_tomo.analysis import mode_orientation
from oam_tomo.angles import ang_dist, deg, rad
from oam_tomo.harness import exact_reading
from oam_tomo.lens import (
    CalibrationFailedError,
    LensSpec,
    apply_tilted_lens,
    calibrate_tilt,
    simulate_tilted_lens_measurement,
    tilted_lens_mask,
)
from oam_tomo.states import PoincareState


@pytest.fixture(scope="module")
def calibration(grid256):
    return calibrate_tilt(grid256, LensSpec())


def test_lens_spec_validation():
    with pytest.raises(ValueError):
        LensSpec(focal=-0.1)
    with pytest.raises(ValueError):
        LensSpec(tilt=math.pi / 2)
    spec = LensSpec()
    back = LensSpec.from_json_dict(spec.to_json_dict())
    assert back == spec


def test_mask_is_pure_phase(grid256):
    mask = tilted_lens_mask(grid256, LensSpec(), 0.7)
    np.testing.assert_allclose(np.abs(mask), 1.0, atol=1e-12)


def test_mask_axis_follows_beta(grid256):
    # rotating beta by pi rotates the mask axes by pi/2: the two masks
    # swap their principal curvatures, so they differ off-axis
    m0 = tilted_lens_mask(grid256, LensSpec(), 0.0)
    m1 = tilted_lens_mask(grid256, LensSpec(), math.pi)
    assert np.max(np.abs(np.angle(m0 * m1.conj()))) > 0.1
    # untilted lens has no preferred axis: beta must not matter
    round_lens = LensSpec(tilt=0.0)
    r0 = tilted_lens_mask(grid256, round_lens, 0.0)
    r1 = tilted_lens_mask(grid256, round_lens, 1.1)
    np.testing.assert_allclose(r0, r1, atol=1e-12)


def test_apply_preserves_power(grid256):
    from oam_tomo.fields import lg_field

    f = lg_field(grid256, 1)
    out = apply_tilted_lens(f, LensSpec(), 0.3)
    assert out.power() == pytest.approx(f.power(), rel=1e-12)


def test_calibration_converges(calibration):
    assert calibration.visibility > 0.9
    assert deg(ang_dist(calibration.alpha, rad(45.0), math.pi)) < 0.1
    # converged plane sits within a centimeter of the nominal focus
    assert abs(calibration.offset) < 0.01


def test_calibration_json(calibration):
    d = calibration.to_json_dict()
    assert set(d) == {"offset_m", "visibility", "alpha_deg"}


def test_untilted_lens_fails_calibration(grid256):
    with pytest.raises(CalibrationFailedError):
        calibrate_tilt(grid256, LensSpec(tilt=0.0))


def test_probe_mode_splits_into_two_lobes(grid256, calibration):
    """LG+ through the calibrated converter reads as a 45 deg two-lobe mode."""
    img = simulate_tilted_lens_measurement(
        PoincareState(0.0, 0.0), 0.0, grid256, LensSpec(), calibration.offset
    )
    reading = mode_orientation(img)
    assert reading.visibility > 0.9
    assert deg(ang_dist(reading.alpha, rad(45.0), math.pi)) < 0.5
    # the opposite charge flips the lobe axis to 135 deg
    img2 = simulate_tilted_lens_measurement(
        PoincareState(math.pi, 0.0), 0.0, grid256, LensSpec(), calibration.offset
    )
    reading2 = mode_orientation(img2)
    assert deg(ang_dist(reading2.alpha, rad(135.0), math.pi)) < 0.5


def test_physical_matches_ideal_map(grid256, calibration):
    """Simulated converter readings track the abstract rotation within 3 deg."""
    for theta_deg, phi_deg in [(70.0, 30.0), (120.0, 250.0)]:
        s = PoincareState.from_degrees(theta_deg, phi_deg)
        for beta in (0.0, math.pi / 2):
            expect = exact_reading(s, beta)
            img = simulate_tilted_lens_measurement(s, beta, grid256, LensSpec(), calibration.offset)
            got = mode_orientation(img)
            assert deg(ang_dist(got.alpha, expect.alpha, math.pi)) < 3.0
            assert abs(got.visibility - expect.visibility) < 0.1
