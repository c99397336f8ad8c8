"""Device composition, calibration, and target resolution tests."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from fivebar_haptics.device import (
    DEFAULT_CONFIG,
    ContactState,
    DeviceConfig,
    Effector,
    EffectorTarget,
    FingerProfile,
    calibrate,
    config_to_json,
    contact_state,
    device_targets,
    load_config,
)
from fivebar_haptics.errors import OutOfRange, ParseError, Unreachable, ValidationError
from fivebar_haptics.kinematics import Branch, EffectorPose, forward_kinematics


def test_reference_calibration(reference_calibration):
    assert reference_calibration.h == pytest.approx(22.0)
    assert reference_calibration.lateral_range == pytest.approx(8.0)
    assert reference_calibration.press_depth_max == pytest.approx(2.0)


def test_calibrate_zero_thickness():
    # the default standoff of 14.5 mm is inside the inner annulus for the
    # default links, so the formula edge needs a reachable standoff
    from dataclasses import replace

    cfg = replace(DEFAULT_CONFIG, standoff=18.0)
    cal = calibrate(FingerProfile(thickness=0.0, width=16.0), cfg)
    assert cal.h == cfg.standoff


def test_calibrate_width_governs_vs_workspace_limit():
    # reference depth: workspace edge sits near 38.6 mm, far beyond width/2
    cal = calibrate(FingerProfile(thickness=15.0, width=200.0))
    assert 30.0 < cal.lateral_range < 39.0
    narrow = calibrate(FingerProfile(thickness=15.0, width=10.0))
    assert narrow.lateral_range == pytest.approx(5.0)


def test_calibrate_too_thick():
    # the symmetric slice ends near h = 51.5 mm, i.e. thickness ~ 74 mm
    with pytest.raises(OutOfRange):
        calibrate(FingerProfile(thickness=76.0, width=16.0))


def test_calibrate_monotone_in_thickness():
    previous = -1.0
    for thickness in (5.0, 10.0, 15.0, 20.0, 40.0):
        cal = calibrate(FingerProfile(thickness=thickness, width=16.0))
        assert cal.h >= previous
        previous = cal.h


def test_device_targets_reference_pattern(reference_calibration):
    pose = device_targets(
        reference_calibration,
        DEFAULT_CONFIG,
        [
            EffectorTarget(Effector.A, 0.0, 0.0),
            EffectorTarget(Effector.B, 0.0, 0.0),
        ],
    )
    for angles in (pose.a, pose.b):
        assert angles.alpha_left == pytest.approx(84.0, abs=0.5)
        assert angles.alpha_right == pytest.approx(84.0, abs=0.5)


def test_device_targets_empty_goes_to_hover(reference_calibration):
    pose = device_targets(reference_calibration, DEFAULT_CONFIG, [])
    hover_y = -(reference_calibration.h - DEFAULT_CONFIG.hover_gap)
    for effector, angles in ((Effector.A, pose.a), (Effector.B, pose.b)):
        geom = DEFAULT_CONFIG.geometry(effector)
        fk = forward_kinematics(geom, angles, Branch.UPPER)
        assert fk.x == pytest.approx(0.0, abs=1e-9)
        assert fk.y == pytest.approx(hover_y, abs=1e-9)


def test_device_targets_roundtrip_fk(reference_calibration):
    targets = [
        EffectorTarget(Effector.A, -3.5, 1.0),
        EffectorTarget(Effector.B, 6.0, 0.5),
    ]
    pose = device_targets(reference_calibration, DEFAULT_CONFIG, targets)
    for target, angles in zip(targets, (pose.a, pose.b)):
        fk = forward_kinematics(DEFAULT_CONFIG.geometry(target.effector), angles)
        expected = (target.x, -(reference_calibration.h + target.press))
        assert math.dist((fk.x, fk.y), expected) <= 1e-9


def test_device_targets_out_of_range(reference_calibration):
    over = reference_calibration.lateral_range + 1.0
    with pytest.raises(OutOfRange):
        device_targets(
            reference_calibration, DEFAULT_CONFIG, [EffectorTarget(Effector.A, over, 0.0)]
        )
    with pytest.raises(OutOfRange):
        device_targets(
            reference_calibration, DEFAULT_CONFIG, [EffectorTarget(Effector.A, 0.0, 5.0)]
        )


def test_device_targets_duplicate_effector(reference_calibration):
    with pytest.raises(ValidationError):
        device_targets(
            reference_calibration,
            DEFAULT_CONFIG,
            [EffectorTarget(Effector.A, 0.0, 0.0), EffectorTarget(Effector.A, 1.0, 0.0)],
        )


def test_device_targets_errors_name_the_effector():
    # a deep calibration whose press target leaves the workspace entirely
    cal = calibrate(FingerProfile(thickness=70.0, width=16.0))
    deep = cal.h + cal.press_depth_max
    assert math.hypot(DEFAULT_CONFIG.linkage_a.d / 2, deep) > 52.0 - 1.0
    with pytest.raises((Unreachable, OutOfRange)) as exc_info:
        device_targets(cal, DEFAULT_CONFIG, [EffectorTarget(Effector.A, 0.0, cal.press_depth_max)])
    assert "a" in str(exc_info.value)


@pytest.mark.parametrize(
    "y,expected",
    [
        (-22.0, ContactState.CONTACT),
        (-20.0, ContactState.HOVER),
        (-23.0, ContactState.PRESSING),
        (-22.09, ContactState.CONTACT),
        (-21.89, ContactState.HOVER),
        (-22.11, ContactState.PRESSING),
    ],
)
def test_contact_state_partitions_depth(reference_calibration, y, expected):
    pose = EffectorPose(x=0.0, y=y)
    assert contact_state(reference_calibration, pose) is expected


@settings(max_examples=200, deadline=None)
@given(depth=st.floats(0.0, 60.0))
def test_contact_state_total_and_consistent(depth):
    cal = calibrate(FingerProfile(thickness=15.0, width=16.0))
    state = contact_state(cal, EffectorPose(x=0.0, y=-depth))
    if depth < cal.h - 0.1:
        assert state is ContactState.HOVER
    elif depth > cal.h + 0.1:
        assert state is ContactState.PRESSING
    else:
        assert state is ContactState.CONTACT


# --- configuration file --------------------------------------------------------

def test_config_roundtrip():
    text = config_to_json(DEFAULT_CONFIG)
    assert load_config(text) == DEFAULT_CONFIG


def test_config_unknown_key_rejected():
    with pytest.raises(ValidationError, match="unknown key"):
        load_config('{"spacer_mm": 26, "surprise": 1}')


def test_config_bad_json():
    with pytest.raises(ParseError, match="line 1"):
        load_config("{not json")


def test_config_partial_override():
    cfg = load_config('{"standoff_mm": 12.0, "hover_gap_mm": 4.0}')
    assert cfg.standoff == 12.0
    assert cfg.hover_gap == 4.0
    assert cfg.linkage_a == DEFAULT_CONFIG.linkage_a


def test_config_servo_map_validation():
    with pytest.raises(ValidationError, match="channels 0..3"):
        load_config(
            '{"servo_map": [{"channel": 0}, {"channel": 0}, {"channel": 2}, {"channel": 3}]}'
        )


def test_config_invalid_geometry():
    with pytest.raises(ValidationError):
        load_config('{"linkage_a": {"l1_mm": -5, "l2_mm": 17, "d_mm": 15}}')


def test_config_spacer_positive():
    with pytest.raises(ValueError):
        DeviceConfig(spacer=0.0)
