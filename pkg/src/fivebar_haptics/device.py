"""Two-linkage device composition, per-user calibration, and target checking.

The device carries two identical-by-default five-bar linkages whose
effectors sit ``spacer`` mm apart along the finger axis; each linkage works
in its own parallel plane, so targets resolve independently per effector.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

from .errors import NearSingular, OutOfRange, ParseError, Unreachable, ValidationError
from .kinematics import (
    DEFAULT_ELBOWS,
    DEFAULT_GEOMETRY,
    EffectorPose,
    ElbowConfig,
    JointAngles,
    LinkageGeometry,
    SingularityMargins,
    lateral_reach,
    solve_pose,
)
from .servo import ServoSpec, default_servo_map

__all__ = [
    "Effector",
    "ContactState",
    "DeviceConfig",
    "FingerProfile",
    "DeviceCalibration",
    "EffectorTarget",
    "DevicePose",
    "DEFAULT_CONFIG",
    "calibrate",
    "device_targets",
    "contact_state",
    "hover_target",
    "load_config",
    "config_to_json",
]


class Effector(enum.Enum):
    A = "a"
    B = "b"


class ContactState(enum.Enum):
    HOVER = "hover"
    CONTACT = "contact"
    PRESSING = "pressing"


@dataclass(frozen=True)
class DeviceConfig:
    """Static device description.

    ``standoff`` is the contact-depth offset added to half the finger
    thickness during calibration; ``hover_gap`` the retraction used for the
    non-contact position.  ``servo_map`` lists the specs for channels
    (a-left, a-right, b-left, b-right) in that order.
    """

    linkage_a: LinkageGeometry = DEFAULT_GEOMETRY
    linkage_b: LinkageGeometry = DEFAULT_GEOMETRY
    spacer: float = 26.0
    servo_map: tuple[ServoSpec, ServoSpec, ServoSpec, ServoSpec] = field(
        default_factory=default_servo_map
    )
    standoff: float = 14.5
    hover_gap: float = 3.0
    press_depth_max: float = 2.0
    elbows: ElbowConfig = DEFAULT_ELBOWS
    margins: SingularityMargins = field(default_factory=SingularityMargins)
    edge_margin: float = 1.0  # mm held back from the workspace edge

    def __post_init__(self):
        if self.spacer <= 0:
            raise ValueError("spacer must be positive")
        if len(self.servo_map) != 4:
            raise ValueError("servo_map must list exactly four servos")

    def geometry(self, effector: Effector) -> LinkageGeometry:
        return self.linkage_a if effector is Effector.A else self.linkage_b


DEFAULT_CONFIG = DeviceConfig()


@dataclass(frozen=True)
class FingerProfile:
    """Per-user finger measurements, mm."""

    thickness: float
    width: float

    def __post_init__(self):
        if self.thickness < 0 or self.width <= 0:
            raise ValueError("finger dimensions must be positive")


@dataclass(frozen=True)
class DeviceCalibration:
    """Contact plane depth and usable lateral sweep for one user."""

    h: float
    lateral_range: float
    press_depth_max: float = 2.0


@dataclass(frozen=True)
class EffectorTarget:
    """One effector's commanded lateral position and indentation.

    ``press`` is 0 at surface contact, positive when indenting, negative
    when hovering above the finger.
    """

    effector: Effector
    x: float
    press: float


@dataclass(frozen=True)
class DevicePose:
    """Joint angles for both linkages, in the order (a, b)."""

    a: JointAngles
    b: JointAngles


def calibrate(finger: FingerProfile, cfg: DeviceConfig = DEFAULT_CONFIG) -> DeviceCalibration:
    """Derive the contact depth and lateral range from finger measurements.

    h = standoff + thickness/2; the lateral range is the finger half-width
    unless the workspace edge (minus the configured margin) is tighter.
    Raises OutOfRange when no symmetric contact pose exists at that depth
    for either linkage.
    """
    h = cfg.standoff + finger.thickness / 2.0
    limit = math.inf
    for geom in (cfg.linkage_a, cfg.linkage_b):
        try:
            solve_pose(geom, (0.0, -h), cfg.elbows, margins=None)
        except Unreachable as exc:
            raise OutOfRange(f"no symmetric contact pose at depth {h:g} mm: {exc}") from exc
        limit = min(limit, lateral_reach(geom, h, cfg.edge_margin))
    return DeviceCalibration(
        h=h,
        lateral_range=min(finger.width / 2.0, limit),
        press_depth_max=cfg.press_depth_max,
    )


def hover_target(effector: Effector, cfg: DeviceConfig, x: float = 0.0) -> EffectorTarget:
    """The retracted non-contact pose used between stimuli."""
    return EffectorTarget(effector=effector, x=x, press=-cfg.hover_gap)


def _check_target(target: EffectorTarget, cal: DeviceCalibration) -> None:
    if abs(target.x) > cal.lateral_range + 1e-9:
        raise OutOfRange(
            f"effector {target.effector.value}: |x|={abs(target.x):g} mm exceeds "
            f"lateral range {cal.lateral_range:g} mm"
        )
    if target.press > cal.press_depth_max + 1e-9:
        raise OutOfRange(
            f"effector {target.effector.value}: press {target.press:g} mm exceeds "
            f"maximum {cal.press_depth_max:g} mm"
        )


def device_targets(
    cal: DeviceCalibration,
    cfg: DeviceConfig,
    targets: list[EffectorTarget],
) -> DevicePose:
    """Resolve effector targets to joint angles for both linkages.

    At most one target per effector; effectors without a target go to the
    hover pose.  Unreachable/NearSingular errors carry the effector name.
    """
    chosen: dict[Effector, EffectorTarget] = {}
    for target in targets:
        if target.effector in chosen:
            raise ValidationError(f"duplicate target for effector {target.effector.value}")
        _check_target(target, cal)
        chosen[target.effector] = target
    angles = {}
    for effector in Effector:
        target = chosen.get(effector, hover_target(effector, cfg))
        geom = cfg.geometry(effector)
        try:
            angles[effector], _branch = solve_pose(
                geom, (target.x, -(cal.h + target.press)), cfg.elbows, cfg.margins
            )
        except (Unreachable, NearSingular) as exc:
            exc.args = (f"effector {effector.value}: {exc}",)
            raise
    return DevicePose(a=angles[Effector.A], b=angles[Effector.B])


def contact_state(
    cal: DeviceCalibration, pose: EffectorPose, epsilon: float = 0.1
) -> ContactState:
    """Classify an effector pose by depth relative to the contact plane."""
    depth = -pose.y
    if abs(depth - cal.h) <= epsilon:
        return ContactState.CONTACT
    if depth > cal.h + epsilon:
        return ContactState.PRESSING
    return ContactState.HOVER


# --- configuration file ----------------------------------------------------

_GEOMETRY_KEYS = {"l1_mm", "l2_mm", "d_mm"}
_SERVO_KEYS = {
    "channel",
    "pulse_min_us",
    "pulse_max_us",
    "angle_min_deg",
    "angle_max_deg",
    "mount_offset_deg",
    "direction",
    "stall_torque_nm",
}
_TOP_KEYS = {
    "linkage_a",
    "linkage_b",
    "spacer_mm",
    "servo_map",
    "standoff_mm",
    "hover_gap_mm",
    "press_depth_max_mm",
    "edge_margin_mm",
    "det_min",
    "serial_margin_deg",
    "parallel_margin_deg",
    "transport",
}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _parse_geometry(obj, where: str) -> LinkageGeometry:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be an object")
    _reject_unknown(obj, _GEOMETRY_KEYS, where)
    try:
        return LinkageGeometry(
            l1=float(obj["l1_mm"]), l2=float(obj["l2_mm"]), d=float(obj["d_mm"])
        )
    except KeyError as exc:
        raise ValidationError(f"{where} missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _parse_servo(obj, where: str) -> ServoSpec:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be an object")
    _reject_unknown(obj, _SERVO_KEYS, where)
    try:
        return ServoSpec(
            channel=int(obj["channel"]),
            pulse_min=float(obj.get("pulse_min_us", 600.0)),
            pulse_max=float(obj.get("pulse_max_us", 2400.0)),
            angle_min=float(obj.get("angle_min_deg", 0.0)),
            angle_max=float(obj.get("angle_max_deg", 180.0)),
            mount_offset=float(obj.get("mount_offset_deg", 0.0)),
            direction=int(obj.get("direction", 1)),
            stall_torque_nm=float(obj.get("stall_torque_nm", 0.0588)),
        )
    except KeyError as exc:
        raise ValidationError(f"{where} missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def load_config(text: str | bytes) -> DeviceConfig:
    """Parse and validate a device configuration file (JSON; unknown keys rejected)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("configuration root must be an object")
    _reject_unknown(obj, _TOP_KEYS, "configuration")
    cfg = DEFAULT_CONFIG
    kwargs = {}
    if "linkage_a" in obj:
        kwargs["linkage_a"] = _parse_geometry(obj["linkage_a"], "linkage_a")
    if "linkage_b" in obj:
        kwargs["linkage_b"] = _parse_geometry(obj["linkage_b"], "linkage_b")
    if "spacer_mm" in obj:
        kwargs["spacer"] = float(obj["spacer_mm"])
    if "servo_map" in obj:
        servos = obj["servo_map"]
        if not isinstance(servos, list) or len(servos) != 4:
            raise ValidationError("servo_map must list exactly four servos")
        parsed = tuple(_parse_servo(s, f"servo_map[{i}]") for i, s in enumerate(servos))
        channels = sorted(s.channel for s in parsed)
        if channels != [0, 1, 2, 3]:
            raise ValidationError("servo_map must cover channels 0..3 exactly once")
        kwargs["servo_map"] = parsed
    for json_key, attr in (
        ("standoff_mm", "standoff"),
        ("hover_gap_mm", "hover_gap"),
        ("press_depth_max_mm", "press_depth_max"),
        ("edge_margin_mm", "edge_margin"),
    ):
        if json_key in obj:
            kwargs[attr] = float(obj[json_key])
    margin_kwargs = {}
    for json_key, attr in (
        ("det_min", "det_min"),
        ("serial_margin_deg", "serial_margin_deg"),
        ("parallel_margin_deg", "parallel_margin_deg"),
    ):
        if json_key in obj:
            margin_kwargs[attr] = float(obj[json_key])
    if margin_kwargs:
        kwargs["margins"] = replace(SingularityMargins(), **margin_kwargs)
    try:
        return replace(cfg, **kwargs) if kwargs else cfg
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def config_to_json(cfg: DeviceConfig) -> str:
    """Serialize a configuration in the documented file schema."""
    obj = {
        "linkage_a": {"l1_mm": cfg.linkage_a.l1, "l2_mm": cfg.linkage_a.l2, "d_mm": cfg.linkage_a.d},
        "linkage_b": {"l1_mm": cfg.linkage_b.l1, "l2_mm": cfg.linkage_b.l2, "d_mm": cfg.linkage_b.d},
        "spacer_mm": cfg.spacer,
        "servo_map": [
            {
                "channel": s.channel,
                "pulse_min_us": s.pulse_min,
                "pulse_max_us": s.pulse_max,
                "angle_min_deg": s.angle_min,
                "angle_max_deg": s.angle_max,
                "mount_offset_deg": s.mount_offset,
                "direction": s.direction,
                "stall_torque_nm": s.stall_torque_nm,
            }
            for s in cfg.servo_map
        ],
        "standoff_mm": cfg.standoff,
        "hover_gap_mm": cfg.hover_gap,
        "press_depth_max_mm": cfg.press_depth_max,
        "edge_margin_mm": cfg.edge_margin,
        "det_min": cfg.margins.det_min,
        "serial_margin_deg": cfg.margins.serial_margin_deg,
        "parallel_margin_deg": cfg.margins.parallel_margin_deg,
    }
    return json.dumps(obj, indent=2) + "\n"
