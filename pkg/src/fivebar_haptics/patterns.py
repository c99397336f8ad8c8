"""Tactile pattern catalogs and their compilation to joint schedules.

A pattern is declarative (slots, speeds, directions); compilation turns it
into a fixed-rate task-space trajectory and then, through per-sample IK,
into a joint schedule ready for playback.  Catalogs are plain JSON files so
alternative layouts are data, not code.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources

from .device import DeviceCalibration, DeviceConfig, Effector, EffectorTarget
from .errors import NearSingular, OutOfRange, ParseError, Unreachable, ValidationError
from .kinematics import JointAngles, solve_pose

__all__ = [
    "Slot",
    "Direction",
    "SPEED_SLOW",
    "SPEED_MIDDLE",
    "SPEED_FAST",
    "DEFAULT_SPEED_SET",
    "DEFAULT_RATE_HZ",
    "DEFAULT_HOLD_S",
    "DEFAULT_LEAD_S",
    "StaticPattern",
    "EffectorSweep",
    "SlippagePattern",
    "PatternCatalog",
    "TrajectorySample",
    "Trajectory",
    "ScheduleEntry",
    "JointSchedule",
    "default_static_catalog",
    "default_slippage_catalog",
    "load_catalog",
    "catalog_to_json",
    "static_targets",
    "static_trajectory",
    "slippage_trajectory",
    "compile_schedule",
]

SPEED_SLOW = 43.0    # mm/s
SPEED_MIDDLE = 60.0
SPEED_FAST = 86.0
DEFAULT_SPEED_SET = (SPEED_SLOW, SPEED_MIDDLE, SPEED_FAST)

DEFAULT_RATE_HZ = 50.0
DEFAULT_HOLD_S = 3.0
DEFAULT_LEAD_S = 0.3
DEFAULT_SPAN_MM = 10.0
DEFAULT_PRESS_MM = 1.0


class Slot(enum.Enum):
    """Lateral contact slot; LEFT maps to -lateral_range/2, RIGHT to +."""

    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"

    def x(self, lateral_range: float) -> float:
        if self is Slot.LEFT:
            return -lateral_range / 2.0
        if self is Slot.RIGHT:
            return +lateral_range / 2.0
        return 0.0


class Direction(enum.Enum):
    LEFT_TO_RIGHT = "ltr"
    RIGHT_TO_LEFT = "rtl"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.LEFT_TO_RIGHT else -1.0


@dataclass(frozen=True)
class StaticPattern:
    """Two pressed points held for ``hold_s`` seconds."""

    id: int
    a_slot: Slot
    b_slot: Slot
    press_mm: float = DEFAULT_PRESS_MM
    hold_s: float = DEFAULT_HOLD_S

    def __post_init__(self):
        if self.id < 1:
            raise ValidationError(f"pattern id {self.id} must be >= 1")
        if self.hold_s < 0:
            raise ValidationError("hold duration must be non-negative")


@dataclass(frozen=True)
class EffectorSweep:
    speed: float       # mm/s, must belong to the catalog speed set
    direction: Direction


@dataclass(frozen=True)
class SlippagePattern:
    """Both contact points sweep laterally at commanded speeds."""

    id: int
    a: EffectorSweep
    b: EffectorSweep
    span_mm: float = DEFAULT_SPAN_MM

    def __post_init__(self):
        if self.id < 1:
            raise ValidationError(f"pattern id {self.id} must be >= 1")
        if self.span_mm < 0:
            raise ValidationError("span must be non-negative")
        for sweep in (self.a, self.b):
            if sweep.speed <= 0:
                raise ValidationError("sweep speed must be positive")


@dataclass(frozen=True)
class PatternCatalog:
    name: str
    speed_set: tuple[float, ...]
    static: tuple[StaticPattern, ...] = ()
    slippage: tuple[SlippagePattern, ...] = ()

    def __post_init__(self):
        ids = [p.id for p in self.static] + [p.id for p in self.slippage]
        if sorted(ids) != list(range(1, len(ids) + 1)):
            raise ValidationError(
                f"pattern ids must be dense from 1 with no duplicates, got {sorted(ids)}"
            )
        for pattern in self.slippage:
            for sweep in (pattern.a, pattern.b):
                if sweep.speed not in self.speed_set:
                    raise ValidationError(
                        f"pattern {pattern.id}: speed {sweep.speed:g} mm/s not in the "
                        f"declared speed set {list(self.speed_set)}"
                    )

    @property
    def pattern_ids(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.static) + len(self.slippage) + 1))

    def get(self, pattern_id: int) -> StaticPattern | SlippagePattern:
        for pattern in self.static + self.slippage:
            if pattern.id == pattern_id:
                return pattern
        raise ValidationError(f"no pattern with id {pattern_id} in catalog {self.name!r}")


def default_static_catalog() -> PatternCatalog:
    """The nine two-point layouts: the 3x3 slot product, ids row-major in a."""
    slots = (Slot.LEFT, Slot.CENTER, Slot.RIGHT)
    patterns = tuple(
        StaticPattern(id=1 + i * 3 + j, a_slot=sa, b_slot=sb)
        for i, sa in enumerate(slots)
        for j, sb in enumerate(slots)
    )
    return PatternCatalog(name="static-default", speed_set=DEFAULT_SPEED_SET, static=patterns)


def default_slippage_catalog() -> PatternCatalog:
    """Five sweep layouts; patterns 2 and 3 pair unequal speeds."""
    ltr, rtl = Direction.LEFT_TO_RIGHT, Direction.RIGHT_TO_LEFT
    patterns = (
        SlippagePattern(1, EffectorSweep(SPEED_SLOW, ltr), EffectorSweep(SPEED_SLOW, ltr)),
        SlippagePattern(2, EffectorSweep(SPEED_SLOW, ltr), EffectorSweep(SPEED_FAST, ltr)),
        SlippagePattern(3, EffectorSweep(SPEED_FAST, ltr), EffectorSweep(SPEED_SLOW, ltr)),
        SlippagePattern(4, EffectorSweep(SPEED_MIDDLE, ltr), EffectorSweep(SPEED_MIDDLE, ltr)),
        SlippagePattern(5, EffectorSweep(SPEED_FAST, rtl), EffectorSweep(SPEED_FAST, rtl)),
    )
    return PatternCatalog(
        name="slippage-default", speed_set=DEFAULT_SPEED_SET, slippage=patterns
    )


# --- catalog files -----------------------------------------------------------

_TOP_KEYS = {"name", "speed_set_mm_s", "static", "slippage"}
_STATIC_KEYS = {"id", "a_slot", "b_slot", "press_mm", "hold_s"}
_SLIP_KEYS = {"id", "a", "b", "span_mm"}
_SWEEP_KEYS = {"speed", "dir"}

_SLOT_NAMES = {s.value: s for s in Slot}
_DIR_NAMES = {d.value: d for d in Direction}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _parse_slot(value, where: str) -> Slot:
    if value not in _SLOT_NAMES:
        raise ValidationError(f"{where}: slot {value!r} not one of {sorted(_SLOT_NAMES)}")
    return _SLOT_NAMES[value]


def _parse_sweep(obj, where: str) -> EffectorSweep:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be an object")
    _reject_unknown(obj, _SWEEP_KEYS, where)
    try:
        direction = obj["dir"]
        speed = float(obj["speed"])
    except KeyError as exc:
        raise ValidationError(f"{where} missing key {exc}") from exc
    if direction not in _DIR_NAMES:
        raise ValidationError(f"{where}: dir {direction!r} not one of {sorted(_DIR_NAMES)}")
    return EffectorSweep(speed=speed, direction=_DIR_NAMES[direction])


def load_catalog(data: str | bytes) -> PatternCatalog:
    """Parse and validate a catalog file."""
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("catalog root must be an object")
    _reject_unknown(obj, _TOP_KEYS, "catalog")
    if "speed_set_mm_s" not in obj:
        raise ValidationError("catalog missing 'speed_set_mm_s'")
    speed_set = tuple(float(v) for v in obj["speed_set_mm_s"])
    static = []
    for i, entry in enumerate(obj.get("static", [])):
        where = f"static[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(entry, _STATIC_KEYS, where)
        try:
            static.append(
                StaticPattern(
                    id=int(entry["id"]),
                    a_slot=_parse_slot(entry["a_slot"], where),
                    b_slot=_parse_slot(entry["b_slot"], where),
                    press_mm=float(entry.get("press_mm", DEFAULT_PRESS_MM)),
                    hold_s=float(entry.get("hold_s", DEFAULT_HOLD_S)),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"{where} missing key {exc}") from exc
    slippage = []
    for i, entry in enumerate(obj.get("slippage", [])):
        where = f"slippage[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(entry, _SLIP_KEYS, where)
        try:
            slippage.append(
                SlippagePattern(
                    id=int(entry["id"]),
                    a=_parse_sweep(entry["a"], f"{where}.a"),
                    b=_parse_sweep(entry["b"], f"{where}.b"),
                    span_mm=float(entry.get("span_mm", DEFAULT_SPAN_MM)),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"{where} missing key {exc}") from exc
    return PatternCatalog(
        name=str(obj.get("name", "catalog")),
        speed_set=speed_set,
        static=tuple(static),
        slippage=tuple(slippage),
    )


def catalog_to_json(catalog: PatternCatalog) -> str:
    """Serialize a catalog byte-stably in the documented schema."""
    obj: dict = {"name": catalog.name, "speed_set_mm_s": list(catalog.speed_set)}
    if catalog.static:
        obj["static"] = [
            {
                "id": p.id,
                "a_slot": p.a_slot.value,
                "b_slot": p.b_slot.value,
                "press_mm": p.press_mm,
                "hold_s": p.hold_s,
            }
            for p in catalog.static
        ]
    if catalog.slippage:
        obj["slippage"] = [
            {
                "id": p.id,
                "a": {"speed": p.a.speed, "dir": p.a.direction.value},
                "b": {"speed": p.b.speed, "dir": p.b.direction.value},
                "span_mm": p.span_mm,
            }
            for p in catalog.slippage
        ]
    return json.dumps(obj, indent=2) + "\n"


def builtin_catalog(name: str) -> PatternCatalog:
    """Load one of the catalogs shipped as package data ('static' or 'slippage')."""
    filename = {"static": "static_default.json", "slippage": "slippage_default.json"}.get(name)
    if filename is None:
        raise ValidationError(f"no builtin catalog named {name!r}")
    data = resources.files("fivebar_haptics.data").joinpath(filename).read_bytes()
    return load_catalog(data)


# --- trajectories -------------------------------------------------------------

@dataclass(frozen=True)
class TrajectorySample:
    """One fixed-rate sample: time (s), lateral position (mm), press depth (mm)."""

    t: float
    x: float
    depth: float


@dataclass(frozen=True)
class Trajectory:
    """Synchronized per-effector sample streams at one control rate."""

    rate_hz: float
    a: tuple[TrajectorySample, ...]
    b: tuple[TrajectorySample, ...]

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValidationError("control rate must be positive")
        if len(self.a) != len(self.b):
            raise ValidationError("effector streams must share one clock")
        period = 1.0 / self.rate_hz
        for stream in (self.a, self.b):
            for prev, cur in zip(stream, stream[1:]):
                if not cur.t > prev.t:
                    raise ValidationError("timestamps must be strictly increasing")
                if abs((cur.t - prev.t) - period) > 1e-9:
                    raise ValidationError("timestamps must be uniformly spaced")
        for sa, sb in zip(self.a, self.b):
            if abs(sa.t - sb.t) > 1e-12:
                raise ValidationError("effector streams must share timestamps")


@dataclass(frozen=True)
class ScheduleEntry:
    """Joint command for one tick: (a_left, a_right, b_left, b_right) degrees."""

    t: float
    angles: tuple[float, float, float, float]


@dataclass(frozen=True)
class JointSchedule:
    rate_hz: float
    entries: tuple[ScheduleEntry, ...]


def static_targets(pattern: StaticPattern, cal: DeviceCalibration) -> list[EffectorTarget]:
    """Slot positions of a static pattern as effector targets."""
    if pattern.press_mm > cal.press_depth_max + 1e-9:
        raise OutOfRange(
            f"press {pattern.press_mm:g} mm exceeds maximum {cal.press_depth_max:g} mm"
        )
    return [
        EffectorTarget(Effector.A, pattern.a_slot.x(cal.lateral_range), pattern.press_mm),
        EffectorTarget(Effector.B, pattern.b_slot.x(cal.lateral_range), pattern.press_mm),
    ]


def static_trajectory(
    pattern: StaticPattern, cal: DeviceCalibration, rate: float = DEFAULT_RATE_HZ
) -> Trajectory:
    """Constant-target hold sampled at the control rate (hold*rate samples)."""
    targets = static_targets(pattern, cal)
    count = int(round(pattern.hold_s * rate))
    samples = {}
    for target in targets:
        samples[target.effector] = tuple(
            TrajectorySample(t=k / rate, x=target.x, depth=target.press) for k in range(count)
        )
    return Trajectory(rate_hz=rate, a=samples[Effector.A], b=samples[Effector.B])


def slippage_trajectory(
    pattern: SlippagePattern, cal: DeviceCalibration, rate: float = DEFAULT_RATE_HZ
) -> Trajectory:
    """Constant-speed sweeps at contact depth, both effectors starting together.

    The trajectory runs until the slower effector finishes; an effector that
    finishes early holds its end position.
    """
    if rate <= 0:
        raise ValidationError("control rate must be positive")
    if pattern.span_mm > 2.0 * cal.lateral_range + 1e-9:
        raise OutOfRange(
            f"span {pattern.span_mm:g} mm exceeds sweep window "
            f"{2 * cal.lateral_range:g} mm"
        )
    span = pattern.span_mm
    longest = max(span / pattern.a.speed, span / pattern.b.speed)
    ticks = int(math.ceil(longest * rate - 1e-9))
    streams = {}
    for effector, sweep in ((Effector.A, pattern.a), (Effector.B, pattern.b)):
        x0 = -sweep.direction.sign * span / 2.0
        stream = []
        for k in range(ticks + 1):
            t = k / rate
            dist = min(sweep.speed * t, span)
            stream.append(TrajectorySample(t=t, x=x0 + sweep.direction.sign * dist, depth=0.0))
        streams[effector] = tuple(stream)
    return Trajectory(rate_hz=rate, a=streams[Effector.A], b=streams[Effector.B])


def compile_schedule(
    traj: Trajectory,
    cfg: DeviceConfig,
    cal: DeviceCalibration,
    lead_s: float = DEFAULT_LEAD_S,
) -> JointSchedule:
    """Per-sample IK of both effector streams, wrapped in hover lead-in/out.

    The body keeps the trajectory's own clock; the lead-in occupies
    negative time and the lead-out extends past the last sample, each a
    linear task-space ramp from/to the hover depth at the entry/exit x.
    Errors carry the failing sample index and effector.
    """
    rate = traj.rate_hz
    period = 1.0 / rate
    n_lead = int(round(lead_s * rate))
    hover_depth = -cfg.hover_gap

    def resolve(effector: Effector, x: float, depth: float, index) -> JointAngles:
        geom = cfg.geometry(effector)
        if abs(x) > cal.lateral_range + 1e-9 or depth > cal.press_depth_max + 1e-9:
            raise OutOfRange(
                f"sample {index} effector {effector.value}: ({x:g} mm, press {depth:g} mm) "
                "outside calibrated ranges"
            )
        try:
            angles, _branch = solve_pose(geom, (x, -(cal.h + depth)), cfg.elbows, cfg.margins)
        except (Unreachable, NearSingular) as exc:
            exc.args = (f"sample {index} effector {effector.value}: {exc}",)
            raise
        return angles

    def entry_at(t: float, pose_a: tuple[float, float], pose_b: tuple[float, float], index):
        a = resolve(Effector.A, pose_a[0], pose_a[1], index)
        b = resolve(Effector.B, pose_b[0], pose_b[1], index)
        return ScheduleEntry(
            t=t, angles=(a.alpha_left, a.alpha_right, b.alpha_left, b.alpha_right)
        )

    entries: list[ScheduleEntry] = []
    if not traj.a:
        # degenerate empty trajectory: hold hover for the lead-in/out window
        for k in range(2 * n_lead):
            t = -lead_s + k * period
            entries.append(entry_at(t, (0.0, hover_depth), (0.0, hover_depth), "lead"))
        return JointSchedule(rate_hz=rate, entries=tuple(entries))

    first_a, first_b = traj.a[0], traj.b[0]
    last_a, last_b = traj.a[-1], traj.b[-1]
    for k in range(n_lead):
        frac = k / n_lead
        t = -lead_s + k * period
        pose_a = (first_a.x, hover_depth + frac * (first_a.depth - hover_depth))
        pose_b = (first_b.x, hover_depth + frac * (first_b.depth - hover_depth))
        entries.append(entry_at(t, pose_a, pose_b, "lead-in"))
    for index, (sa, sb) in enumerate(zip(traj.a, traj.b)):
        entries.append(entry_at(sa.t, (sa.x, sa.depth), (sb.x, sb.depth), index))
    for j in range(1, n_lead + 1):
        frac = j / n_lead
        t = last_a.t + j * period
        pose_a = (last_a.x, last_a.depth + frac * (hover_depth - last_a.depth))
        pose_b = (last_b.x, last_b.depth + frac * (hover_depth - last_b.depth))
        entries.append(entry_at(t, pose_a, pose_b, "lead-out"))
    return JointSchedule(rate_hz=rate, entries=tuple(entries))
