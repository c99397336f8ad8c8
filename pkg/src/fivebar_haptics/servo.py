"""Servo pulse mapping, the ASCII wire protocol, and schedule playback.

Wire protocol, one command per line:

    P <channel> <pulse_us>\n   set channel 0..3 to the given pulse width
    H\n                        home all channels
    S\n                        stop / relax all channels

Playback is best-effort wall-clock scheduling with jitter accounting; the
loopback transport plus the virtual clock make test runs deterministic.
"""

from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable, Protocol

from .errors import (
    AngleOutOfRange,
    InvalidChannel,
    ParseError,
    PulseOutOfRange,
    TransportError,
)

__all__ = [
    "ServoSpec",
    "WireFrame",
    "PlaybackReport",
    "PlaybackTick",
    "Transport",
    "LoopbackTransport",
    "SerialTransport",
    "Clock",
    "VirtualClock",
    "MonotonicClock",
    "HOME_FRAME",
    "STOP_FRAME",
    "WIRE_PULSE_MIN",
    "WIRE_PULSE_MAX",
    "CHANNELS",
    "default_servo_map",
    "angle_to_pulse",
    "servo_angle",
    "encode_frame",
    "decode_frame",
    "play",
]

CHANNELS = range(4)
# a pulse cannot exceed one 50 Hz frame period
WIRE_PULSE_MIN = 1
WIRE_PULSE_MAX = 20000

HOME_FRAME = b"H\n"
STOP_FRAME = b"S\n"

_FRAME_RE = re.compile(rb"^P ([0-9]) ([0-9]{1,5})\n$")

WireFrame = bytes


@dataclass(frozen=True)
class ServoSpec:
    """One servo channel's pulse map and mounting.

    The horn angle is theta = direction * (180 - alpha) + mount_offset,
    where alpha is the linkage's interior joint angle; theta maps linearly
    from [angle_min, angle_max] onto [pulse_min, pulse_max].
    ``stall_torque_nm`` records the actuator's torque rating for force
    queries (0.6 kg-cm at g = 9.80665 by default).
    """

    channel: int
    pulse_min: float = 600.0
    pulse_max: float = 2400.0
    angle_min: float = 0.0
    angle_max: float = 180.0
    mount_offset: float = 0.0
    direction: int = 1
    stall_torque_nm: float = 0.0588

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise InvalidChannel(f"channel {self.channel} outside 0..3")
        if not self.pulse_min < self.pulse_max:
            raise ValueError("pulse_min must be below pulse_max")
        if not self.angle_min < self.angle_max:
            raise ValueError("angle_min must be below angle_max")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")


def default_servo_map() -> tuple[ServoSpec, ServoSpec, ServoSpec, ServoSpec]:
    """Specs for channels (a-left, a-right, b-left, b-right)."""
    return tuple(ServoSpec(channel=c) for c in CHANNELS)


def servo_angle(spec: ServoSpec, alpha: float) -> float:
    """Horn angle theta in degrees for an interior joint angle alpha."""
    return spec.direction * (180.0 - alpha) + spec.mount_offset


def angle_to_pulse(spec: ServoSpec, alpha: float) -> int:
    """Pulse width in microseconds for an interior joint angle, or AngleOutOfRange."""
    theta = servo_angle(spec, alpha)
    if not spec.angle_min <= theta <= spec.angle_max:
        raise AngleOutOfRange(
            f"channel {spec.channel}: horn angle {theta:.3f} deg outside "
            f"[{spec.angle_min:g}, {spec.angle_max:g}]"
        )
    span = spec.angle_max - spec.angle_min
    pulse = spec.pulse_min + (theta - spec.angle_min) / span * (spec.pulse_max - spec.pulse_min)
    return int(round(pulse))


def encode_frame(channel: int, pulse: int) -> WireFrame:
    if not isinstance(channel, int) or channel not in CHANNELS:
        raise InvalidChannel(f"channel {channel!r} outside 0..3")
    if not isinstance(pulse, int) or not WIRE_PULSE_MIN <= pulse <= WIRE_PULSE_MAX:
        raise PulseOutOfRange(
            f"pulse {pulse!r} outside [{WIRE_PULSE_MIN}, {WIRE_PULSE_MAX}] us"
        )
    return f"P {channel} {pulse}\n".encode("ascii")


def decode_frame(frame: bytes) -> tuple[int, int]:
    match = _FRAME_RE.match(frame)
    if match is None:
        raise ParseError(f"malformed wire frame {frame!r}")
    channel, pulse = int(match.group(1)), int(match.group(2))
    if channel not in CHANNELS:
        raise InvalidChannel(f"channel {channel} outside 0..3")
    if not WIRE_PULSE_MIN <= pulse <= WIRE_PULSE_MAX:
        raise PulseOutOfRange(f"pulse {pulse} outside [{WIRE_PULSE_MIN}, {WIRE_PULSE_MAX}] us")
    return channel, pulse


# --- transports --------------------------------------------------------------

class Transport(Protocol):
    def write(self, data: bytes) -> None: ...
    def close(self) -> None: ...


class LoopbackTransport:
    """Captures every written byte; the stand-in for hardware in tests."""

    def __init__(self):
        self.captured = bytearray()
        self.closed = False

    def write(self, data: bytes) -> None:
        if self.closed:
            raise TransportError("loopback transport is closed")
        self.captured.extend(data)

    def close(self) -> None:
        self.closed = True

    @property
    def data(self) -> bytes:
        return bytes(self.captured)

    def frames(self) -> list[bytes]:
        return [line + b"\n" for line in self.data.split(b"\n") if line]


class SerialTransport:
    """Byte transport over a character device or plain file.

    When the path is a tty the line is configured raw at the requested baud
    (termios); otherwise bytes are appended to the file, which doubles as a
    capture mechanism.
    """

    def __init__(self, path: str, baud: int = 115200):
        self.path = path
        flags = os.O_RDWR | os.O_NOCTTY if os.path.exists(path) else os.O_RDWR | os.O_CREAT
        try:
            self._fd = os.open(path, flags)
        except OSError as exc:
            raise TransportError(f"cannot open {path}: {exc}") from exc
        if os.isatty(self._fd):
            self._configure_tty(baud)

    def _configure_tty(self, baud: int) -> None:
        import termios

        rate = getattr(termios, f"B{baud}", None)
        if rate is None:
            raise TransportError(f"unsupported baud rate {baud}")
        attrs = termios.tcgetattr(self._fd)
        attrs[0] = 0                      # iflag
        attrs[1] = 0                      # oflag
        attrs[2] = termios.CS8 | termios.CREAD | termios.CLOCAL
        attrs[3] = 0                      # lflag
        attrs[4] = rate
        attrs[5] = rate
        termios.tcsetattr(self._fd, termios.TCSANOW, attrs)

    def write(self, data: bytes) -> None:
        try:
            os.write(self._fd, data)
        except OSError as exc:
            raise TransportError(f"write to {self.path} failed: {exc}") from exc

    def close(self) -> None:
        try:
            os.close(self._fd)
        except OSError:
            pass


# --- clocks ------------------------------------------------------------------

class Clock(Protocol):
    def now(self) -> float: ...
    def sleep_until(self, t: float) -> None: ...


class VirtualClock:
    """Deterministic clock that jumps instead of sleeping."""

    def __init__(self, start: float = 0.0):
        self._t = start

    def now(self) -> float:
        return self._t

    def sleep_until(self, t: float) -> None:
        if t > self._t:
            self._t = t


class MonotonicClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep_until(self, t: float) -> None:
        delay = t - time.monotonic()
        if delay > 0:
            time.sleep(delay)


# --- playback ----------------------------------------------------------------

@dataclass(frozen=True)
class PlaybackReport:
    frames_sent: int
    duration: float
    max_jitter: float
    underruns: int
    cancelled: bool = False

    def __post_init__(self):
        if self.frames_sent < 0 or self.underruns < 0:
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class PlaybackTick:
    """Progress event published once per schedule entry."""

    index: int
    t: float
    angles: tuple[float, float, float, float]


def play(
    schedule,
    specs,
    transport: Transport,
    rate: float | None = None,
    *,
    clock: Clock | None = None,
    cancel: threading.Event | None = None,
    observer: Callable[[PlaybackTick], None] | None = None,
) -> PlaybackReport:
    """Stream a joint schedule as wire frames at its own clocking.

    Every angle is mapped to a pulse before the first byte is written, so
    AngleOutOfRange never leaves a partial stream; a failing transport
    raises TransportError carrying the partial report.  Cancellation is
    checked once per tick, between ticks, so a tick is always all four
    channel frames or nothing.
    """
    entries = list(schedule.entries)
    if rate is None:
        rate = schedule.rate_hz
    if rate <= 0:
        raise ValueError("rate must be positive")
    period = 1.0 / rate
    if clock is None:
        clock = MonotonicClock()
    if len(specs) != 4:
        raise ValueError("playback needs exactly four servo specs")
    frames: list[tuple[bytes, ...]] = []
    for entry in entries:
        frames.append(
            tuple(
                encode_frame(spec.channel, angle_to_pulse(spec, alpha))
                for spec, alpha in zip(specs, entry.angles)
            )
        )
    start = clock.now()
    t0 = entries[0].t if entries else 0.0
    frames_sent = 0
    max_jitter = 0.0
    underruns = 0
    cancelled = False
    for index, (entry, tick_frames) in enumerate(zip(entries, frames)):
        if cancel is not None and cancel.is_set():
            cancelled = True
            break
        target = start + (entry.t - t0)
        clock.sleep_until(target)
        jitter = max(clock.now() - target, 0.0)
        max_jitter = max(max_jitter, jitter)
        if jitter > period:
            underruns += 1
        try:
            # one write per tick keeps the four channel frames atomic
            transport.write(b"".join(tick_frames))
        except TransportError as exc:
            report = PlaybackReport(
                frames_sent=frames_sent,
                duration=clock.now() - start,
                max_jitter=max_jitter,
                underruns=underruns,
                cancelled=True,
            )
            raise TransportError(str(exc), report=report) from exc
        frames_sent += 4
        if observer is not None:
            observer(PlaybackTick(index=index, t=entry.t, angles=entry.angles))
    return PlaybackReport(
        frames_sent=frames_sent,
        duration=clock.now() - start,
        max_jitter=max_jitter,
        underruns=underruns,
        cancelled=cancelled,
    )
