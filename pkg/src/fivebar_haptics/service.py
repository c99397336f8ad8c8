"""Local HTTP service exposing device state, pattern playback, and
experiment flow.

One ``ServiceHub`` owns all mutable state behind a lock; endpoint handlers
only call hub methods.  In simulation mode (the default) playback runs on
a loopback transport with a virtual clock, so stimuli complete instantly
and the whole experiment pipeline works with no hardware.  Subscribers
receive JSON events (``state``, ``pose``, ``playback_finished``,
``trial_started``, ``response_recorded``, ``session_complete``) over a
server-sent-events stream; pose updates are throttled to 20 Hz.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from .device import (
    DEFAULT_CONFIG,
    DeviceCalibration,
    DeviceConfig,
    DevicePose,
    Effector,
    FingerProfile,
    calibrate,
    contact_state,
    device_targets,
)
from .errors import (
    ConflictError,
    DomainError,
    PlaybackActive,
    SessionActive,
    ValidationError,
)
from .experiment import (
    SessionLogWriter,
    TrialSession,
    build_report,
    build_schedule,
    record_response,
    render_report_text,
    report_to_dict,
)
from .kinematics import Branch, JointAngles, forward_kinematics
from .patterns import (
    DEFAULT_RATE_HZ,
    PatternCatalog,
    SlippagePattern,
    StaticPattern,
    builtin_catalog,
    catalog_to_json,
    compile_schedule,
    load_catalog,
    slippage_trajectory,
    static_trajectory,
)
from .servo import LoopbackTransport, PlaybackTick, VirtualClock, play

__all__ = ["ServiceHub", "create_app", "DEFAULT_PORT"]

DEFAULT_PORT = 7430
POSE_EVENT_MIN_INTERVAL = 0.05  # 20 Hz cap


@dataclass
class _PlaybackState:
    pattern_id: int
    catalog: str
    ticks_total: int
    ticks_done: int = 0


@dataclass
class _ExperimentState:
    session: TrialSession
    catalog: PatternCatalog
    log_path: Path
    log_writer: SessionLogWriter
    log_stream: object
    current_index: int = 0
    delivered: set[int] = field(default_factory=set)

    @property
    def current_trial(self):
        trials = self.session.schedule.trials
        if self.current_index < len(trials):
            return trials[self.current_index]
        return None


class ServiceHub:
    """Single authoritative owner of device and experiment state."""

    def __init__(
        self,
        config: DeviceConfig = DEFAULT_CONFIG,
        finger: FingerProfile = FingerProfile(thickness=15.0, width=16.0),
        log_dir: str | Path = ".",
        simulate: bool = True,
        rate_hz: float = DEFAULT_RATE_HZ,
    ):
        self._lock = threading.RLock()
        self.config = config
        self.calibration: DeviceCalibration = calibrate(finger, config)
        self.log_dir = Path(log_dir)
        self.simulate = simulate
        self.rate_hz = rate_hz
        self._playback: _PlaybackState | None = None
        self._experiment: _ExperimentState | None = None
        self._custom_catalog: PatternCatalog | None = None
        self._session_counter = 0
        self._subscribers: list[queue.Queue] = []
        self._last_pose_emit = 0.0
        self._last_transport: LoopbackTransport | None = None
        hover = device_targets(self.calibration, self.config, [])
        self._angles = hover

    # --- events ---------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
            q.put({"type": "state", **self.state_snapshot()})
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _publish(self, event: dict) -> None:
        for q in list(self._subscribers):
            q.put(event)

    # --- state ----------------------------------------------------------

    def _pose_payload(self) -> dict:
        payload = {}
        for effector, angles in ((Effector.A, self._angles.a), (Effector.B, self._angles.b)):
            geom = self.config.geometry(effector)
            pose = forward_kinematics(geom, angles, Branch.UPPER)
            payload[effector.value] = {
                "x_mm": pose.x,
                "y_mm": pose.y,
                "alpha_left_deg": angles.alpha_left,
                "alpha_right_deg": angles.alpha_right,
                "contact": contact_state(self.calibration, pose).value,
            }
        return payload

    def state_snapshot(self) -> dict:
        with self._lock:
            playback = None
            if self._playback is not None:
                playback = {
                    "pattern_id": self._playback.pattern_id,
                    "catalog": self._playback.catalog,
                    "ticks_done": self._playback.ticks_done,
                    "ticks_total": self._playback.ticks_total,
                }
            session = None
            exp = self._experiment
            if exp is not None:
                current = exp.current_trial
                session = {
                    "subject": exp.session.subject_id,
                    "catalog": exp.session.catalog_name,
                    "trial_count": len(exp.session.schedule.trials),
                    "answered": len(exp.session.responses),
                    "complete": exp.session.complete,
                    "log_path": str(exp.log_path),
                    "current_trial": None
                    if current is None
                    else {"trial_id": current.trial_id, "index": exp.current_index},
                }
            return {
                "calibration": {
                    "h_mm": self.calibration.h,
                    "lateral_range_mm": self.calibration.lateral_range,
                    "press_depth_max_mm": self.calibration.press_depth_max,
                },
                "geometry": {
                    "l1_mm": self.config.linkage_a.l1,
                    "l2_mm": self.config.linkage_a.l2,
                    "d_mm": self.config.linkage_a.d,
                    "spacer_mm": self.config.spacer,
                    "hover_gap_mm": self.config.hover_gap,
                },
                "poses": self._pose_payload(),
                "playback": playback,
                "session": session,
            }

    # --- calibration ------------------------------------------------------

    def set_calibration(self, finger: FingerProfile) -> dict:
        with self._lock:
            if self._playback is not None:
                raise PlaybackActive("cannot recalibrate during playback")
            if self._experiment is not None and not self._experiment.session.complete:
                raise SessionActive("cannot recalibrate during an experiment session")
            self.calibration = calibrate(finger, self.config)
            self._angles = device_targets(self.calibration, self.config, [])
            snapshot = self.state_snapshot()
        self._publish({"type": "state", **snapshot})
        return snapshot["calibration"]

    # --- catalogs ---------------------------------------------------------

    def _catalog(self, name: str) -> PatternCatalog:
        if name == "custom":
            if self._custom_catalog is None:
                raise ValidationError("no custom catalog has been uploaded")
            return self._custom_catalog
        if name not in ("static", "slippage"):
            raise ValidationError(
                f"unknown catalog {name!r}; expected 'static', 'slippage', or 'custom'"
            )
        return builtin_catalog(name)

    def catalog_json(self, name: str) -> str:
        return catalog_to_json(self._catalog(name))

    def set_custom_catalog(self, text: str) -> dict:
        catalog = load_catalog(text)
        with self._lock:
            self._custom_catalog = catalog
        return {
            "name": catalog.name,
            "static": len(catalog.static),
            "slippage": len(catalog.slippage),
        }

    # --- playback ---------------------------------------------------------

    def play_pattern(self, pattern_id: int, catalog_name: str = "static") -> dict:
        catalog = self._catalog(catalog_name)
        pattern = catalog.get(pattern_id)
        return self._deliver(pattern, catalog_name)

    def _deliver(self, pattern, catalog_name: str) -> dict:
        """Compile and play one pattern; simulation playback is synchronous."""
        with self._lock:
            if self._playback is not None:
                raise PlaybackActive("a playback is already running")
            if isinstance(pattern, StaticPattern):
                traj = static_trajectory(pattern, self.calibration, self.rate_hz)
            elif isinstance(pattern, SlippagePattern):
                traj = slippage_trajectory(pattern, self.calibration, self.rate_hz)
            else:
                raise ValidationError(f"cannot play pattern of type {type(pattern).__name__}")
            schedule = compile_schedule(traj, self.config, self.calibration)
            transport = LoopbackTransport()
            self._last_transport = transport
            self._playback = _PlaybackState(
                pattern_id=pattern.id,
                catalog=catalog_name,
                ticks_total=len(schedule.entries),
            )
        try:
            report = play(
                schedule,
                self.config.servo_map,
                transport,
                clock=VirtualClock() if self.simulate else None,
                observer=self._on_tick,
            )
        finally:
            with self._lock:
                self._playback = None
        self._publish({"type": "playback_finished", "pattern_id": pattern.id})
        return {
            "pattern_id": pattern.id,
            "catalog": catalog_name,
            "frames_sent": report.frames_sent,
            "duration_s": report.duration,
            "max_jitter_s": report.max_jitter,
            "underruns": report.underruns,
        }

    def _on_tick(self, tick: PlaybackTick) -> None:
        with self._lock:
            if self._playback is not None:
                self._playback.ticks_done = tick.index + 1
            self._angles = DevicePose(
                a=JointAngles(tick.angles[0], tick.angles[1]),
                b=JointAngles(tick.angles[2], tick.angles[3]),
            )
            now = time.monotonic()
            if now - self._last_pose_emit < POSE_EVENT_MIN_INTERVAL:
                return
            self._last_pose_emit = now
            payload = self._pose_payload()
        self._publish({"type": "pose", "poses": payload, "t": tick.t})

    # --- experiment --------------------------------------------------------

    def start_experiment(
        self, catalog_name: str, repetitions: int, seed: int, subject: str
    ) -> dict:
        catalog = self._catalog(catalog_name)
        with self._lock:
            if self._experiment is not None and not self._experiment.session.complete:
                raise SessionActive("an experiment session is already in progress")
            schedule = build_schedule(catalog, repetitions, seed)
            session = TrialSession(
                subject_id=subject, catalog_name=catalog.name, schedule=schedule
            )
            self._session_counter += 1
            self.log_dir.mkdir(parents=True, exist_ok=True)
            log_path = self.log_dir / (
                f"session-{self._session_counter:03d}-{subject}-{catalog_name}-seed{seed}.jsonl"
            )
            stream = open(log_path, "w", encoding="utf-8")
            writer = SessionLogWriter(stream)
            writer.schedule(session)
            self._experiment = _ExperimentState(
                session=session,
                catalog=catalog,
                log_path=log_path,
                log_writer=writer,
                log_stream=stream,
            )
        self._deliver_current()
        return {
            "subject": subject,
            "catalog": catalog.name,
            "trial_count": len(schedule.trials),
            "log_path": str(log_path),
            "current_trial": self._current_trial_payload(),
        }

    def _current_trial_payload(self):
        with self._lock:
            exp = self._experiment
            if exp is None or exp.current_trial is None:
                return None
            return {
                "trial_id": exp.current_trial.trial_id,
                "index": exp.current_index,
                "total": len(exp.session.schedule.trials),
            }

    def _deliver_current(self) -> None:
        with self._lock:
            exp = self._experiment
            if exp is None:
                return
            trial = exp.current_trial
            if trial is None or trial.trial_id in exp.delivered:
                return
            pattern = exp.catalog.get(trial.pattern_id)
            catalog_name = "static" if exp.catalog.static else "slippage"
        self._deliver(pattern, catalog_name)
        with self._lock:
            exp.delivered.add(trial.trial_id)
            exp.log_writer.stimulus_delivered(trial.trial_id, trial.pattern_id)
        self._publish(
            {
                "type": "trial_started",
                "trial_id": trial.trial_id,
                "index": self._experiment.current_index,
                "total": len(exp.session.schedule.trials),
            }
        )

    def answer(self, trial_id: int, answer: int) -> dict:
        with self._lock:
            exp = self._experiment
            if exp is None:
                raise ValidationError("no experiment session is active")
            current = exp.current_trial
            if current is None:
                raise ValidationError("the session is already complete")
            if trial_id != current.trial_id and trial_id not in exp.session.responses:
                raise ValidationError(
                    f"trial {trial_id} has not been delivered yet "
                    f"(current trial is {current.trial_id})"
                )
            record_response(exp.session, trial_id, answer)
            exp.log_writer.response(trial_id, answer)
            exp.current_index += 1
            complete = exp.session.complete
            if complete:
                exp.log_stream.flush()
        self._publish(
            {"type": "response_recorded", "trial_id": trial_id, "complete": complete}
        )
        if complete:
            self._publish({"type": "session_complete"})
        else:
            self._deliver_current()
        return {
            "recorded": True,
            "complete": complete,
            "next_trial": self._current_trial_payload(),
        }

    def report(self) -> tuple[str, dict]:
        with self._lock:
            exp = self._experiment
            if exp is None:
                raise ValidationError("no experiment session to report on")
            if not exp.session.complete:
                raise ValidationError("the session is not complete yet")
            report = build_report([exp.session])
            return render_report_text(report), report_to_dict(report)


def create_app(hub: ServiceHub) -> FastAPI:
    """FastAPI application over one hub."""
    app = FastAPI(title="fivebar-haptics service", version="0.1.0")
    app.state.hub = hub

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, exc: DomainError):
        status = 409 if isinstance(exc, ConflictError) else 422
        return JSONResponse(
            status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    @app.get("/state")
    def get_state():
        return hub.state_snapshot()

    @app.post("/calibration")
    def post_calibration(body: dict):
        try:
            finger = FingerProfile(
                thickness=float(body["thickness_mm"]), width=float(body["width_mm"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad calibration request: {exc}") from exc
        return hub.set_calibration(finger)

    @app.post("/pattern/play")
    def post_pattern_play(body: dict):
        try:
            pattern_id = int(body["id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad playback request: {exc}") from exc
        catalog = body.get("catalog", "static")
        return hub.play_pattern(pattern_id, catalog)

    @app.post("/experiment/start")
    def post_experiment_start(body: dict):
        try:
            catalog = str(body["catalog"])
            repetitions = int(body.get("repetitions", 5))
            seed = int(body.get("seed", 0))
            subject = str(body["subject"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad experiment request: {exc}") from exc
        return hub.start_experiment(catalog, repetitions, seed, subject)

    @app.post("/experiment/answer")
    def post_experiment_answer(body: dict):
        try:
            trial_id = int(body["trial_id"])
            answer = int(body["answer"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad answer request: {exc}") from exc
        return hub.answer(trial_id, answer)

    @app.get("/experiment/report")
    def get_experiment_report(format: str = "text"):
        text, payload = hub.report()
        if format == "json":
            return JSONResponse(content=payload)
        return PlainTextResponse(content=text)

    @app.get("/catalog/{name}")
    def get_catalog(name: str):
        return Response(content=hub.catalog_json(name), media_type="application/json")

    @app.post("/catalog")
    async def post_catalog(request: Request):
        body = await request.body()
        return hub.set_custom_catalog(body.decode("utf-8"))

    @app.get("/events")
    def get_events():
        subscriber = hub.subscribe()

        def stream():
            try:
                while True:
                    try:
                        event = subscriber.get(timeout=0.5)
                    except queue.Empty:
                        yield b": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(event)}\n\n".encode()
            finally:
                hub.unsubscribe(subscriber)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
