"""Perception experiment sessions, logs, and derived statistics.

A session presents every catalog pattern ``repetitions`` times in seeded
random order and records one answer per trial.  Logs are append-only JSON
lines (events ``schedule``, ``stimulus_delivered``, ``response``) so a
crashed run loses nothing already on disk.  Reports aggregate one or more
complete sessions into a confusion matrix, per-pattern recognition rates,
and a one-way ANOVA over per-subject correctness.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlreadyAnswered,
    CatalogMismatch,
    DegenerateData,
    EmptyCatalog,
    EmptyRow,
    IncompleteSession,
    InsufficientData,
    InvalidAnswer,
    ParseError,
    UnknownTrial,
    ValidationError,
)
from .stats import AnovaResult, anova_one_way

__all__ = [
    "Trial",
    "TrialSchedule",
    "TrialSession",
    "ConfusionMatrix",
    "ExperimentReport",
    "build_schedule",
    "record_response",
    "confusion_matrix",
    "recognition_rates",
    "per_subject_correctness",
    "SessionLogWriter",
    "read_log",
    "build_report",
    "render_report_text",
    "report_to_dict",
]


@dataclass(frozen=True)
class Trial:
    trial_id: int
    pattern_id: int


@dataclass(frozen=True)
class TrialSchedule:
    """Seeded random presentation order; every pattern appears
    ``repetitions`` times."""

    trials: tuple[Trial, ...]
    seed: int
    repetitions: int


def build_schedule(catalog, repetitions: int, seed: int) -> TrialSchedule:
    """Uniform seeded permutation of catalog ids * repetitions.

    The generator is Philox (counter-based, 64-bit keyed), so schedules
    reproduce across platforms for a given seed.
    """
    if repetitions < 1:
        raise ValidationError("repetitions must be at least 1")
    ids = list(catalog.pattern_ids)
    if not ids:
        raise EmptyCatalog(f"catalog {catalog.name!r} has no patterns")
    pool = np.repeat(ids, repetitions)
    rng = np.random.Generator(np.random.Philox(key=seed))
    order = rng.permutation(pool)
    trials = tuple(Trial(trial_id=i + 1, pattern_id=int(p)) for i, p in enumerate(order))
    return TrialSchedule(trials=trials, seed=seed, repetitions=repetitions)


@dataclass
class TrialSession:
    """One subject's run through a schedule (single-writer)."""

    subject_id: str
    catalog_name: str
    schedule: TrialSchedule
    responses: dict[int, int] = field(default_factory=dict)
    response_times: dict[int, float] = field(default_factory=dict)

    @property
    def pattern_ids(self) -> tuple[int, ...]:
        return tuple(sorted({t.pattern_id for t in self.schedule.trials}))

    def trial(self, trial_id: int) -> Trial:
        for trial in self.schedule.trials:
            if trial.trial_id == trial_id:
                return trial
        raise UnknownTrial(f"no trial {trial_id} in this session")

    def next_unanswered(self) -> Trial | None:
        for trial in self.schedule.trials:
            if trial.trial_id not in self.responses:
                return trial
        return None

    @property
    def complete(self) -> bool:
        return len(self.responses) == len(self.schedule.trials)


def record_response(
    session: TrialSession, trial_id: int, answer: int, t: float | None = None
) -> TrialSession:
    """Store one answer; rejects unknown trials, double answers, foreign ids."""
    trial = session.trial(trial_id)
    if trial.trial_id in session.responses:
        raise AlreadyAnswered(f"trial {trial_id} already answered")
    if answer not in session.pattern_ids:
        raise InvalidAnswer(
            f"answer {answer} is not a pattern id of catalog {session.catalog_name!r}"
        )
    session.responses[trial_id] = answer
    session.response_times[trial_id] = time.time() if t is None else t
    return session


@dataclass(frozen=True)
class ConfusionMatrix:
    """Presented-versus-answered counts; rows index presented patterns."""

    pattern_ids: tuple[int, ...]
    counts: np.ndarray  # shape (k, k)

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(sessions: list[TrialSession]) -> ConfusionMatrix:
    """Aggregate complete sessions sharing one catalog."""
    if not sessions:
        raise InsufficientData("no sessions to aggregate")
    catalog_names = {s.catalog_name for s in sessions}
    if len(catalog_names) > 1:
        raise CatalogMismatch(f"sessions span catalogs {sorted(catalog_names)}")
    ids = sessions[0].pattern_ids
    if any(s.pattern_ids != ids for s in sessions):
        raise CatalogMismatch("sessions disagree on the pattern id set")
    incomplete = [s.subject_id for s in sessions if not s.complete]
    if incomplete:
        raise IncompleteSession(f"unanswered trials for subject(s) {incomplete}")
    index = {pid: i for i, pid in enumerate(ids)}
    counts = np.zeros((len(ids), len(ids)), dtype=int)
    for session in sessions:
        for trial in session.schedule.trials:
            answer = session.responses[trial.trial_id]
            counts[index[trial.pattern_id], index[answer]] += 1
    return ConfusionMatrix(pattern_ids=ids, counts=counts)


def recognition_rates(cm: ConfusionMatrix) -> tuple[dict[int, float], float]:
    """Per-pattern diagonal rate and their unweighted mean."""
    totals = cm.row_totals
    for pid, total in zip(cm.pattern_ids, totals):
        if total == 0:
            raise EmptyRow(f"pattern {pid} was never presented")
    rates = {
        pid: float(cm.counts[i, i]) / float(totals[i]) for i, pid in enumerate(cm.pattern_ids)
    }
    return rates, float(np.mean(list(rates.values())))


def per_subject_correctness(sessions: list[TrialSession]) -> list[list[float]]:
    """One group per pattern of per-subject proportion-correct observations."""
    ids = sessions[0].pattern_ids
    groups: list[list[float]] = [[] for _ in ids]
    for session in sessions:
        shown: dict[int, int] = dict.fromkeys(ids, 0)
        correct: dict[int, int] = dict.fromkeys(ids, 0)
        for trial in session.schedule.trials:
            shown[trial.pattern_id] += 1
            if session.responses.get(trial.trial_id) == trial.pattern_id:
                correct[trial.pattern_id] += 1
        for i, pid in enumerate(ids):
            groups[i].append(correct[pid] / shown[pid])
    return groups


# --- session log ---------------------------------------------------------------

class SessionLogWriter:
    """Append-only JSON-lines event log for one or more sessions."""

    def __init__(self, stream: io.TextIOBase):
        self._stream = stream

    def _emit(self, record: dict) -> None:
        self._stream.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._stream.flush()

    def schedule(self, session: TrialSession, wall_time: float | None = None) -> None:
        self._emit(
            {
                "event": "schedule",
                "t": time.time() if wall_time is None else wall_time,
                "subject": session.subject_id,
                "catalog": session.catalog_name,
                "seed": session.schedule.seed,
                "repetitions": session.schedule.repetitions,
                "trials": [[t.trial_id, t.pattern_id] for t in session.schedule.trials],
            }
        )

    def stimulus_delivered(
        self, trial_id: int, pattern_id: int, wall_time: float | None = None
    ) -> None:
        self._emit(
            {
                "event": "stimulus_delivered",
                "t": time.time() if wall_time is None else wall_time,
                "trial_id": trial_id,
                "pattern_id": pattern_id,
            }
        )

    def response(self, trial_id: int, answer: int, wall_time: float | None = None) -> None:
        self._emit(
            {
                "event": "response",
                "t": time.time() if wall_time is None else wall_time,
                "trial_id": trial_id,
                "answer": answer,
            }
        )


def read_log(text: str) -> list[TrialSession]:
    """Rebuild sessions from a JSON-lines event log."""
    sessions: list[TrialSession] = []
    current: TrialSession | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: {exc.msg}") from exc
        event = record.get("event")
        if event == "schedule":
            trials = tuple(Trial(trial_id=t, pattern_id=p) for t, p in record["trials"])
            current = TrialSession(
                subject_id=record["subject"],
                catalog_name=record["catalog"],
                schedule=TrialSchedule(
                    trials=trials,
                    seed=record["seed"],
                    repetitions=record["repetitions"],
                ),
            )
            sessions.append(current)
        elif event == "response":
            if current is None:
                raise ParseError(f"line {lineno}: response before any schedule event")
            record_response(current, record["trial_id"], record["answer"], t=record["t"])
        elif event == "stimulus_delivered":
            if current is None:
                raise ParseError(f"line {lineno}: stimulus before any schedule event")
        else:
            raise ParseError(f"line {lineno}: unknown event {event!r}")
    return sessions


# --- reports --------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentReport:
    catalog_name: str
    subjects: tuple[str, ...]
    matrix: ConfusionMatrix
    rates: dict[int, float]
    mean_rate: float
    anova: AnovaResult | None
    anova_note: str | None


def build_report(sessions: list[TrialSession]) -> ExperimentReport:
    cm = confusion_matrix(sessions)
    rates, mean_rate = recognition_rates(cm)
    anova = None
    note = None
    try:
        anova = anova_one_way(per_subject_correctness(sessions))
    except InsufficientData:
        note = "not applicable (needs at least two subjects)"
    except DegenerateData:
        note = "not applicable (all observations identical)"
    return ExperimentReport(
        catalog_name=sessions[0].catalog_name,
        subjects=tuple(s.subject_id for s in sessions),
        matrix=cm,
        rates=rates,
        mean_rate=mean_rate,
        anova=anova,
        anova_note=note,
    )


def render_report_text(report: ExperimentReport) -> str:
    """Stable human-readable report; the CLI and the service share this."""
    cm = report.matrix
    ids = cm.pattern_ids
    width = max(4, *(len(str(int(c))) for c in cm.counts.flatten()))
    lines = [
        f"catalog: {report.catalog_name}",
        f"subjects: {len(report.subjects)}",
        f"trials: {cm.total}",
        "",
        "confusion matrix (rows = presented, columns = answered)",
        "     " + " ".join(f"{pid:>{width}}" for pid in ids),
    ]
    for i, pid in enumerate(ids):
        row = " ".join(f"{int(c):>{width}}" for c in cm.counts[i])
        lines.append(f"{pid:>4} {row}")
    lines.append("")
    lines.append("recognition rates")
    for pid in ids:
        lines.append(f"  pattern {pid}: {report.rates[pid] * 100:.1f}%")
    lines.append(f"mean recognition rate: {report.mean_rate * 100:.2f}%")
    lines.append("")
    if report.anova is not None:
        a = report.anova
        lines.append(
            f"one-way ANOVA over per-subject correctness: "
            f"F({a.df1},{a.df2}) = {a.f:.4g}, p = {a.p:.4g}"
        )
    else:
        lines.append(f"one-way ANOVA: {report.anova_note}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: ExperimentReport) -> dict:
    """Machine-readable report payload."""
    anova = None
    if report.anova is not None:
        a = report.anova
        anova = {
            "f": a.f,
            "df1": a.df1,
            "df2": a.df2,
            "p": a.p,
            "group_means": list(a.group_means),
        }
    return {
        "catalog": report.catalog_name,
        "subjects": list(report.subjects),
        "pattern_ids": list(report.matrix.pattern_ids),
        "matrix": report.matrix.counts.tolist(),
        "rates": {str(pid): rate for pid, rate in report.rates.items()},
        "mean_rate": report.mean_rate,
        "anova": anova,
        "anova_note": report.anova_note,
    }
