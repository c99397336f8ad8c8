"""Trial scheduling, session handling, confusion matrices, and reports.

The paper-anchored matrices are synthesized from their quoted diagonal
rates; everything off-diagonal is constructed, so only diagonal-derived
quantities are asserted against quoted numbers.
"""

import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fivebar_haptics.errors import (
    AlreadyAnswered,
    CatalogMismatch,
    EmptyCatalog,
    EmptyRow,
    IncompleteSession,
    InvalidAnswer,
    ParseError,
    UnknownTrial,
    ValidationError,
)
from fivebar_haptics.experiment import (
    SessionLogWriter,
    TrialSession,
    build_report,
    build_schedule,
    confusion_matrix,
    per_subject_correctness,
    read_log,
    recognition_rates,
    record_response,
    render_report_text,
    report_to_dict,
)
from fivebar_haptics.patterns import default_slippage_catalog, default_static_catalog

STATIC = default_static_catalog()
SLIPPAGE = default_slippage_catalog()


# --- schedules -------------------------------------------------------------------

def test_schedule_static_design():
    schedule = build_schedule(STATIC, repetitions=5, seed=123)
    assert len(schedule.trials) == 45
    counts = Counter(t.pattern_id for t in schedule.trials)
    assert counts == {pid: 5 for pid in range(1, 10)}


def test_schedule_slippage_design():
    schedule = build_schedule(SLIPPAGE, repetitions=5, seed=9)
    assert len(schedule.trials) == 25
    counts = Counter(t.pattern_id for t in schedule.trials)
    assert counts == {pid: 5 for pid in range(1, 6)}


def test_schedule_deterministic_per_seed():
    one = build_schedule(STATIC, repetitions=5, seed=77)
    two = build_schedule(STATIC, repetitions=5, seed=77)
    other = build_schedule(STATIC, repetitions=5, seed=78)
    assert one == two
    assert one != other


def test_schedule_known_permutation_frozen():
    # Philox-keyed permutations are stable across platforms; freeze a prefix
    schedule = build_schedule(STATIC, repetitions=5, seed=2024)
    head = [t.pattern_id for t in schedule.trials[:10]]
    assert head == [2, 5, 5, 5, 6, 2, 8, 2, 1, 8]


def test_schedule_single_trial():
    from fivebar_haptics.patterns import PatternCatalog, Slot, StaticPattern

    catalog = PatternCatalog(
        name="one", speed_set=(43.0,), static=(StaticPattern(1, Slot.CENTER, Slot.CENTER),)
    )
    schedule = build_schedule(catalog, repetitions=1, seed=0)
    assert len(schedule.trials) == 1


def test_schedule_empty_catalog():
    from fivebar_haptics.patterns import PatternCatalog

    with pytest.raises(EmptyCatalog):
        build_schedule(PatternCatalog(name="none", speed_set=(43.0,)), repetitions=5, seed=0)


def test_schedule_bad_repetitions():
    with pytest.raises(ValidationError):
        build_schedule(STATIC, repetitions=0, seed=0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), repetitions=st.integers(1, 6))
def test_schedule_multiset_property(seed, repetitions):
    schedule = build_schedule(STATIC, repetitions=repetitions, seed=seed)
    counts = Counter(t.pattern_id for t in schedule.trials)
    assert counts == {pid: repetitions for pid in STATIC.pattern_ids}
    assert [t.trial_id for t in schedule.trials] == list(range(1, 9 * repetitions + 1))


# --- sessions ---------------------------------------------------------------------

def _session(subject="s1", catalog=STATIC, reps=5, seed=1):
    return TrialSession(
        subject_id=subject,
        catalog_name=catalog.name,
        schedule=build_schedule(catalog, repetitions=reps, seed=seed),
    )


def test_record_response_contract():
    session = _session()
    record_response(session, 1, session.schedule.trials[0].pattern_id)
    assert session.responses[1] == session.schedule.trials[0].pattern_id
    with pytest.raises(AlreadyAnswered):
        record_response(session, 1, 2)
    with pytest.raises(UnknownTrial):
        record_response(session, 999, 1)
    with pytest.raises(InvalidAnswer):
        record_response(session, 2, 0)


def _answer_all(session, wrong=()):
    """Answer every trial correctly except (trial_id -> wrong answer) pairs."""
    wrong = dict(wrong)
    for trial in session.schedule.trials:
        answer = wrong.get(trial.trial_id, trial.pattern_id)
        record_response(session, trial.trial_id, answer)
    return session


def test_confusion_matrix_all_correct_ten_subjects():
    sessions = [_answer_all(_session(subject=f"s{i}", seed=i)) for i in range(10)]
    cm = confusion_matrix(sessions)
    assert cm.counts.shape == (9, 9)
    assert (np.diag(cm.counts) == 50).all()
    assert cm.total == 450
    assert (cm.row_totals == 50).all()


def test_confusion_matrix_single_confusion():
    session = _session()
    nine_trial = next(t for t in session.schedule.trials if t.pattern_id == 9)
    _answer_all(session, wrong={nine_trial.trial_id: 8})
    cm = confusion_matrix([session])
    assert cm.counts[8, 7] == 1  # presented 9, answered 8
    assert cm.counts[8, 8] == 4


def test_confusion_matrix_requires_complete_sessions():
    session = _session()
    record_response(session, 1, session.schedule.trials[0].pattern_id)
    with pytest.raises(IncompleteSession):
        confusion_matrix([session])


def test_confusion_matrix_requires_one_catalog():
    static = _answer_all(_session())
    dynamic = _answer_all(_session(catalog=SLIPPAGE))
    with pytest.raises(CatalogMismatch):
        confusion_matrix([static, dynamic])


def _paper_matched_static_sessions():
    """Ten 45-trial sessions whose diagonal matches the quoted static rates.

    Quoted: patterns 1, 4, 5, 9 at 98%, 98%, 100%, 68% and a 90% mean;
    the unquoted five diagonals are chosen to sum to the 90% mean
    (49+49+50+34 + 45+45+45+44+44 = 405 = 0.9 * 450).
    """
    correct_of_50 = {1: 49, 2: 45, 3: 45, 4: 49, 5: 50, 6: 45, 7: 44, 8: 44, 9: 34}
    wrong_answer = {pid: (8 if pid == 9 else (pid % 9) + 1) for pid in correct_of_50}
    sessions = []
    remaining_wrong = {pid: 50 - c for pid, c in correct_of_50.items()}
    for i in range(10):
        session = _session(subject=f"subject-{i}", seed=100 + i)
        wrong = {}
        per_pattern_marked = Counter()
        for trial in session.schedule.trials:
            pid = trial.pattern_id
            # at most two wrong answers per subject per pattern spreads the
            # 16 misses of pattern 9 across the ten subjects
            if remaining_wrong[pid] > 0 and per_pattern_marked[pid] < 2:
                wrong[trial.trial_id] = wrong_answer[pid]
                per_pattern_marked[pid] += 1
                remaining_wrong[pid] -= 1
        sessions.append(_answer_all(session, wrong=wrong))
    assert all(v == 0 for v in remaining_wrong.values())
    return sessions


def test_recognition_rates_paper_matched_static():
    cm = confusion_matrix(_paper_matched_static_sessions())
    rates, mean = recognition_rates(cm)
    assert rates[1] == pytest.approx(0.98)
    assert rates[4] == pytest.approx(0.98)
    assert rates[5] == pytest.approx(1.00)
    assert rates[9] == pytest.approx(0.68)
    assert mean == pytest.approx(0.90, abs=0.005)


def _paper_matched_slippage_sessions():
    """Eleven 25-trial sessions matching the quoted dynamic rates.

    Row totals of 55 quantize the rates: 52/55 = 94.5% is the closest
    representable value to the quoted 94%, 49/55 = 89.1% to 89%, and
    36/55 = 65.5% to 65%; 43 + 43 for the unquoted patterns lands the
    mean at 223/275 = 81.1%.
    """
    correct_of_55 = {1: 43, 2: 52, 3: 49, 4: 43, 5: 36}
    sessions = []
    remaining_wrong = {pid: 55 - c for pid, c in correct_of_55.items()}
    for i in range(11):
        session = _session(subject=f"subject-{i}", catalog=SLIPPAGE, seed=200 + i)
        wrong = {}
        for trial in session.schedule.trials:
            pid = trial.pattern_id
            if remaining_wrong[pid] > 0:
                wrong[trial.trial_id] = (pid % 5) + 1
                remaining_wrong[pid] -= 1
        sessions.append(_answer_all(session, wrong=wrong))
    assert all(v == 0 for v in remaining_wrong.values())
    return sessions


def test_recognition_rates_paper_matched_slippage():
    cm = confusion_matrix(_paper_matched_slippage_sessions())
    rates, mean = recognition_rates(cm)
    assert rates[2] == pytest.approx(0.94, abs=0.01)
    assert rates[3] == pytest.approx(0.89, abs=0.01)
    assert rates[5] == pytest.approx(0.65, abs=0.01)
    assert mean == pytest.approx(0.81, abs=0.005)


def test_recognition_rates_identity():
    sessions = [_answer_all(_session())]
    rates, mean = recognition_rates(confusion_matrix(sessions))
    assert all(rate == 1.0 for rate in rates.values())
    assert mean == 1.0


def test_recognition_rates_empty_row():
    from fivebar_haptics.experiment import ConfusionMatrix

    cm = ConfusionMatrix(pattern_ids=(1, 2), counts=np.array([[3, 0], [0, 0]]))
    with pytest.raises(EmptyRow):
        recognition_rates(cm)


def test_conservation_property():
    sessions = _paper_matched_static_sessions()
    cm = confusion_matrix(sessions)
    assert cm.total == 10 * 9 * 5


def test_anova_over_paper_matched_design():
    sessions = _paper_matched_static_sessions()
    groups = per_subject_correctness(sessions)
    assert len(groups) == 9
    assert all(len(g) == 10 for g in groups)
    from fivebar_haptics.stats import anova_one_way

    result = anova_one_way(groups)
    assert (result.df1, result.df2) == (8, 81)
    dynamic = per_subject_correctness(_paper_matched_slippage_sessions())
    result = anova_one_way(dynamic)
    assert (result.df1, result.df2) == (4, 50)


# --- session log -----------------------------------------------------------------

def test_log_roundtrip():
    buffer = io.StringIO()
    writer = SessionLogWriter(buffer)
    session = _session()
    writer.schedule(session, wall_time=1000.0)
    for trial in session.schedule.trials:
        writer.stimulus_delivered(trial.trial_id, trial.pattern_id, wall_time=1000.0)
        record_response(session, trial.trial_id, trial.pattern_id)
        writer.response(trial.trial_id, trial.pattern_id, wall_time=1001.0)
    restored = read_log(buffer.getvalue())
    assert len(restored) == 1
    assert restored[0].subject_id == session.subject_id
    assert restored[0].responses == session.responses
    assert restored[0].schedule == session.schedule


def test_log_rejects_garbage():
    with pytest.raises(ParseError, match="line 1"):
        read_log("not json\n")
    with pytest.raises(ParseError, match="before any schedule"):
        read_log('{"event":"response","t":0,"trial_id":1,"answer":1}\n')
    with pytest.raises(ParseError, match="unknown event"):
        read_log('{"event":"mystery","t":0}\n')


def test_report_rendering_stable():
    sessions = _paper_matched_static_sessions()
    report = build_report(sessions)
    text_one = render_report_text(report)
    text_two = render_report_text(build_report(sessions))
    assert text_one == text_two
    assert "mean recognition rate: 90.00%" in text_one
    assert "F(8,81)" in text_one
    payload = report_to_dict(report)
    assert payload["mean_rate"] == pytest.approx(0.90, abs=0.005)
    assert payload["anova"]["df1"] == 8


def test_report_single_subject_skips_anova():
    report = build_report([_answer_all(_session())])
    assert report.anova is None
    assert "not applicable" in render_report_text(report)
