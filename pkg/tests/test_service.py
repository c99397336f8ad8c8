"""HTTP service tests against the simulated device."""

import json

import pytest
from fastapi.testclient import TestClient

from fivebar_haptics.service import ServiceHub, create_app


@pytest.fixture()
def hub(tmp_path):
    return ServiceHub(log_dir=tmp_path)


@pytest.fixture()
def client(hub):
    return TestClient(create_app(hub))


def test_idle_state_is_hover(client):
    state = client.get("/state").json()
    assert state["playback"] is None
    assert state["session"] is None
    assert state["calibration"]["h_mm"] == pytest.approx(22.0)
    for pose in state["poses"].values():
        assert pose["contact"] == "hover"
        assert pose["y_mm"] == pytest.approx(-19.0, abs=1e-9)


def test_calibration_endpoint(client):
    response = client.post("/calibration", json={"thickness_mm": 17.0, "width_mm": 14.0})
    assert response.status_code == 200
    assert response.json()["h_mm"] == pytest.approx(23.0)
    assert client.get("/state").json()["calibration"]["lateral_range_mm"] == pytest.approx(7.0)


def test_calibration_validation(client):
    assert client.post("/calibration", json={"thickness_mm": 15.0}).status_code == 422
    response = client.post("/calibration", json={"thickness_mm": 300.0, "width_mm": 16.0})
    assert response.status_code == 422
    assert response.json()["error"] == "OutOfRange"


def test_pattern_play(client):
    response = client.post("/pattern/play", json={"id": 1, "catalog": "static"})
    assert response.status_code == 200
    body = response.json()
    assert body["frames_sent"] == 720
    assert body["pattern_id"] == 1
    state = client.get("/state").json()
    assert state["playback"] is None  # simulation playback is synchronous


def test_pattern_play_unknown_id(client):
    response = client.post("/pattern/play", json={"id": 99})
    assert response.status_code == 422
    assert response.json()["error"] == "ValidationError"


def test_full_experiment_flow(client, hub, tmp_path):
    start = client.post(
        "/experiment/start",
        json={"catalog": "static", "repetitions": 2, "seed": 5, "subject": "svc"},
    )
    assert start.status_code == 200
    body = start.json()
    assert body["trial_count"] == 18
    current = body["current_trial"]
    assert current == {"trial_id": 1, "index": 0, "total": 18}

    # a second session while one is active conflicts
    conflict = client.post(
        "/experiment/start",
        json={"catalog": "static", "repetitions": 2, "seed": 5, "subject": "other"},
    )
    assert conflict.status_code == 409

    # premature report
    assert client.get("/experiment/report").status_code == 422

    state = client.get("/state").json()
    schedule_patterns = {}
    log_text = (tmp_path / body["log_path"].split("/")[-1]).read_text()
    for line in log_text.splitlines():
        record = json.loads(line)
        if record["event"] == "schedule":
            schedule_patterns = dict(record["trials"])
    assert state["session"]["answered"] == 0

    trial_id = 1
    while trial_id is not None:
        answer = schedule_patterns[trial_id]
        response = client.post(
            "/experiment/answer", json={"trial_id": trial_id, "answer": answer}
        )
        assert response.status_code == 200
        next_trial = response.json()["next_trial"]
        trial_id = None if next_trial is None else next_trial["trial_id"]

    state = client.get("/state").json()
    assert state["session"]["complete"] is True
    report = client.get("/experiment/report")
    assert report.status_code == 200
    assert "mean recognition rate: 100.00%" in report.text
    payload = client.get("/experiment/report", params={"format": "json"}).json()
    assert payload["mean_rate"] == 1.0


def test_answer_conflicts_and_validation(client):
    client.post(
        "/experiment/start",
        json={"catalog": "slippage", "repetitions": 1, "seed": 0, "subject": "s"},
    )
    state = client.get("/state").json()
    trial_id = state["session"]["current_trial"]["trial_id"]
    log_path = state["session"]["log_path"]
    pattern_id = None
    for line in open(log_path):
        record = json.loads(line)
        if record["event"] == "schedule":
            pattern_id = dict(record["trials"])[trial_id]
    ok = client.post("/experiment/answer", json={"trial_id": trial_id, "answer": pattern_id})
    assert ok.status_code == 200
    again = client.post("/experiment/answer", json={"trial_id": trial_id, "answer": pattern_id})
    assert again.status_code == 409
    assert again.json()["error"] == "AlreadyAnswered"
    future = client.post("/experiment/answer", json={"trial_id": 99, "answer": 1})
    assert future.status_code == 422
    bad_answer = client.post(
        "/experiment/answer",
        json={"trial_id": trial_id + 1, "answer": 77},
    )
    assert bad_answer.status_code == 422
    assert bad_answer.json()["error"] == "InvalidAnswer"


def test_no_answer_without_session(client):
    response = client.post("/experiment/answer", json={"trial_id": 1, "answer": 1})
    assert response.status_code == 422


def test_playback_updates_pose_state(client, hub):
    client.post("/pattern/play", json={"id": 5, "catalog": "static"})
    # pattern 5 is (center, center); playback ends back at hover
    state = client.get("/state").json()
    for pose in state["poses"].values():
        assert pose["contact"] == "hover"
        assert pose["x_mm"] == pytest.approx(0.0, abs=1e-9)


def test_hub_events_cover_experiment_lifecycle(hub):
    subscriber = hub.subscribe()
    first = subscriber.get_nowait()
    assert first["type"] == "state"
    hub.start_experiment("static", 1, 3, "events")
    types = []
    while not subscriber.empty():
        types.append(subscriber.get_nowait()["type"])
    assert "trial_started" in types
    assert "playback_finished" in types
    state = hub.state_snapshot()
    trial_id = state["session"]["current_trial"]["trial_id"]
    pattern_id = next(
        t.pattern_id
        for t in hub._experiment.session.schedule.trials
        if t.trial_id == trial_id
    )
    hub.answer(trial_id, pattern_id)
    types = []
    while not subscriber.empty():
        types.append(subscriber.get_nowait()["type"])
    assert "response_recorded" in types
    hub.unsubscribe(subscriber)


def test_event_stream_endpoint_emits_snapshot(hub):
    # drive the endpoint's generator directly: TestClient cannot close an
    # infinite server-sent-events stream
    import asyncio

    app = create_app(hub)
    route = next(r for r in app.routes if getattr(r, "path", None) == "/events")
    response = route.endpoint()
    assert response.media_type == "text/event-stream"

    async def first_chunk():
        agen = response.body_iterator
        try:
            return await agen.__anext__()
        finally:
            await agen.aclose()

    first = asyncio.run(first_chunk())
    assert first.startswith(b"data: ")
    event = json.loads(first[len(b"data: ") :])
    assert event["type"] == "state"
    assert "poses" in event
    assert hub._subscribers == []  # closing the stream unsubscribes


def test_pose_events_throttled_to_20hz(hub):
    subscriber = hub.subscribe()
    subscriber.get_nowait()
    hub.play_pattern(1, "static")
    pose_events = []
    while not subscriber.empty():
        event = subscriber.get_nowait()
        if event["type"] == "pose":
            pose_events.append(event)
    # 180 ticks at 50 Hz virtual time collapse to wall-clock instants; the
    # 20 Hz wall throttle must cut nearly all of them
    assert len(pose_events) <= 4
    hub.unsubscribe(subscriber)


def test_catalog_endpoints(client):
    from fivebar_haptics.patterns import catalog_to_json, default_static_catalog, load_catalog

    response = client.get("/catalog/static")
    assert response.status_code == 200
    assert response.text == catalog_to_json(default_static_catalog())
    assert client.get("/catalog/nope").status_code == 422
    assert client.get("/catalog/custom").status_code == 422  # nothing uploaded yet

    custom = catalog_to_json(default_static_catalog()).replace("static-default", "my-set")
    upload = client.post("/catalog", content=custom)
    assert upload.status_code == 200
    assert upload.json() == {"name": "my-set", "static": 9, "slippage": 0}
    fetched = client.get("/catalog/custom")
    assert load_catalog(fetched.text).name == "my-set"
    play = client.post("/pattern/play", json={"id": 1, "catalog": "custom"})
    assert play.status_code == 200

    bad = client.post("/catalog", content="{broken")
    assert bad.status_code == 422
    assert bad.json()["error"] == "ParseError"
