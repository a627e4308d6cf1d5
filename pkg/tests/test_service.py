import json
import threading

import pytest
from fastapi.testclient import TestClient

from keyfitts.charact import CharacterizationSession, SelectionEvent, ensure_target, export_log, record_selection
from keyfitts.fitts import generic_model, model_to_json, predict_mt
from keyfitts.hexgeom import angle_deg, build_grid, distance_px
from keyfitts.service import create_app

GRID = build_grid(9, 9, 130)
MODEL = generic_model(130)


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data")
    with TestClient(app) as c:
        yield c


def scripted_time(cursor, target):
    d = distance_px(cursor, target)
    ang = None if d == 0 else angle_deg(cursor, target)
    return max(predict_mt(MODEL, ang, d), 1e-3)


def drive_session(client, seed, max_clicks=None):
    """Flawless scripted clicking: always hit, deterministic timing."""
    created = client.post("/sessions", json={"seed": seed}).json()
    session_id = created["session_id"]
    target = created["first_target"]
    cursor = GRID.at(4, 4)
    t = 0.0
    clicks = 0
    while target is not None:
        key = GRID.at(target["row"], target["col"])
        t += scripted_time(cursor, key)
        resp = client.post(
            f"/sessions/{session_id}/clicks",
            json={"clicked_key": {"row": key.row, "col": key.col}, "t": t},
        )
        assert resp.status_code == 200, resp.text
        body = resp.json()
        assert body["success"] is True
        cursor = key
        target = body["next_target"]
        clicks += 1
        if max_clicks and clicks >= max_clicks:
            return session_id, cursor, t, target
    return session_id, cursor, t, None


def library_session_with_same_policy(seed):
    session = CharacterizationSession(GRID, seed)
    cursor = session.last_key
    t = 0.0
    while True:
        target = ensure_target(session)
        if target is None:
            return session
        t += scripted_time(cursor, target)
        record_selection(
            session,
            SelectionEvent(
                sequence_no=len(session.events) + 1,
                demand=session.current_demand,
                target_key=target,
                origin_key=session.last_key,
                click_time=t,
                movement_time=t - session.last_success_time,
                success=True,
                clicked_key=target,
            ),
        )
        cursor = target


class TestSessions:
    def test_healthz(self, client):
        assert client.get("/healthz").status_code == 200

    def test_scripted_session_yields_full_model(self, client):
        session_id, _, _, target = drive_session(client, seed=1)
        assert target is None
        resp = client.get(f"/sessions/{session_id}/model")
        assert resp.status_code == 200
        doc = resp.json()
        assert len(doc["bins"]) == 16
        assert all(b["fitted"] for b in doc["bins"])

    def test_model_409_until_complete(self, client):
        created = client.post("/sessions", json={"seed": 2}).json()
        assert client.get(f"/sessions/{created['session_id']}/model").status_code == 409

    def test_click_after_completion_409(self, client):
        session_id, cursor, t, _ = drive_session(client, seed=3)
        resp = client.post(
            f"/sessions/{session_id}/clicks",
            json={"clicked_key": {"row": 0, "col": 0}, "t": t + 1.0},
        )
        assert resp.status_code == 409

    def test_unknown_session_404(self, client):
        assert client.post("/sessions/nope/clicks", json={"clicked_key": {"row": 0, "col": 0}, "t": 1}).status_code == 404
        assert client.get("/sessions/nope/model").status_code == 404

    def test_malformed_body_400(self, client):
        created = client.post("/sessions", json={"seed": 4}).json()
        sid = created["session_id"]
        assert client.post(f"/sessions/{sid}/clicks", json={"t": 1.0}).status_code == 400
        assert client.post(f"/sessions/{sid}/clicks", json={"clicked_key": {"row": 99, "col": 0}, "t": 1.0}).status_code == 400
        assert client.post("/sessions", json={"seed": "abc"}).status_code == 400

    def test_miss_keeps_target_active(self, client):
        created = client.post("/sessions", json={"seed": 5}).json()
        sid = created["session_id"]
        target = created["first_target"]
        wrong = {"row": (target["row"] + 1) % 9, "col": target["col"]}
        if wrong == {"row": target["row"], "col": target["col"]}:
            wrong = {"row": target["row"], "col": (target["col"] + 1) % 9}
        resp = client.post(f"/sessions/{sid}/clicks", json={"clicked_key": wrong, "t": 0.8}).json()
        assert resp["success"] is False
        assert resp["next_target"] == target  # unlimited retries on the same target

    def test_idempotent_click_resend(self, client):
        created = client.post("/sessions", json={"seed": 6}).json()
        sid = created["session_id"]
        target = created["first_target"]
        payload = {"clicked_key": {"row": target["row"], "col": target["col"]}, "t": 0.9, "seq": 1}
        first = client.post(f"/sessions/{sid}/clicks", json=payload).json()
        second = client.post(f"/sessions/{sid}/clicks", json=payload).json()
        assert first == second

    def test_pause_logged(self, client, tmp_path):
        created = client.post("/sessions", json={"seed": 7}).json()
        sid = created["session_id"]
        assert client.post(f"/sessions/{sid}/pause", json={"t0": 0.1, "t1": 0.4}).status_code == 204
        log = (tmp_path / "data" / "sessions" / f"{sid}.ndjson").read_text()
        assert '"type": "pause"' in log


class TestDurabilityAndDeterminism:
    def test_ndjson_matches_library_export_byte_for_byte(self, client, tmp_path):
        session_id, _, _, _ = drive_session(client, seed=11)
        on_disk = (tmp_path / "data" / "sessions" / f"{session_id}.ndjson").read_text()
        reference = export_log(library_session_with_same_policy(11))
        assert on_disk == reference

    def test_crash_recovery_reconstructs_state(self, tmp_path):
        data_dir = tmp_path / "data"
        app1 = create_app(data_dir)
        with TestClient(app1) as c1:
            session_id, cursor, t, target = drive_session(c1, seed=12, max_clicks=60)
        assert target is not None
        # new process: fresh app over the same directory
        app2 = create_app(data_dir)
        with TestClient(app2) as c2:
            while target is not None:
                key = GRID.at(target["row"], target["col"])
                t += scripted_time(cursor, key)
                body = c2.post(
                    f"/sessions/{session_id}/clicks",
                    json={"clicked_key": {"row": key.row, "col": key.col}, "t": t},
                ).json()
                cursor = key
                target = body["next_target"]
            resumed_model = c2.get(f"/sessions/{session_id}/model").json()
        reference = library_session_with_same_policy(12)
        assert json.dumps(resumed_model, sort_keys=True) == model_to_json(reference.fit_model())

    def test_parallel_sessions_do_not_interleave(self, client, tmp_path):
        ids = {}
        errors = []

        def work(seed):
            try:
                sid, _, _, target = drive_session(client, seed=seed)
                ids[seed] = (sid, target)
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        threads = [threading.Thread(target=work, args=(seed,)) for seed in range(20, 30)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert not errors
        for seed, (sid, target) in ids.items():
            assert target is None
            on_disk = (tmp_path / "data" / "sessions" / f"{sid}.ndjson").read_text()
            assert on_disk == export_log(library_session_with_same_policy(seed))


class TestLayoutsAndTrials:
    def test_layout_generation_and_fetch(self, client):
        resp = client.post("/layouts", json={"kind": "qwerty"})
        assert resp.status_code == 200
        layout_id = resp.json()["layout_id"]
        fetched = client.get(f"/layouts/{layout_id}").json()
        assert fetched["kind"] == "qwerty"
        assert len(fetched["keys"]) == 27

    def test_personalized_layout_requires_complete_session(self, client):
        created = client.post("/sessions", json={"seed": 31}).json()
        resp = client.post(
            "/layouts",
            json={"kind": "personalized", "session_id": created["session_id"], "seed": 1},
        )
        assert resp.status_code == 409

    def test_personalized_layout_from_session(self, client):
        session_id, _, _, _ = drive_session(client, seed=32)
        resp = client.post(
            "/layouts",
            json={
                "kind": "personalized",
                "session_id": session_id,
                "seed": 2,
                "corpus_ref": "fixture10",
            },
        )
        assert resp.status_code == 200
        assert resp.json()["layout"]["kind"] == "personalized"

    def test_trial_flow(self, client):
        layout_id = client.post("/layouts", json={"kind": "qwerty"}).json()["layout_id"]
        trial = client.post("/trials", json={"layout_id": layout_id, "prompt": "the cat"}).json()
        trial_id = trial["trial_id"]
        assert trial["prompt"] == "THE CAT"
        t = 0.0
        for i, ch in enumerate("THE CAT"):
            t += 1.0
            selected = ch if i != 1 else "J"  # one wrong key, no retry
            resp = client.post(
                f"/trials/{trial_id}/keystrokes",
                json={"char_target": ch, "char_selected": selected, "t": t},
            )
            assert resp.status_code == 204
        report = client.post(f"/trials/{trial_id}/finish").json()
        assert report["n_keystrokes"] == 7
        assert report["accuracy_pct"] == pytest.approx(100 * 6 / 7)
        assert report["wpm"] == pytest.approx((7 / (7 / 60)) / 5)
        assert client.post(f"/trials/{trial_id}/finish").status_code == 409

    def test_unknown_layout_and_trial_404(self, client):
        assert client.get("/layouts/nope").status_code == 404
        assert client.post("/trials", json={"layout_id": "nope", "prompt": "HI"}).status_code == 404
        assert client.post("/trials/nope/finish").status_code == 404
