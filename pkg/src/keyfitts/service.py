"""Local HTTP service for live characterization, layout generation, trials.

State is flat files under a data directory: sessions/{id}.ndjson (append-only
event logs identical to the library export format), models/{id}.json,
layouts/{id}.json, trials/{id}.ndjson.  Every mutation is appended and
fsynced before the response goes out, so a crash never acknowledges a lost
click; restart recovery replays the log and re-issues the outstanding target
(the RNG draw sequence is a pure function of the event history, so the
re-issued target is identical).

Protocol decisions (next target, refinement, completion) run server-side
only; clients stay thin.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import charact, corpus, evaluation, fitts, hexgeom
from . import layout as layout_mod
from .charact import CharacterizationSession, Phase, SelectionEvent
from .evaluation import Keystroke, TranscriptionTrial

CAP = charact.MAX_PRESENTED


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _key_doc(key: hexgeom.KeyPosition | None) -> dict | None:
    if key is None:
        return None
    return {"row": key.row, "col": key.col, "cx": key.center_x, "cy": key.center_y}


class _Trial:
    def __init__(self, trial_id: str, layout_id: str, prompt: str):
        self.trial_id = trial_id
        self.layout_id = layout_id
        self.prompt = prompt
        self.keystrokes: list[dict] = []
        self.finished = False


class ServiceState:
    """Owns the data directory and in-memory caches with per-session locks."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        for sub in ("sessions", "models", "layouts", "trials"):
            (self.data_dir / sub).mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, CharacterizationSession] = {}
        self._trials: dict[str, _Trial] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._click_cache: dict[str, tuple[int, dict]] = {}
        self._global = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._global:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session_path(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / f"{session_id}.ndjson"

    def _append_durable(self, path: Path, line: str) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def create_session(self, seed: int, grid: hexgeom.HexGrid) -> tuple[str, CharacterizationSession]:
        session_id = uuid.uuid4().hex[:12]
        session = CharacterizationSession(grid, seed)
        with self.lock_for(session_id):
            header = charact.export_log(session).splitlines()[0]
            self._append_durable(self._session_path(session_id), header)
            charact.ensure_target(session)
            self._sessions[session_id] = session
        return session_id, session

    def get_session(self, session_id: str) -> CharacterizationSession:
        if session_id in self._sessions:
            return self._sessions[session_id]
        path = self._session_path(session_id)
        if not path.exists():
            raise ApiError(404, f"unknown session {session_id!r}")
        session = charact.import_log(path.read_text(encoding="utf-8"))
        charact.ensure_target(session)  # re-issue the outstanding target
        self._sessions[session_id] = session
        return session

    def persist_last_entry(self, session_id: str, session: CharacterizationSession) -> None:
        entry = session._log[-1]
        self._append_durable(self._session_path(session_id), json.dumps(entry, sort_keys=True))

    def layout_path(self, layout_id: str) -> Path:
        return self.data_dir / "layouts" / f"{layout_id}.json"

    def load_layout(self, layout_id: str) -> layout_mod.KeyboardLayout:
        path = self.layout_path(layout_id)
        if not path.exists():
            raise ApiError(404, f"unknown layout {layout_id!r}")
        return layout_mod.layout_from_json(path.read_text(encoding="utf-8"))

    def trial(self, trial_id: str) -> _Trial:
        trial = self._trials.get(trial_id)
        if trial is None:
            raise ApiError(404, f"unknown trial {trial_id!r}")
        return trial


def _progress(session: CharacterizationSession) -> dict:
    r2 = [None] * 16
    try:
        model = session.fit_model()
        r2 = [round(b.r_squared, 6) if b.fitted else None for b in model.bins]
    except ValueError:
        pass
    return {"presented": session.presented_count, "cap": CAP, "per_bin_r2": r2}


def _require(body: dict, field: str):
    if field not in body:
        raise ApiError(400, f"missing field {field!r}")
    return body[field]


def _load_corpus(state: ServiceState, corpus_ref: str) -> corpus.DigraphMatrix:
    if corpus_ref in ("eval500", "fixture10"):
        return corpus.ingest_phrases(corpus.bundled_phrases(corpus_ref))
    path = state.data_dir / "corpora" / f"{corpus_ref}.txt"
    if not path.exists():
        raise ApiError(404, f"unknown corpus {corpus_ref!r}")
    return corpus.ingest_phrases(corpus.load_phrase_file(path))


def create_app(data_dir: Path, frontend_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="keyfitts service")
    state = ServiceState(data_dir)
    app.state.store = state

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        detail = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in detail.get("loc", ())) or "body"
        return JSONResponse(status_code=400, content={"error": f"{field}: {detail.get('msg', 'invalid')}"})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: dict):
        seed = _require(body, "seed")
        if not isinstance(seed, int):
            raise ApiError(400, "seed: must be an integer")
        grid_doc = body.get("grid") or {"rows": 9, "cols": 9, "key_width_px": 130.0}
        try:
            grid = hexgeom.build_grid(grid_doc["rows"], grid_doc["cols"], grid_doc["key_width_px"])
        except (KeyError, ValueError) as exc:
            raise ApiError(400, f"grid: {exc}")
        session_id, session = state.create_session(seed, grid)
        return {
            "session_id": session_id,
            "first_target": _key_doc(session.current_target),
            "progress": _progress(session),
        }

    @app.post("/sessions/{session_id}/clicks")
    def post_click(session_id: str, body: dict):
        with state.lock_for(session_id):
            session = state.get_session(session_id)
            seq = body.get("seq")
            if seq is not None:
                cached = state._click_cache.get(session_id)
                if cached and cached[0] == seq:
                    return cached[1]
            if session.phase is Phase.COMPLETE:
                raise ApiError(409, "session already complete")
            clicked_doc = _require(body, "clicked_key")
            t = _require(body, "t")
            try:
                clicked = session.grid.at(clicked_doc["row"], clicked_doc["col"])
            except (KeyError, IndexError, TypeError) as exc:
                raise ApiError(400, f"clicked_key: {exc}")
            if not isinstance(t, (int, float)) or t <= session.last_click_time:
                raise ApiError(400, "t: click times must strictly increase")
            target = session.current_target
            if target is None:
                raise ApiError(409, "no outstanding target")
            event = SelectionEvent(
                sequence_no=len(session.events) + 1,
                demand=session.current_demand,
                target_key=target,
                origin_key=session.last_key,
                click_time=float(t),
                movement_time=float(t) - session.last_success_time,
                success=clicked == target,
                clicked_key=clicked,
            )
            try:
                charact.record_selection(session, event)
            except (ValueError, RuntimeError) as exc:
                raise ApiError(400, str(exc))
            state.persist_last_entry(session_id, session)
            next_target = session.current_target
            if event.success:
                next_target = charact.ensure_target(session)
            response = {
                "success": event.success,
                "next_target": _key_doc(next_target),
                "progress": _progress(session),
            }
            if seq is not None:
                state._click_cache[session_id] = (seq, response)
            return response

    @app.post("/sessions/{session_id}/pause", status_code=204)
    def post_pause(session_id: str, body: dict):
        with state.lock_for(session_id):
            session = state.get_session(session_id)
            t0, t1 = _require(body, "t0"), _require(body, "t1")
            try:
                charact.add_pause(session, float(t0), float(t1))
            except (TypeError, ValueError) as exc:
                raise ApiError(400, str(exc))
            state.persist_last_entry(session_id, session)
        return Response(status_code=204)

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str):
        with state.lock_for(session_id):
            session = state.get_session(session_id)
            if session.phase is not Phase.COMPLETE:
                raise ApiError(409, "session not complete")
            model = session.fit_model()
            text = fitts.model_to_json(model)
            path = state.data_dir / "models" / f"{session_id}.json"
            if not path.exists():
                path.write_text(text + "\n", encoding="utf-8")
            return json.loads(text)

    @app.post("/layouts")
    def post_layout(body: dict):
        kind = _require(body, "kind")
        if kind not in layout_mod.LAYOUT_KINDS:
            raise ApiError(400, f"kind: unknown layout kind {kind!r}")
        if kind == "qwerty":
            result = layout_mod.qwerty_layout(float(body.get("key_width_px", 130.0)))
        else:
            seed = _require(body, "seed")
            corpus_ref = body.get("corpus_ref", "eval500")
            digraphs = _load_corpus(state, corpus_ref)
            grid = hexgeom.build_grid(9, 9, 130.0)
            model = None
            if kind == "personalized":
                session_id = body.get("session_id")
                model_ref = body.get("model_ref")
                if session_id:
                    with state.lock_for(session_id):
                        session = state.get_session(session_id)
                        if session.phase is not Phase.COMPLETE:
                            raise ApiError(409, "session not complete")
                        model = session.fit_model()
                        grid = session.grid
                elif model_ref:
                    path = state.data_dir / "models" / f"{model_ref}.json"
                    if not path.exists():
                        raise ApiError(404, f"unknown model {model_ref!r}")
                    model = fitts.model_from_json(path.read_text(encoding="utf-8"))
                else:
                    raise ApiError(400, "personalized layout needs session_id or model_ref")
            try:
                result = layout_mod.generate_layout(
                    kind, model, digraphs, grid, seed=seed,
                )
            except ValueError as exc:
                raise ApiError(400, str(exc))
        layout_id = uuid.uuid4().hex[:12]
        state.layout_path(layout_id).write_text(
            layout_mod.layout_to_json(result) + "\n", encoding="utf-8"
        )
        return {"layout_id": layout_id, "layout": json.loads(layout_mod.layout_to_json(result))}

    @app.get("/layouts/{layout_id}")
    def get_layout(layout_id: str):
        path = state.layout_path(layout_id)
        if not path.exists():
            raise ApiError(404, f"unknown layout {layout_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.post("/trials")
    def post_trial(body: dict):
        layout_id = _require(body, "layout_id")
        prompt = corpus.normalize_line(_require(body, "prompt"))
        state.load_layout(layout_id)  # 404 on unknown layout
        if not prompt:
            raise ApiError(400, "prompt: no in-alphabet characters")
        trial_id = uuid.uuid4().hex[:12]
        trial = _Trial(trial_id, layout_id, prompt)
        state._trials[trial_id] = trial
        state._append_durable(
            state.data_dir / "trials" / f"{trial_id}.ndjson",
            json.dumps({"type": "trial", "layout_id": layout_id, "prompt": prompt}, sort_keys=True),
        )
        return {"trial_id": trial_id, "prompt": prompt}

    @app.post("/trials/{trial_id}/keystrokes", status_code=204)
    def post_keystroke(trial_id: str, body: dict):
        trial = state.trial(trial_id)
        if trial.finished:
            raise ApiError(409, "trial already finished")
        entry = {
            "type": "keystroke",
            "char_target": _require(body, "char_target"),
            "char_selected": _require(body, "char_selected"),
            "t": _require(body, "t"),
        }
        for field in ("char_target", "char_selected"):
            if entry[field] not in corpus.ALPHABET:
                raise ApiError(400, f"{field}: not in the 27-character alphabet")
        if trial.keystrokes and entry["t"] <= trial.keystrokes[-1]["t"]:
            raise ApiError(400, "t: keystroke times must strictly increase")
        trial.keystrokes.append(entry)
        state._append_durable(
            state.data_dir / "trials" / f"{trial_id}.ndjson", json.dumps(entry, sort_keys=True)
        )
        return Response(status_code=204)

    @app.post("/trials/{trial_id}/finish")
    def finish_trial(trial_id: str):
        trial = state.trial(trial_id)
        if trial.finished:
            raise ApiError(409, "trial already finished")
        if not trial.keystrokes:
            raise ApiError(400, "trial has no keystrokes")
        layout = state.load_layout(trial.layout_id)
        cursor = evaluation.start_key(layout)
        keystrokes = []
        prev_t = 0.0
        for entry in trial.keystrokes:
            target_pos = layout.assignment[entry["char_target"]]
            keystrokes.append(
                Keystroke(
                    target_char=entry["char_target"],
                    selected_char=entry["char_selected"],
                    movement_time=float(entry["t"]) - prev_t,
                    origin=cursor,
                    target=target_pos,
                )
            )
            prev_t = float(entry["t"])
            cursor = layout.assignment[entry["char_selected"]]
        built = TranscriptionTrial(trial.prompt, tuple(keystrokes), prev_t, advance_on_miss=True)
        report = evaluation.compute_metrics([built], layout, layout_ref=trial.layout_id)
        trial.finished = True
        state._append_durable(
            state.data_dir / "trials" / f"{trial_id}.ndjson",
            json.dumps({"type": "finish", "t": prev_t}, sort_keys=True),
        )
        doc = evaluation.report_to_dict(report)
        doc["n_keystrokes"] = len(keystrokes)
        doc["prompt"] = trial.prompt
        return doc

    if frontend_dir is not None and Path(frontend_dir).exists():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")

    return app
