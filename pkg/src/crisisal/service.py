"""HTTP JSON API wrapping engine sessions for live human annotation.

One service instance manages independent sessions under a data directory;
every state transition goes through an engine checkpoint, so a restarted
service reproduces all pre-restart responses. Within a session, label
submission takes an exclusive transition lock (concurrent submitters get a
409) while reads stay concurrent.

An optional dual-annotation mode requires each batch to be labeled by two
named annotators; conflicting items block the transition until the
annotators resubmit in agreement.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import engine
from .corpus import IngestError, ingest
from .engine import EngineError, SessionConfig, SessionState

__all__ = ["create_app", "SessionStore", "DEFAULT_DATA_DIR"]

DEFAULT_DATA_DIR = "crisisal-data"


class CreateSessionRequest(BaseModel):
    corpus: str
    config: dict = {}
    annotators: list[str] | None = None


class SubmitLabelsRequest(BaseModel):
    labels: dict[str, int]
    annotator: str | None = None


@dataclass
class _Entry:
    state: SessionState
    meta: dict
    lock: threading.Lock = dc_field(default_factory=threading.Lock)
    dual: dict[str, dict[str, int]] = dc_field(default_factory=dict)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SessionStore:
    """Disk-backed registry of annotation sessions."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, _Entry] = {}
        self._registry_lock = threading.Lock()

    # -- paths ------------------------------------------------------------

    def _checkpoint_path(self, sid: str) -> Path:
        return self.sessions_dir / f"{sid}.json"

    def _meta_path(self, sid: str) -> Path:
        return self.sessions_dir / f"{sid}.meta.json"

    def _dual_path(self, sid: str) -> Path:
        return self.sessions_dir / f"{sid}.dual.json"

    def resolve_corpus(self, ref: str) -> Path:
        candidate = Path(ref)
        if candidate.is_file():
            return candidate
        fallback = self.data_dir / ref
        if fallback.is_file():
            return fallback
        raise HTTPException(status_code=404, detail=f"unknown corpus {ref!r}")

    # -- registry ---------------------------------------------------------

    def create(self, corpus_ref: str, config_payload: dict, annotators: list[str] | None) -> dict:
        corpus_path = self.resolve_corpus(corpus_ref)
        try:
            config = SessionConfig.from_dict(config_payload) if config_payload else SessionConfig()
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid config: {exc}") from None
        if config.rounds < 1:
            raise HTTPException(status_code=400, detail="invalid config: rounds must be >= 1")
        if annotators is not None and len(annotators) != 2:
            raise HTTPException(
                status_code=400, detail="dual-annotation mode needs exactly two annotators"
            )
        try:
            pool = ingest(corpus_path)
        except IngestError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

        sid = uuid.uuid4().hex[:12]
        try:
            state = engine.start_session(pool, config, checkpoint_path=self._checkpoint_path(sid))
        except (EngineError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        meta = {
            "session_id": sid,
            "created_at": _now(),
            "corpus": str(corpus_path),
            "annotators": annotators,
        }
        self._meta_path(sid).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        with self._registry_lock:
            self._cache[sid] = _Entry(state=state, meta=meta)
        return self.handle(sid)

    def get(self, sid: str) -> _Entry:
        with self._registry_lock:
            entry = self._cache.get(sid)
            if entry is not None:
                return entry
            meta_path = self._meta_path(sid)
            if not meta_path.exists():
                raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            state = engine.resume(self._checkpoint_path(sid))
            entry = _Entry(state=state, meta=meta)
            dual_path = self._dual_path(sid)
            if dual_path.exists():
                entry.dual = json.loads(dual_path.read_text(encoding="utf-8"))
            self._cache[sid] = entry
            return entry

    def list_sessions(self) -> list[dict]:
        sids = sorted(p.stem.replace(".meta", "") for p in self.sessions_dir.glob("*.meta.json"))
        return [self.handle(sid) for sid in sids]

    def handle(self, sid: str) -> dict:
        entry = self.get(sid)
        state = entry.state
        return {
            "session_id": sid,
            "created_at": entry.meta["created_at"],
            "config": state.config.to_dict(),
            "status": state.phase,
            "round": state.round,
            "labeled_count": len(state.pool.labeled),
            "annotators": entry.meta.get("annotators"),
            "dual_submitted": sorted(entry.dual),
            "conflicts": self._conflicts(entry),
        }

    # -- dual-annotation helpers -------------------------------------------

    @staticmethod
    def _conflicts(entry: _Entry) -> list[str]:
        if len(entry.dual) < 2:
            return []
        a, b = (entry.dual[k] for k in sorted(entry.dual))
        return sorted(i for i in a if i in b and a[i] != b[i])

    def _persist_dual(self, sid: str, entry: _Entry) -> None:
        path = self._dual_path(sid)
        if entry.dual:
            path.write_text(json.dumps(entry.dual, sort_keys=True) + "\n", encoding="utf-8")
        elif path.exists():
            path.unlink()

    # -- transitions --------------------------------------------------------

    def submit(self, sid: str, labels: Mapping[str, int], annotator: str | None) -> dict:
        entry = self.get(sid)
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409, detail="another label submission is in flight"
            )
        try:
            return self._submit_locked(sid, entry, labels, annotator)
        finally:
            entry.lock.release()

    def _submit_locked(
        self, sid: str, entry: _Entry, labels: Mapping[str, int], annotator: str | None
    ) -> dict:
        annotators = entry.meta.get("annotators")
        if annotators:
            if annotator not in annotators:
                raise HTTPException(
                    status_code=400,
                    detail=f"dual-annotation session expects annotator in {annotators}",
                )
            self._check_batch_ids(entry.state, labels)
            entry.dual[annotator] = {str(k): int(v) for k, v in labels.items()}
            self._persist_dual(sid, entry)
            remaining = [a for a in annotators if a not in entry.dual]
            if remaining:
                return {"status": "waiting_for", "remaining": remaining}
            conflicts = self._conflicts(entry)
            if conflicts:
                raise HTTPException(
                    status_code=409,
                    detail={"message": "annotators disagree", "conflicts": conflicts},
                )
            resolved: Mapping[str, int] = entry.dual[annotators[0]]
        else:
            resolved = labels

        metrics = self._transition(entry, resolved)
        if annotators:
            entry.dual = {}
            self._persist_dual(sid, entry)
        return metrics

    @staticmethod
    def _check_batch_ids(state: SessionState, labels: Mapping[str, int]) -> None:
        if state.phase != engine.PHASE_AWAITING or state.pending_batch is None:
            raise HTTPException(
                status_code=409, detail=f"session is not awaiting labels (phase={state.phase})"
            )
        if set(labels) != set(state.pending_batch.ids):
            raise HTTPException(
                status_code=409, detail="label ids do not match the pending batch"
            )

    def _transition(self, entry: _Entry, labels: Mapping[str, int]) -> dict:
        try:
            new_state = engine.submit_labels(entry.state, labels)
        except EngineError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        entry.state = new_state
        return new_state.history[-1].metrics.to_dict()


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    """Build the service; ``data_dir`` defaults to $CRISISAL_DATA_DIR."""
    data_dir = Path(data_dir or os.environ.get("CRISISAL_DATA_DIR", DEFAULT_DATA_DIR))
    store = SessionStore(data_dir)
    app = FastAPI(title="crisisal annotation service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        return store.create(body.corpus, body.config, body.annotators)

    @app.get("/sessions")
    def list_sessions() -> list[dict]:
        return store.list_sessions()

    @app.get("/sessions/{sid}")
    def get_session(sid: str) -> dict:
        return store.handle(sid)

    @app.get("/sessions/{sid}/batch")
    def get_batch(sid: str) -> dict:
        entry = store.get(sid)
        state = entry.state
        if state.phase != engine.PHASE_AWAITING or state.pending_batch is None:
            raise HTTPException(
                status_code=409,
                detail=f"no pending batch (phase={state.phase})",
            )
        items = []
        for position, doc_id in enumerate(state.pending_batch.ids):
            doc = state.pool.document(doc_id)
            items.append(
                {
                    "doc_id": doc.id,
                    "text": doc.text,
                    "lang": doc.lang,
                    "round": state.round,
                    "position_in_batch": position,
                }
            )
        return {"session_id": sid, "round": state.round, "items": items}

    @app.post("/sessions/{sid}/labels")
    def post_labels(sid: str, body: SubmitLabelsRequest) -> dict:
        return store.submit(sid, body.labels, body.annotator)

    @app.get("/sessions/{sid}/metrics")
    def get_metrics(sid: str) -> list[dict]:
        entry = store.get(sid)
        return [m.to_dict() for m in entry.state.metrics_history]

    @app.get("/sessions/{sid}/export")
    def export_labels(sid: str) -> PlainTextResponse:
        entry = store.get(sid)
        lines = []
        for record in entry.state.history:
            for doc_id in record.queried_ids:
                doc = entry.state.pool.document(doc_id)
                lines.append(
                    json.dumps(
                        {
                            "id": doc.id,
                            "text": doc.text,
                            "lang": doc.lang,
                            "label": int(record.labels[doc_id]),
                            "round": record.round,
                        },
                        ensure_ascii=False,
                    )
                )
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/spec")
    def get_spec() -> JSONResponse:
        return JSONResponse(app.openapi())

    ui_dir = os.environ.get("CRISISAL_UI_DIR", "frontend/dist")
    if Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
