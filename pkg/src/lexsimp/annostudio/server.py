"""HTTP face of the annotation store (FastAPI).

Endpoints mirror the domain types; the only authentication is the
``X-Annotator`` header, which mutating requests must carry. Task payloads
include the sentence (and a ``<<>>``-marked copy) so the web UI can render
without a second lookup. A built UI bundle can be mounted at ``/``.
"""

from __future__ import annotations

import io
from pathlib import Path

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..corpus import save_dataset
from ..errors import IncompleteError, NotFoundError, ValidationError
from ..promptkit import mark_target
from .models import AnnotationTask, task_to_dict
from .store import AnnoStore


class JudgmentIn(BaseModel):
    substitute: str
    verdict: str


class SubstituteIn(BaseModel):
    text: str


def _task_payload(store: AnnoStore, task: AnnotationTask, annotator: str | None) -> dict:
    source = store.source_for(task)
    done, total = store.progress(task.task_id, annotator)
    payload = task_to_dict(task)
    payload.update(
        {
            "sentence": source.sentence,
            "genre": source.genre.value,
            "marked_sentence": mark_target(source.sentence, task.target.span),
            "added_substitutes": [
                {"text": a.text, "annotator_id": a.annotator_id, "timestamp": a.timestamp}
                for a in store.added_for(task.task_id)
            ],
            "verdicts": store.verdicts_for(task.task_id, annotator),
            "progress": {"done": done, "total": total},
        }
    )
    return payload


def create_app(
    store: AnnoStore,
    *,
    adjudicator: str | None = None,
    policy: str = "latest",
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="lexsimp annotation studio")

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(ValidationError)
    async def _invalid(request: Request, exc: ValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(IncompleteError)
    async def _incomplete(request: Request, exc: IncompleteError) -> JSONResponse:
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.get("/tasks")
    def list_tasks(annotator: str | None = Query(default=None)) -> list[dict]:
        out = []
        for task in store.list_tasks():
            done, total = store.progress(task.task_id, annotator)
            out.append(
                {
                    "task_id": task.task_id,
                    "instance_id": task.instance_id,
                    "target": {
                        "surface": task.target.surface,
                        "span": list(task.target.span),
                        "weight": task.target.weight,
                    },
                    "progress": {"done": done, "total": total},
                }
            )
        return out

    @app.get("/tasks/{task_id}")
    def get_task(
        task_id: str, x_annotator: str | None = Header(default=None)
    ) -> dict:
        return _task_payload(store, store.get_task(task_id), x_annotator)

    @app.post("/tasks/{task_id}/judgments")
    def post_judgment(
        task_id: str, body: JudgmentIn, x_annotator: str | None = Header(default=None)
    ) -> dict:
        if not x_annotator:
            raise ValidationError("X-Annotator header is required")
        store.record_judgment(task_id, body.substitute, x_annotator, body.verdict)
        return _task_payload(store, store.get_task(task_id), x_annotator)

    @app.post("/tasks/{task_id}/substitutes")
    def post_substitute(
        task_id: str, body: SubstituteIn, x_annotator: str | None = Header(default=None)
    ) -> dict:
        if not x_annotator:
            raise ValidationError("X-Annotator header is required")
        store.add_substitute(task_id, body.text, x_annotator)
        return _task_payload(store, store.get_task(task_id), x_annotator)

    @app.get("/reports/consistency")
    def consistency(k: int = Query(default=3)) -> dict:
        report = store.consistency(k, adjudicator=adjudicator, policy=policy)
        return {
            "threshold": report.threshold,
            "adopted": report.adopted,
            "agree": report.agree,
            "ratio": report.ratio,
        }

    @app.get("/export")
    def export(force: bool = Query(default=False)) -> PlainTextResponse:
        instances = store.export(force=force, adjudicator=adjudicator, policy=policy)
        buffer = io.BytesIO()
        save_dataset(instances, buffer)
        return PlainTextResponse(
            buffer.getvalue().decode("utf-8"), media_type="application/x-ndjson"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
