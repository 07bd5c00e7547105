"""Journaled state for the annotation service.

Tasks and source sentences are immutable batch artifacts loaded at startup;
judgments and added substitutes are appended to a single NDJSON journal so
the full audit trail survives restarts. Every ``snapshot_every`` events a
sidecar snapshot is written and replay resumes from it. Writes are
serialized through one lock; reads see plain in-memory state.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Sequence

from ..corpus import Instance
from ..errors import NotFoundError, ValidationError
from . import ops
from .models import (
    AddedSubstitute,
    AnnotationTask,
    ConsistencyReport,
    Judgment,
    SourceInstance,
    make_added_substitute,
    make_judgment,
)


class AnnoStore:
    def __init__(
        self,
        tasks: Sequence[AnnotationTask],
        sources: Sequence[SourceInstance],
        journal_path: str | Path | None = None,
        snapshot_every: int = 200,
    ) -> None:
        self.tasks: dict[str, AnnotationTask] = {t.task_id: t for t in tasks}
        self.sources: dict[str, SourceInstance] = {s.id: s for s in sources}
        self._judgments: list[Judgment] = []
        self._added: dict[str, list[AddedSubstitute]] = {}
        self._lock = threading.Lock()
        self._journal_path = Path(journal_path) if journal_path else None
        self._snapshot_every = snapshot_every
        self._event_count = 0
        if self._journal_path is not None:
            self._replay()

    # -- persistence -------------------------------------------------------

    @property
    def _snapshot_path(self) -> Path:
        assert self._journal_path is not None
        return self._journal_path.with_suffix(self._journal_path.suffix + ".snapshot.json")

    def _replay(self) -> None:
        assert self._journal_path is not None
        skip = 0
        if self._snapshot_path.exists():
            snapshot = json.loads(self._snapshot_path.read_text("utf-8"))
            skip = int(snapshot["event_count"])
            self._judgments = [Judgment(**j) for j in snapshot["judgments"]]
            for record in snapshot["added"]:
                item = AddedSubstitute(**record)
                self._added.setdefault(item.task_id, []).append(item)
            self._event_count = skip
        if not self._journal_path.exists():
            return
        with self._journal_path.open(encoding="utf-8") as fp:
            for line_no, line in enumerate(fp):
                if line_no < skip or not line.strip():
                    continue
                event = json.loads(line)
                kind = event.pop("event")
                if kind == "judgment":
                    self._apply_judgment(Judgment(**event))
                elif kind == "substitute":
                    self._apply_added(AddedSubstitute(**event))
                else:
                    raise ValidationError(f"unknown journal event {kind!r}")
                self._event_count += 1

    def _append_event(self, kind: str, payload: dict) -> None:
        if self._journal_path is None:
            self._event_count += 1
            return
        line = json.dumps({"event": kind, **payload}, ensure_ascii=False)
        with self._journal_path.open("a", encoding="utf-8") as fp:
            fp.write(line + "\n")
        self._event_count += 1
        if self._snapshot_every and self._event_count % self._snapshot_every == 0:
            self._write_snapshot()

    def _write_snapshot(self) -> None:
        snapshot = {
            "event_count": self._event_count,
            "judgments": [vars(j) for j in self._judgments],
            "added": [vars(a) for items in self._added.values() for a in items],
        }
        self._snapshot_path.write_text(json.dumps(snapshot, ensure_ascii=False), "utf-8")

    # -- mutation ----------------------------------------------------------

    def _known_substitutes(self, task: AnnotationTask) -> list[str]:
        return list(task.pseudo_substitutes) + [
            a.text for a in self._added.get(task.task_id, [])
        ]

    def _canonical_substitute(self, task: AnnotationTask, text: str) -> str:
        key = text.strip().casefold()
        for candidate in self._known_substitutes(task):
            if candidate.casefold() == key:
                return candidate
        raise ValidationError(
            f"substitute {text!r} is not part of task {task.task_id!r}"
        )

    def _apply_judgment(self, judgment: Judgment) -> None:
        self._judgments.append(judgment)

    def _apply_added(self, item: AddedSubstitute) -> None:
        self._added.setdefault(item.task_id, []).append(item)

    def record_judgment(
        self,
        task_id: str,
        substitute: str,
        annotator_id: str,
        verdict: str,
        timestamp: str | None = None,
    ) -> Judgment:
        with self._lock:
            task = self._require_task(task_id)
            canonical = self._canonical_substitute(task, substitute)
            judgment = make_judgment(task_id, canonical, annotator_id, verdict, timestamp)
            self._apply_judgment(judgment)
            self._append_event("judgment", vars(judgment))
            return judgment

    def add_substitute(
        self, task_id: str, text: str, annotator_id: str, timestamp: str | None = None
    ) -> AddedSubstitute:
        with self._lock:
            task = self._require_task(task_id)
            item = make_added_substitute(task_id, text, annotator_id, timestamp)
            key = item.text.casefold()
            if any(existing.casefold() == key for existing in self._known_substitutes(task)):
                raise ValidationError(f"substitute {item.text!r} already present on {task_id!r}")
            if key == task.target.surface.casefold():
                raise ValidationError("substitute may not equal the target word")
            self._apply_added(item)
            self._append_event("substitute", vars(item))
            return item

    # -- queries -----------------------------------------------------------

    def _require_task(self, task_id: str) -> AnnotationTask:
        task = self.tasks.get(task_id)
        if task is None:
            raise NotFoundError(f"no task {task_id!r}")
        return task

    def get_task(self, task_id: str) -> AnnotationTask:
        return self._require_task(task_id)

    def list_tasks(self) -> list[AnnotationTask]:
        return list(self.tasks.values())

    def source_for(self, task: AnnotationTask) -> SourceInstance:
        source = self.sources.get(task.instance_id)
        if source is None:
            raise NotFoundError(f"no source instance {task.instance_id!r}")
        return source

    @property
    def judgments(self) -> tuple[Judgment, ...]:
        return tuple(self._judgments)

    def added_for(self, task_id: str) -> tuple[AddedSubstitute, ...]:
        return tuple(self._added.get(task_id, ()))

    @property
    def all_added(self) -> tuple[AddedSubstitute, ...]:
        return tuple(a for items in self._added.values() for a in items)

    def verdicts_for(self, task_id: str, annotator_id: str | None = None) -> dict[str, str]:
        """Latest verdict per substitute, optionally for one annotator."""
        task = self._require_task(task_id)
        out: dict[str, str] = {}
        for judgment in self._judgments:
            if judgment.task_id != task_id:
                continue
            if annotator_id is not None and judgment.annotator_id != annotator_id:
                continue
            out[self._canonical_substitute(task, judgment.substitute)] = judgment.verdict
        return out

    def progress(self, task_id: str, annotator_id: str | None = None) -> tuple[int, int]:
        task = self._require_task(task_id)
        total = len(self._known_substitutes(task))
        done = len(self.verdicts_for(task_id, annotator_id))
        return done, total

    # -- derived artifacts ---------------------------------------------------

    def export(
        self,
        *,
        force: bool = False,
        adjudicator: str | None = None,
        policy: str = "latest",
    ) -> list[Instance]:
        return ops.export_dataset(
            self.list_tasks(),
            self.judgments,
            self.all_added,
            list(self.sources.values()),
            force=force,
            adjudicator=adjudicator,
            policy=policy,
        )

    def consistency(
        self, k: int, *, adjudicator: str | None = None, policy: str = "latest"
    ) -> ConsistencyReport:
        return ops.consistency_report(
            self.list_tasks(), self.judgments, k, adjudicator=adjudicator, policy=policy
        )
