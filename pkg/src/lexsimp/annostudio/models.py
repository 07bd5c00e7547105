"""Domain types for the annotation workflow.

Annotation starts from source sentences whose complex words carry annotator
weights but no substitutes yet (the corpus Instance type requires non-empty
substitute lists, so constructing it happens only at export). Each target
word becomes one AnnotationTask holding up to 12 machine-generated pseudo
substitutes and, after pre-annotation, four advisory signals per substitute:
two models ("A", "B") times two prompting styles ("direct", "cot"), each
"yes", "no", or "failed".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from ..corpus import DEFAULT_W_MAX, Genre
from ..errors import ParseError, ValidationError

VERDICTS = ("YES", "NO", "UNSURE")
MODEL_KEYS = ("A", "B")
STYLE_KEYS = ("direct", "cot")
SIGNAL_VALUES = ("yes", "no", "failed")
MAX_PSEUDO_SUBSTITUTES = 12

# substitute -> model -> style -> signal
Recommendations = dict[str, dict[str, dict[str, str]]]


@dataclass(frozen=True)
class TargetRef:
    """A complex-word occurrence awaiting substitutes."""

    surface: str
    span: tuple[int, int]
    weight: int


@dataclass(frozen=True)
class SourceInstance:
    """Annotation input: a sentence plus weighted targets, no substitutes yet."""

    id: str
    genre: Genre
    sentence: str
    targets: tuple[TargetRef, ...]


@dataclass
class AnnotationTask:
    task_id: str
    instance_id: str
    target: TargetRef
    pseudo_substitutes: tuple[str, ...]
    recommendations: Recommendations = field(default_factory=dict)

    def validate(self) -> None:
        if len(self.pseudo_substitutes) > MAX_PSEUDO_SUBSTITUTES:
            raise ValidationError(
                f"task {self.task_id!r}: more than {MAX_PSEUDO_SUBSTITUTES} pseudo substitutes"
            )
        seen: set[str] = set()
        for sub in self.pseudo_substitutes:
            key = sub.casefold()
            if key in seen:
                raise ValidationError(f"task {self.task_id!r}: duplicate substitute {sub!r}")
            seen.add(key)


@dataclass(frozen=True)
class Judgment:
    task_id: str
    substitute: str
    annotator_id: str
    verdict: str
    timestamp: str


@dataclass(frozen=True)
class AddedSubstitute:
    task_id: str
    text: str
    annotator_id: str
    timestamp: str


@dataclass(frozen=True)
class ConsistencyReport:
    threshold: int
    adopted: int
    agree: int
    ratio: float


def task_id_for(instance_id: str, span: tuple[int, int]) -> str:
    return f"{instance_id}:{span[0]}-{span[1]}"


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def source_to_dict(source: SourceInstance) -> dict:
    return {
        "id": source.id,
        "genre": source.genre.value,
        "sentence": source.sentence,
        "complex_words": [
            {"surface": t.surface, "span": list(t.span), "weight": t.weight}
            for t in source.targets
        ],
    }


def source_from_dict(record: Mapping, line_no: int | None = None) -> SourceInstance:
    where = f"line {line_no}" if line_no is not None else "record"
    try:
        targets = tuple(
            TargetRef(
                surface=w["surface"],
                span=(int(w["span"][0]), int(w["span"][1])),
                weight=int(w["weight"]),
            )
            for w in record["complex_words"]
        )
        source = SourceInstance(
            id=str(record["id"]),
            genre=Genre(record["genre"]),
            sentence=str(record["sentence"]),
            targets=targets,
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"{where}: malformed source record: {exc!r}") from exc
    validate_source(source)
    return source


def validate_source(source: SourceInstance, w_max: int = DEFAULT_W_MAX) -> None:
    for target in source.targets:
        start, end = target.span
        if not (0 <= start < end <= len(source.sentence)):
            raise ValidationError(f"source {source.id!r}: span {target.span} out of range")
        if source.sentence[start:end] != target.surface:
            raise ValidationError(
                f"source {source.id!r}: span {target.span} does not read {target.surface!r}"
            )
        if not (1 <= target.weight <= w_max):
            raise ValidationError(f"source {source.id!r}: weight {target.weight} outside [1, {w_max}]")


def load_sources(stream: IO[bytes] | IO[str] | Iterable[str]) -> list[SourceInstance]:
    """Newline-delimited JSON, same shape as the dataset format minus substitutes."""
    sources = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_no}: invalid JSON: {exc.msg}") from exc
        sources.append(source_from_dict(record, line_no))
    return sources


def task_to_dict(task: AnnotationTask) -> dict:
    return {
        "task_id": task.task_id,
        "instance_id": task.instance_id,
        "target": {
            "surface": task.target.surface,
            "span": list(task.target.span),
            "weight": task.target.weight,
        },
        "pseudo_substitutes": list(task.pseudo_substitutes),
        "recommendations": task.recommendations,
    }


def task_from_dict(record: Mapping) -> AnnotationTask:
    target = record["target"]
    task = AnnotationTask(
        task_id=str(record["task_id"]),
        instance_id=str(record["instance_id"]),
        target=TargetRef(
            surface=target["surface"],
            span=(int(target["span"][0]), int(target["span"][1])),
            weight=int(target["weight"]),
        ),
        pseudo_substitutes=tuple(record["pseudo_substitutes"]),
        recommendations={
            sub: {model: dict(styles) for model, styles in models.items()}
            for sub, models in record.get("recommendations", {}).items()
        },
    )
    task.validate()
    return task


def _utc_now() -> str:
    from datetime import datetime, timezone

    return datetime.now(timezone.utc).isoformat()


def make_judgment(
    task_id: str,
    substitute: str,
    annotator_id: str,
    verdict: str,
    timestamp: str | None = None,
) -> Judgment:
    if verdict not in VERDICTS:
        raise ValidationError(f"verdict must be one of {VERDICTS}, got {verdict!r}")
    return Judgment(task_id, substitute, annotator_id, verdict, timestamp or _utc_now())


def make_added_substitute(
    task_id: str, text: str, annotator_id: str, timestamp: str | None = None
) -> AddedSubstitute:
    if not text.strip():
        raise ValidationError("added substitute must be non-empty")
    return AddedSubstitute(task_id, text.strip(), annotator_id, timestamp or _utc_now())
