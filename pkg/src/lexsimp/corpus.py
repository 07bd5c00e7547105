"""Data model and serialization for the all-in-one lexical simplification dataset.

A dataset file is newline-delimited JSON (UTF-8), one instance per line:

    {"id": "wn-001", "genre": "wikinews", "sentence": "...",
     "complex_words": [{"surface": "approves", "span": [26, 34],
                        "weight": 2, "substitutes": ["allows", "agrees"]}]}

Spans are character offsets [start, end) into the sentence, so multi-byte
text behaves uniformly. ``weight`` counts how many annotators (out of
``w_max``, default 20) marked the word complex. Substitute lists are ordered
best-first and consumers must not re-sort them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Iterator

from .errors import IoError, ParseError, ValidationError

DEFAULT_W_MAX = 20


class Genre(str, Enum):
    NEWS = "news"
    WIKINEWS = "wikinews"
    WIKIPEDIA = "wikipedia"
    OTHER = "other"


@dataclass(frozen=True)
class GoldComplexWord:
    """One annotated complex word with its gold substitute list."""

    surface: str
    span: tuple[int, int]
    weight: int
    substitutes: tuple[str, ...]


@dataclass(frozen=True)
class Instance:
    id: str
    genre: Genre
    sentence: str
    complex_words: tuple[GoldComplexWord, ...]


@dataclass(frozen=True)
class DatasetStats:
    """Aggregate counts over a dataset; min/max/avg are None when empty."""

    num_instances: int
    num_complex_words: int
    min_subs: int | None
    max_subs: int | None
    avg_subs: float | None


def validate_instance(instance: Instance, w_max: int = DEFAULT_W_MAX) -> None:
    """Raise ValidationError naming the instance and field on any violation."""

    def fail(field: str, detail: str) -> None:
        raise ValidationError(f"instance {instance.id!r}: {field}: {detail}")

    if not instance.sentence:
        fail("sentence", "must be non-empty")
    if not isinstance(instance.genre, Genre):
        fail("genre", f"unknown genre {instance.genre!r}")

    spans: list[tuple[int, int]] = []
    for word in instance.complex_words:
        start, end = word.span
        if not (0 <= start < end <= len(instance.sentence)):
            fail("span", f"{word.span} out of range for sentence of length {len(instance.sentence)}")
        if instance.sentence[start:end] != word.surface:
            fail(
                "surface",
                f"span {word.span} reads {instance.sentence[start:end]!r}, expected {word.surface!r}",
            )
        if not (1 <= word.weight <= w_max):
            fail("weight", f"{word.weight} outside [1, {w_max}]")
        if not word.substitutes:
            fail("substitutes", f"empty for {word.surface!r}")
        seen: set[str] = set()
        for sub in word.substitutes:
            key = sub.casefold()
            if key in seen:
                fail("substitutes", f"duplicate {sub!r} for {word.surface!r}")
            seen.add(key)
            if key == word.surface.casefold():
                fail("substitutes", f"{sub!r} equals the complex word itself")
        spans.append(word.span)

    spans.sort()
    for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
        if next_start < prev_end:
            fail("complex_words", "overlapping spans")


def _word_to_dict(word: GoldComplexWord) -> dict:
    return {
        "surface": word.surface,
        "span": list(word.span),
        "weight": word.weight,
        "substitutes": list(word.substitutes),
    }


def instance_to_dict(instance: Instance) -> dict:
    return {
        "id": instance.id,
        "genre": instance.genre.value,
        "sentence": instance.sentence,
        "complex_words": [_word_to_dict(w) for w in instance.complex_words],
    }


def instance_from_dict(record: dict, line_no: int | None = None) -> Instance:
    """Build an Instance from a parsed JSON object; structural problems raise ParseError."""
    where = f"line {line_no}" if line_no is not None else "record"
    try:
        raw_words = record["complex_words"]
        words = tuple(
            GoldComplexWord(
                surface=w["surface"],
                span=(int(w["span"][0]), int(w["span"][1])),
                weight=int(w["weight"]),
                substitutes=tuple(str(s) for s in w["substitutes"]),
            )
            for w in raw_words
        )
        genre_raw = record["genre"]
        instance_id = str(record["id"])
        sentence = str(record["sentence"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"{where}: malformed instance record: {exc!r}") from exc
    try:
        genre = Genre(genre_raw)
    except ValueError:
        raise ValidationError(f"instance {instance_id!r}: genre: unknown genre {genre_raw!r}") from None
    return Instance(id=instance_id, genre=genre, sentence=sentence, complex_words=words)


def _decode_lines(source: IO[bytes] | IO[str] | Iterable[bytes] | Iterable[str]) -> Iterator[str]:
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, bytes) else raw


def load_dataset(
    source: IO[bytes] | IO[str] | Iterable[bytes] | Iterable[str],
    w_max: int = DEFAULT_W_MAX,
) -> list[Instance]:
    """Parse and validate a newline-delimited dataset stream.

    Line order is preserved. Malformed lines raise ParseError with the line
    number; invariant violations raise ValidationError naming the instance.
    """
    instances: list[Instance] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(_decode_lines(source), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_no}: invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise ParseError(f"line {line_no}: expected a JSON object")
        instance = instance_from_dict(record, line_no)
        validate_instance(instance, w_max=w_max)
        if instance.id in seen_ids:
            raise ValidationError(f"instance {instance.id!r}: id: duplicate id")
        seen_ids.add(instance.id)
        instances.append(instance)
    return instances


def save_dataset(instances: Iterable[Instance], sink: IO[bytes]) -> None:
    """Write instances as one JSON object per line; inverse of load_dataset."""
    try:
        for instance in instances:
            line = json.dumps(instance_to_dict(instance), ensure_ascii=False)
            sink.write(line.encode("utf-8") + b"\n")
    except OSError as exc:
        raise IoError(f"failed writing dataset: {exc}") from exc


def compute_stats(instances: Iterable[Instance]) -> DatasetStats:
    """Count instances and complex words, and summarize substitute-list sizes."""
    num_instances = 0
    sub_counts: list[int] = []
    for instance in instances:
        num_instances += 1
        for word in instance.complex_words:
            sub_counts.append(len(word.substitutes))
    if sub_counts:
        return DatasetStats(
            num_instances=num_instances,
            num_complex_words=len(sub_counts),
            min_subs=min(sub_counts),
            max_subs=max(sub_counts),
            avg_subs=sum(sub_counts) / len(sub_counts),
        )
    return DatasetStats(num_instances, 0, None, None, None)
