from __future__ import annotations

import json

import pytest

from lexsimp.corpus import Genre, GoldComplexWord, Instance, validate_instance


def build_instance(
    iid: str, genre: Genre, word_specs: list[tuple[str, int, list[str]]]
) -> Instance:
    """Assemble a sentence containing the given surfaces, with correct spans."""
    prefix = "On this day "
    pieces = [prefix]
    cursor = len(prefix)
    words = []
    for surface, weight, subs in word_specs:
        words.append(
            GoldComplexWord(
                surface=surface,
                span=(cursor, cursor + len(surface)),
                weight=weight,
                substitutes=tuple(subs),
            )
        )
        pieces.append(surface + " ")
        cursor += len(surface) + 1
    sentence = "".join(pieces)[:-1] + "."
    instance = Instance(id=iid, genre=genre, sentence=sentence, complex_words=tuple(words))
    validate_instance(instance)
    return instance


def wikinews_table_fixture() -> list[Instance]:
    """100 instances / 412 complex words with substitute counts 2..13 avg 6.1.

    Substitute-list sizes: one 2, one 13, 38 sevens, 372 sixes
    (sum 2513; 2513/412 = 6.0995 -> 6.1 at one decimal).
    """
    sizes = [2, 13] + [7] * 38 + [6] * 372
    assert len(sizes) == 412 and sum(sizes) == 2513
    per_instance = [4] * 88 + [5] * 12  # 412 words over 100 instances
    instances = []
    cursor = 0
    for i, word_count in enumerate(per_instance):
        specs = []
        for j in range(word_count):
            size = sizes[cursor]
            cursor += 1
            specs.append(
                (f"word{i}x{j}", (cursor % 20) + 1, [f"sub{i}x{j}x{k}" for k in range(size)])
            )
        instances.append(build_instance(f"wn-{i:03d}", Genre.WIKINEWS, specs))
    assert cursor == 412
    return instances


@pytest.fixture
def wikinews_instances() -> list[Instance]:
    return wikinews_table_fixture()


def write_provider(path, script: dict[str, list[str]]) -> str:
    payload = {"kind": "scripted", "script": script}
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)
