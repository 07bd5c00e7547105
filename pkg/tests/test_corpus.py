import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_instance, wikinews_table_fixture
from lexsimp.corpus import (
    Genre,
    GoldComplexWord,
    Instance,
    compute_stats,
    instance_to_dict,
    load_dataset,
    save_dataset,
    validate_instance,
)
from lexsimp.errors import ParseError, ValidationError


def roundtrip(instances):
    buffer = io.BytesIO()
    save_dataset(instances, buffer)
    buffer.seek(0)
    return load_dataset(buffer)


def test_load_empty_stream():
    assert load_dataset(io.BytesIO(b"")) == []


def test_save_empty_is_empty():
    buffer = io.BytesIO()
    save_dataset([], buffer)
    assert buffer.getvalue() == b""


def test_one_instance_one_line():
    instance = build_instance("a", Genre.NEWS, [("tricky", 3, ["hard"])])
    buffer = io.BytesIO()
    save_dataset([instance], buffer)
    assert buffer.getvalue().count(b"\n") == 1


def test_roundtrip_three_record_fixture():
    instances = [
        build_instance("a", Genre.NEWS, [("perilous", 4, ["risky", "unsafe"])]),
        build_instance("b", Genre.WIKIPEDIA, [("obsolete", 2, ["outdated"]), ("verbose", 1, ["wordy"])]),
        build_instance("c", Genre.OTHER, []),
    ]
    assert roundtrip(instances) == instances
    # byte-identical modulo key order: parsed JSON objects match exactly
    buffer = io.BytesIO()
    save_dataset(instances, buffer)
    lines = buffer.getvalue().decode("utf-8").splitlines()
    assert [json.loads(line) for line in lines] == [instance_to_dict(i) for i in instances]


def test_malformed_line_reports_line_number():
    stream = io.BytesIO(b'{"id": "a", "genre": "news", "sentence": "x", "complex_words": []}\nnot json\n')
    with pytest.raises(ParseError, match="line 2"):
        load_dataset(stream)


def test_span_surface_mismatch_rejected():
    record = {
        "id": "bad",
        "genre": "news",
        "sentence": "some sentence here",
        "complex_words": [{"surface": "zzz", "span": [0, 3], "weight": 1, "substitutes": ["a"]}],
    }
    with pytest.raises(ValidationError, match="bad"):
        load_dataset(io.BytesIO(json.dumps(record).encode()))


def test_duplicate_ids_rejected():
    record = json.dumps(
        {"id": "dup", "genre": "news", "sentence": "x", "complex_words": []}
    ).encode()
    with pytest.raises(ValidationError, match="duplicate id"):
        load_dataset(io.BytesIO(record + b"\n" + record))


def test_overlapping_spans_rejected():
    sentence = "overlapping words"
    instance = Instance(
        id="x",
        genre=Genre.NEWS,
        sentence=sentence,
        complex_words=(
            GoldComplexWord("overlapping", (0, 11), 1, ("a",)),
            GoldComplexWord("lapping", (4, 11), 1, ("b",)),
        ),
    )
    with pytest.raises(ValidationError, match="overlap"):
        validate_instance(instance)


def test_weight_bounds_enforced():
    instance = Instance(
        id="a",
        genre=Genre.NEWS,
        sentence="On this day w.",
        complex_words=(GoldComplexWord("w", (12, 13), 21, ("x",)),),
    )
    with pytest.raises(ValidationError, match="weight"):
        validate_instance(instance)


def test_substitute_equal_to_surface_rejected():
    sentence = "On this day tricky."
    instance = Instance(
        id="a",
        genre=Genre.NEWS,
        sentence=sentence,
        complex_words=(GoldComplexWord("tricky", (12, 18), 2, ("hard", "Tricky")),),
    )
    with pytest.raises(ValidationError, match="equals the complex word"):
        validate_instance(instance)


# -- statistics -------------------------------------------------------------

def test_stats_single_word():
    instance = build_instance("a", Genre.NEWS, [("narrow", 3, [f"s{i}" for i in range(5)])])
    stats = compute_stats([instance])
    assert (stats.num_instances, stats.num_complex_words) == (1, 1)
    assert (stats.min_subs, stats.max_subs, stats.avg_subs) == (5, 5, 5.0)


def test_stats_two_words_hand_arithmetic():
    instance = build_instance(
        "a",
        Genre.NEWS,
        [("tiny", 1, ["small"]), ("vast", 2, [f"s{i}" for i in range(12)])],
    )
    stats = compute_stats([instance])
    assert (stats.num_instances, stats.num_complex_words) == (1, 2)
    assert (stats.min_subs, stats.max_subs, stats.avg_subs) == (1, 12, 6.5)


def test_stats_empty_dataset_has_absent_extremes():
    stats = compute_stats([])
    assert stats.num_instances == 0
    assert stats.min_subs is None and stats.max_subs is None and stats.avg_subs is None


def test_stats_wikinews_table_counts():
    stats = compute_stats(wikinews_table_fixture())
    assert stats.num_instances == 100
    assert stats.num_complex_words == 412
    assert stats.min_subs == 2
    assert stats.max_subs == 13
    assert round(stats.avg_subs, 1) == 6.1


# -- property tests ----------------------------------------------------------

_word = st.text(alphabet="abcdefghij", min_size=1, max_size=8)


@st.composite
def instances_strategy(draw):
    n_words = draw(st.integers(min_value=0, max_value=4))
    specs = []
    used = set()
    for i in range(n_words):
        surface = draw(_word.filter(lambda w: w not in used))
        used.add(surface)
        n_subs = draw(st.integers(min_value=1, max_value=4))
        subs = []
        for j in range(n_subs):
            subs.append(f"{surface}sub{j}")
        weight = draw(st.integers(min_value=1, max_value=20))
        specs.append((surface, weight, subs))
    iid = draw(st.uuids()).hex
    genre = draw(st.sampled_from(list(Genre)))
    return build_instance(iid, genre, specs)


@settings(max_examples=50, deadline=None)
@given(st.lists(instances_strategy(), max_size=8, unique_by=lambda i: i.id))
def test_roundtrip_property(instances):
    assert roundtrip(instances) == instances


@settings(max_examples=50, deadline=None)
@given(st.lists(instances_strategy(), max_size=8, unique_by=lambda i: i.id))
def test_stats_agree_with_naive_recount(instances):
    stats = compute_stats(instances)
    lengths = [len(w.substitutes) for i in instances for w in i.complex_words]
    assert stats.num_instances == len(instances)
    assert stats.num_complex_words == len(lengths)
    if lengths:
        assert stats.min_subs == min(lengths)
        assert stats.max_subs == max(lengths)
        assert stats.avg_subs == pytest.approx(sum(lengths) / len(lengths))
    else:
        assert stats.min_subs is None


@settings(max_examples=30, deadline=None)
@given(st.lists(instances_strategy(), max_size=5, unique_by=lambda i: i.id))
def test_span_surface_consistency_after_load(instances):
    for instance in roundtrip(instances):
        for word in instance.complex_words:
            start, end = word.span
            assert instance.sentence[start:end] == word.surface
