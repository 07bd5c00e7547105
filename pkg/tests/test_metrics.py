import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import oracle_f1
from conftest import build_instance
from lexsimp.corpus import Genre
from lexsimp.errors import InputError
from lexsimp.metrics import (
    MACRO,
    MICRO,
    EvalCounts,
    MetricConfig,
    aggregate,
    f1_scores,
    report_csv,
    report_json,
    report_table,
    score_outcome,
    sum_counts,
)
from lexsimp.pipeline import Edit, Mode, SimplificationOutcome
from lexsimp.pipeline import tokenize


def gold_instance():
    # "approves" with weight 2, from the dataset-format reference row
    return build_instance(
        "g1",
        Genre.WIKINEWS,
        [
            ("approves", 2, ["allows", "agrees", "accepts", "passes"]),
            ("impeachment", 18, ["removal", "dismissal"]),
        ],
    )


def outcome_for(instance, pairs, extra_edits=()):
    """Build an outcome whose edits replace the given gold surfaces."""
    edits = []
    for surface, substitute in pairs:
        token = next(t for t in tokenize(instance.sentence) if t.text == surface)
        edits.append(Edit(surface, (token.start, token.end), substitute))
    edits = tuple(edits) + tuple(extra_edits)
    from lexsimp.pipeline import apply_edits

    return SimplificationOutcome(
        original=instance.sentence,
        simplified=apply_edits(instance.sentence, edits),
        edits=edits,
        mode=Mode.COLLS,
    )


# -- score_outcome -----------------------------------------------------------

def test_zero_edits():
    instance = gold_instance()
    counts = score_outcome(outcome_for(instance, []), instance)
    assert counts == EvalCounts(2, 0, 0, 0, 0)


def test_correct_simplification_accumulates_weight():
    instance = gold_instance()
    counts = score_outcome(outcome_for(instance, [("approves", "allows")]), instance)
    assert counts == EvalCounts(2, 1, 1, 1, 2)


def test_wrong_substitute_counts_identification_only():
    instance = gold_instance()
    counts = score_outcome(outcome_for(instance, [("approves", "green-lights")]), instance)
    assert counts == EvalCounts(2, 1, 1, 0, 0)


def test_substitute_match_is_case_insensitive():
    instance = gold_instance()
    counts = score_outcome(outcome_for(instance, [("approves", "Allows")]), instance)
    assert counts.correct_simp == 1


def test_edit_on_non_gold_word_increments_q_only():
    instance = gold_instance()
    token = next(t for t in tokenize(instance.sentence) if t.text == "day")
    spurious = Edit("day", (token.start, token.end), "moment")
    counts = score_outcome(outcome_for(instance, [], extra_edits=(spurious,)), instance)
    assert counts == EvalCounts(2, 1, 0, 0, 0)


def test_each_gold_word_credited_once():
    instance = gold_instance()
    token = next(t for t in tokenize(instance.sentence) if t.text == "approves")
    duplicate = (
        Edit("approves", (token.start, token.end), "allows"),
        Edit("approves", (token.start, token.end), "agrees"),
    )
    outcome = SimplificationOutcome(
        original=instance.sentence, simplified=instance.sentence,
        edits=duplicate, mode=Mode.COLLS,
    )
    counts = score_outcome(outcome, instance)
    assert counts.pred_q == 2
    assert counts.correct_cw == 1
    assert counts.correct_simp == 1


def test_duplicate_surfaces_resolved_by_span():
    instance = build_instance("dup", Genre.NEWS, [("grave", 5, ["serious"]), ("grave", 7, ["somber"])])
    counts = score_outcome(
        outcome_for(instance, []), instance
    )
    assert counts.gold_p == 2
    # edit on the second occurrence credits the second gold entry
    second = instance.complex_words[1]
    edit = Edit("grave", second.span, "somber")
    outcome = SimplificationOutcome(instance.sentence, instance.sentence, (edit,), Mode.COLLS)
    counts = score_outcome(outcome, instance)
    assert counts == EvalCounts(2, 1, 1, 1, 7)


def test_sentence_mismatch_raises():
    instance = gold_instance()
    outcome = SimplificationOutcome("another sentence", "another sentence", (), Mode.COLLS)
    with pytest.raises(InputError):
        score_outcome(outcome, instance)


# -- f1_scores -----------------------------------------------------------------

def test_f1_hand_arithmetic():
    scores = f1_scores(EvalCounts(2, 2, 1, 1, 0))
    assert scores.precision == 0.5
    assert scores.recall == 0.5
    assert scores.f1 == 0.5


def test_weighted_scores_hand_arithmetic():
    scores = f1_scores(EvalCounts(1, 1, 1, 1, 18))
    assert scores.precision_w == pytest.approx(0.9)
    assert scores.recall_w == pytest.approx(0.9)
    assert scores.f1_20 == pytest.approx(0.9)


def test_full_weights_make_f1_20_equal_f1():
    counts = EvalCounts(4, 3, 3, 2, 2 * 20)
    scores = f1_scores(counts)
    assert scores.f1_20 == pytest.approx(scores.f1)


def test_zero_denominators_yield_zero():
    scores = f1_scores(EvalCounts(0, 0, 0, 0, 0))
    assert scores == f1_scores(EvalCounts(0, 0, 0, 0, 0))
    assert scores.precision == scores.recall == scores.f1 == 0.0
    assert scores.f1_20 == 0.0


_counts_strategy = st.integers(min_value=0, max_value=40).flatmap(
    lambda p: st.integers(min_value=0, max_value=40).flatmap(
        lambda q: st.integers(min_value=0, max_value=min(p, q)).flatmap(
            lambda correct: st.tuples(
                st.just(p), st.just(q), st.just(correct),
                st.integers(min_value=0, max_value=correct * 20),
            )
        )
    )
)


@settings(max_examples=300, deadline=None)
@given(_counts_strategy)
def test_f1_matches_independent_oracle(args):
    p, q, correct, weight = args
    counts = EvalCounts(p, q, correct, correct, weight)
    scores = f1_scores(counts)
    expected = oracle_f1(p, q, correct, weight)
    assert scores.precision == pytest.approx(expected["precision"], abs=1e-12)
    assert scores.recall == pytest.approx(expected["recall"], abs=1e-12)
    assert scores.f1 == pytest.approx(expected["f1"], abs=1e-12)
    assert scores.f1_20 == pytest.approx(expected["f1_20"], abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(_counts_strategy)
def test_weighted_rates_never_exceed_unweighted(args):
    p, q, correct, weight = args
    scores = f1_scores(EvalCounts(p, q, correct, correct, weight))
    assert 0.0 <= scores.precision_w <= scores.precision + 1e-15
    assert 0.0 <= scores.recall_w <= scores.recall + 1e-15


# -- aggregate -------------------------------------------------------------------

def test_single_instance_micro_equals_macro():
    counts = [EvalCounts(4, 3, 3, 2, 25)]
    micro = aggregate(counts, MetricConfig(aggregation=MICRO))
    macro = aggregate(counts, MetricConfig(aggregation=MACRO))
    assert micro.f1 == pytest.approx(macro.f1)
    assert micro.f1_20 == pytest.approx(macro.f1_20)


def test_macro_mean_of_perfect_and_zero():
    perfect = EvalCounts(2, 2, 2, 2, 40)
    zero = EvalCounts(2, 2, 0, 0, 0)
    row = aggregate([perfect, zero], MetricConfig(aggregation=MACRO))
    assert row.f1 == pytest.approx(0.5)


def test_micro_summed_counts():
    a = EvalCounts(4, 2, 2, 2, 0)
    b = EvalCounts(4, 6, 2, 2, 0)
    row = aggregate([a, b], MetricConfig(aggregation=MICRO))
    assert row.precision == pytest.approx(0.5)
    assert row.recall == pytest.approx(0.5)
    assert row.f1 == pytest.approx(0.5)
    assert (row.num_cw, row.correct_cw, row.correct_simp) == (8, 4, 4)


def test_sum_counts_componentwise():
    total = sum_counts([EvalCounts(1, 2, 1, 1, 5), EvalCounts(3, 1, 1, 0, 0)])
    assert total == EvalCounts(4, 3, 2, 1, 5)


# -- emission --------------------------------------------------------------------

def test_report_emission_formats():
    row = aggregate([EvalCounts(4, 3, 3, 2, 25)], MetricConfig(), label="demo")
    table = report_table([row])
    assert "NumCW" in table and "F1-20" in table and "demo" in table
    csv_text = report_csv([row])
    assert csv_text.splitlines()[0].startswith("Label,Agg,NumCW,CorrectCW,CorrectSimp,F1,F1-20")
    import json

    payload = json.loads(report_json([row]))
    assert payload[0]["num_cw"] == 3
    assert set(payload[0]) >= {"precision", "recall", "f1", "precision_w", "recall_w", "f1_20"}
