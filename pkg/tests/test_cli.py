import io
import json

import pytest
from click.testing import CliRunner

from _cases import EXPECTED, SENTENCES, case_dataset, case_script
from _oracles import oracle_f1
from conftest import wikinews_table_fixture, write_provider
from lexsimp.cli import main
from lexsimp.corpus import save_dataset
from lexsimp.pipeline import PipelineConfig
from lexsimp.promptkit import PromptRole, default_bank, render


@pytest.fixture
def runner():
    return CliRunner()


def write_dataset(path, instances) -> str:
    buffer = io.BytesIO()
    save_dataset(instances, buffer)
    path.write_bytes(buffer.getvalue())
    return str(path)


@pytest.fixture
def case_files(tmp_path):
    dataset = write_dataset(tmp_path / "cases.ndjson", case_dataset())
    provider = write_provider(tmp_path / "provider.json", case_script())
    return dataset, provider


# -- stats ----------------------------------------------------------------------

def test_stats_reproduces_reference_counts(tmp_path, runner):
    dataset = write_dataset(tmp_path / "wn.ndjson", wikinews_table_fixture())
    result = runner.invoke(main, ["stats", "--dataset", dataset])
    assert result.exit_code == 0, result.output
    line = [l for l in result.output.splitlines() if l.startswith("wikinews")][0]
    assert line.split() == ["wikinews", "100", "412", "2", "13", "6.1"]


def test_stats_json_format(tmp_path, runner):
    dataset = write_dataset(tmp_path / "wn.ndjson", wikinews_table_fixture())
    result = runner.invoke(main, ["stats", "--dataset", dataset, "--format", "json"])
    assert result.exit_code == 0
    rows = json.loads(result.output)
    assert rows[0] == {
        "dataset": "wikinews", "noi": 100, "noc": 412,
        "min_subs": 2, "max_subs": 13, "avg_subs": 6.1,
    }


# -- run -------------------------------------------------------------------------

def test_run_colls_golden_outcomes(case_files, runner):
    dataset, provider = case_files
    result = runner.invoke(main, ["run", "--dataset", dataset, "--provider", provider, "--mode", "colls"])
    assert result.exit_code == 0, result.output
    lines = [json.loads(line) for line in result.output.splitlines() if line.strip()]
    assert len(lines) == 5
    by_id = {record["id"]: record for record in lines}
    for iid, expected in EXPECTED.items():
        record = by_id[iid]
        assert record["simplified"] == expected["simplified"]
        assert [(e["original_surface"], e["substitute"]) for e in record["edits"]] == expected["edits"]
        assert record["abandoned"] == expected["abandoned"]
    # the scripted plan includes both abandonment paths and a rank-broken tie
    assert by_id["inst1"]["abandoned"] == ["position"]
    tie_edit = by_id["inst3"]["edits"][0]
    yes_votes = tie_edit["stage_trace"]["validation_yes"]
    assert yes_votes["found"] == yes_votes["discovered"] == 2


def test_run_repeated_invocations_byte_identical(case_files, runner, tmp_path):
    dataset, provider = case_files
    args = ["run", "--dataset", dataset, "--provider", provider, "--mode", "colls"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == second.exit_code == 0
    assert first.output == second.output
    out_path = tmp_path / "out.ndjson"
    third = runner.invoke(main, args + ["--out", str(out_path)])
    assert third.exit_code == 0
    assert out_path.read_text() == first.output


def test_run_json_array_format(case_files, runner):
    dataset, provider = case_files
    result = runner.invoke(
        main, ["run", "--dataset", dataset, "--provider", provider, "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    records = json.loads(result.output)
    assert [r["id"] for r in records] == list(SENTENCES)


def test_run_parallel_jobs_keep_order(case_files, runner):
    dataset, provider = case_files
    serial = runner.invoke(main, ["run", "--dataset", dataset, "--provider", provider])
    parallel = runner.invoke(main, ["run", "--dataset", dataset, "--provider", provider, "--jobs", "4"])
    assert parallel.exit_code == 0, parallel.output
    assert parallel.output == serial.output


def test_run_direct_mode(tmp_path, runner):
    instances = case_dataset()[:1]
    dataset = write_dataset(tmp_path / "one.ndjson", instances)
    sentence = instances[0].sentence
    bank = default_bank()
    prompt = render(
        PromptRole.ONE_STEP_DIRECT, {"Input_sentence": sentence},
        bank.demos_for(PromptRole.ONE_STEP_DIRECT), 4, bank=bank,
    )
    provider = write_provider(
        tmp_path / "p.json", {prompt.fingerprint: ["He was named to the position in June of 2014."]}
    )
    result = runner.invoke(main, ["run", "--dataset", dataset, "--provider", provider, "--mode", "direct"])
    assert result.exit_code == 0, result.output
    record = json.loads(result.output.splitlines()[0])
    assert record["mode"] == "direct"
    assert [(e["original_surface"], e["substitute"]) for e in record["edits"]] == [
        ("appointed", "named")
    ]


# -- evaluate / report --------------------------------------------------------------

EXPECTED_MICRO = oracle_f1(gold_p=12, pred_q=8, correct_simp=8, weight_sum=73)


def run_and_evaluate(runner, tmp_path, dataset, provider, fmt="json", aggregation="micro"):
    outcomes_path = tmp_path / "outcomes.ndjson"
    run_result = runner.invoke(
        main, ["run", "--dataset", dataset, "--provider", provider, "--out", str(outcomes_path)]
    )
    assert run_result.exit_code == 0, run_result.output
    return runner.invoke(
        main,
        ["evaluate", "--dataset", dataset, "--outcomes", str(outcomes_path),
         "--format", fmt, "--aggregation", aggregation],
    )


def test_evaluate_micro_matches_hand_counts(case_files, runner, tmp_path):
    dataset, provider = case_files
    result = run_and_evaluate(runner, tmp_path, dataset, provider)
    assert result.exit_code == 0, result.output
    (row,) = json.loads(result.output)
    assert (row["num_cw"], row["correct_cw"], row["correct_simp"]) == (8, 8, 8)
    assert row["precision"] == pytest.approx(EXPECTED_MICRO["precision"])
    assert row["recall"] == pytest.approx(EXPECTED_MICRO["recall"])
    assert row["f1"] == pytest.approx(EXPECTED_MICRO["f1"])
    assert row["f1_20"] == pytest.approx(EXPECTED_MICRO["f1_20"])


def test_evaluate_both_aggregations(case_files, runner, tmp_path):
    dataset, provider = case_files
    result = run_and_evaluate(runner, tmp_path, dataset, provider, aggregation="both")
    rows = json.loads(result.output)
    assert [row["aggregation"] for row in rows] == ["micro", "macro"]


def test_evaluate_table_and_csv(case_files, runner, tmp_path):
    dataset, provider = case_files
    table = run_and_evaluate(runner, tmp_path, dataset, provider, fmt="table")
    assert "NumCW" in table.output and "F1-20" in table.output
    csv_out = run_and_evaluate(runner, tmp_path, dataset, provider, fmt="csv")
    assert csv_out.output.splitlines()[0].startswith("Label,Agg,NumCW")


def test_report_rerenders_saved_json(case_files, runner, tmp_path):
    dataset, provider = case_files
    saved = tmp_path / "report.json"
    result = run_and_evaluate(runner, tmp_path, dataset, provider)
    saved.write_text(result.output)
    rerender = runner.invoke(main, ["report", "--input", str(saved), "--format", "csv"])
    assert rerender.exit_code == 0
    assert rerender.output.splitlines()[0].startswith("Label,Agg,NumCW")


def test_evaluate_unknown_id_exits_1(case_files, runner, tmp_path):
    dataset, _ = case_files
    outcomes = tmp_path / "bad.ndjson"
    outcomes.write_text(json.dumps({
        "id": "ghost", "mode": "colls", "original": "x", "simplified": "x",
        "edits": [], "abandoned": [], "diagnostics": [],
    }) + "\n")
    result = runner.invoke(main, ["evaluate", "--dataset", dataset, "--outcomes", str(outcomes)])
    assert result.exit_code == 1
    assert "ghost" in result.output or "ghost" in (result.stderr or "")


# -- ablate ------------------------------------------------------------------------

def test_ablate_validation_sweep(tmp_path, runner):
    # one-sentence dataset; validation responses come from a wildcard queue
    instances = case_dataset()[:1]
    dataset = write_dataset(tmp_path / "one.ndjson", instances)
    sentence = instances[0].sentence
    script: dict[str, list[str]] = {"*": ["##YES##"] * 60}
    config = PipelineConfig()
    from lexsimp.pipeline import cwi_prompts, sg_prompts
    from _cases import span_of

    for prompt in cwi_prompts(sentence, config):
        script.setdefault(prompt.fingerprint, []).extend(["appointed"] * 7)
    for prompt in sg_prompts(sentence, span_of(sentence, "appointed"), config):
        script.setdefault(prompt.fingerprint, []).extend(["named"] * 7)
    provider = write_provider(tmp_path / "p.json", script)

    result = runner.invoke(
        main, ["ablate", "--dataset", dataset, "--provider", provider, "--stage", "validation"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert len(lines) == 8  # header + N=0..6
    json_result = runner.invoke(
        main,
        ["ablate", "--dataset", dataset, "--provider", provider, "--stage", "validation",
         "--format", "json"],
    )
    rows = json.loads(json_result.output)
    assert [row["n"] for row in rows] == [0, 1, 2, 3, 4, 5, 6]
    assert [row["m"] for row in rows] == [0, 1, 1, 2, 2, 3, 3]
    assert all(row["num_cw"] == 1 for row in rows)  # always simplified with all-YES votes


def test_ablate_cwi_sweep_has_six_rows(tmp_path, runner):
    instances = case_dataset()[:1]
    dataset = write_dataset(tmp_path / "one.ndjson", instances)
    provider = write_provider(tmp_path / "p.json", {"*": [""] * 200})
    result = runner.invoke(
        main,
        ["ablate", "--dataset", dataset, "--provider", provider, "--stage", "cwi",
         "--format", "json"],
    )
    assert result.exit_code == 0, result.output
    rows = json.loads(result.output)
    assert [row["n"] for row in rows] == [1, 2, 3, 4, 5, 6]
    assert all(row["num_cw"] == 0 for row in rows)  # empty CWI answers


# -- usage errors -----------------------------------------------------------------------

def test_unknown_flag_usage_error(runner):
    result = runner.invoke(main, ["stats", "--bogus"])
    assert result.exit_code == 2


def test_missing_file_usage_error(runner):
    result = runner.invoke(main, ["stats", "--dataset", "/nonexistent/x.ndjson"])
    assert result.exit_code == 2


# -- annotation workflow commands ---------------------------------------------------------

def test_candidates_and_preannotate_cli(tmp_path, runner):
    sentence = "The text is an indication that it was premeditated, Goodyear said."
    start = sentence.index("indication")
    source_record = {
        "id": "s1", "genre": "wikinews", "sentence": sentence,
        "complex_words": [{"surface": "indication", "span": [start, start + len("indication")], "weight": 9}],
    }
    sources_path = tmp_path / "sources.ndjson"
    sources_path.write_text(json.dumps(source_record) + "\n")
    generators_path = tmp_path / "gens.json"
    generators_path.write_text(json.dumps([
        {"instance_id": "s1", "span": [start, start + len("indication")],
         "lists": [["sign", "hint"], ["sign"], ["sign", "clue"]]}
    ]))
    tasks_path = tmp_path / "tasks.json"
    result = runner.invoke(main, [
        "candidates", "--sources", str(sources_path),
        "--generators", str(generators_path), "--out", str(tasks_path),
    ])
    assert result.exit_code == 0, result.output
    tasks_data = json.loads(tasks_path.read_text())
    (task,) = tasks_data["tasks"]
    assert task["pseudo_substitutes"][0] == "sign"

    # scripted pre-annotation: everything YES via wildcard
    provider_a = write_provider(tmp_path / "a.json", {"*": ["##YES##"] * 20})
    provider_b = write_provider(tmp_path / "b.json", {"*": ["##NO##"] * 20})
    annotated_path = tmp_path / "tasks_pre.json"
    result = runner.invoke(main, [
        "preannotate", "--tasks", str(tasks_path),
        "--provider", provider_a, "--provider", provider_b,
        "--out", str(annotated_path),
    ])
    assert result.exit_code == 0, result.output
    annotated = json.loads(annotated_path.read_text())
    grid = annotated["tasks"][0]["recommendations"]["sign"]
    assert grid["A"] == {"direct": "yes", "cot": "yes"}
    assert grid["B"] == {"direct": "no", "cot": "no"}
