"""Operator entry point: dataset stats, pipeline runs, evaluation, ablation
sweeps, and the annotation service.

Outputs are deterministic for a given manifest and scripted provider: work
is ordered by input position regardless of worker completion order, and no
timestamps are embedded. Exit codes: 0 ok, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click

from . import metrics, pipeline
from .annostudio import models as anno_models
from .annostudio import ops as anno_ops
from .annostudio.store import AnnoStore
from .corpus import Instance, compute_stats, load_dataset
from .ensemble import VoteConfig
from .errors import InputError, LexsimpError
from .metrics import MetricConfig, ReportRow
from .pipeline import Mode, PipelineConfig
from .pipeline import GENERATE_DECODING
from .promptkit import PromptBank, default_bank, load_bank_file, parse_word_list
from .providers import ChatRequest, Decoding, ProviderConfig, complete, load_provider

FORMAT_CHOICES = click.Choice(["table", "json", "csv"])


@dataclass(frozen=True)
class RunManifest:
    mode: str
    provider_path: str
    dataset_path: str
    config: PipelineConfig
    out_path: str | None
    seed: int | None


def _runtime_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LexsimpError as exc:
            click.echo(
                json.dumps({"error": str(exc), "kind": type(exc).__name__}), err=True
            )
            sys.exit(1)

    return wrapper


def _load_instances(path: str) -> list[Instance]:
    with open(path, "rb") as fp:
        return load_dataset(fp)


def _load_bank(path: str | None) -> PromptBank:
    return load_bank_file(path) if path else default_bank()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
def main() -> None:
    """Lexical simplification toolkit: pipelines, metrics, annotation studio."""


# --------------------------------------------------------------------------
# stats
# --------------------------------------------------------------------------

@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True), help="NDJSON dataset file.")
@click.option("--format", "fmt", default="table", type=FORMAT_CHOICES, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@_runtime_errors
def stats(dataset: str, fmt: str, out: str | None) -> None:
    """Per-genre dataset statistics (instances, complex words, substitutes)."""
    instances = _load_instances(dataset)
    genres: list[str] = []
    for instance in instances:
        if instance.genre.value not in genres:
            genres.append(instance.genre.value)
    groups = [(g, [i for i in instances if i.genre.value == g]) for g in genres]
    if len(groups) != 1:
        groups.append(("all", instances))

    rows = []
    for label, members in groups:
        s = compute_stats(members)
        rows.append(
            {
                "dataset": label,
                "noi": s.num_instances,
                "noc": s.num_complex_words,
                "min_subs": s.min_subs,
                "max_subs": s.max_subs,
                "avg_subs": round(s.avg_subs, 1) if s.avg_subs is not None else None,
            }
        )
    if fmt == "json":
        _emit(json.dumps(rows, indent=2), out)
    elif fmt == "csv":
        lines = ["Dataset,NOI,NOC,Min,Max,Avg"]
        for r in rows:
            lines.append(
                f"{r['dataset']},{r['noi']},{r['noc']},"
                f"{r['min_subs']},{r['max_subs']},{r['avg_subs']}"
            )
        _emit("\n".join(lines) + "\n", out)
    else:
        header = f"{'Dataset':<12}{'NOI':>6}{'NOC':>6}{'Min':>5}{'Max':>5}{'Avg':>6}"
        lines = [header]
        for r in rows:
            avg = "-" if r["avg_subs"] is None else f"{r['avg_subs']:.1f}"
            mn = "-" if r["min_subs"] is None else str(r["min_subs"])
            mx = "-" if r["max_subs"] is None else str(r["max_subs"])
            lines.append(
                f"{r['dataset']:<12}{r['noi']:>6}{r['noc']:>6}{mn:>5}{mx:>5}{avg:>6}"
            )
        _emit("\n".join(lines) + "\n", out)


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------

def _pipeline_config(n: int, m: int, cap: int | None, shots: int | None) -> PipelineConfig:
    vote = VoteConfig(n, m)
    return PipelineConfig(
        cwi_vote=vote,
        sg_vote=vote,
        val_vote=vote,
        candidate_cap=cap,
        baseline_shots=4 if shots is None else shots,
    )


def _simplify_instance(
    instance: Instance,
    provider: ProviderConfig,
    mode: Mode,
    config: PipelineConfig,
    bank: PromptBank,
    shots: int | None,
    seed: int | None,
) -> dict:
    if mode is Mode.COLLS:
        outcome = pipeline.run_colls(instance.sentence, provider, config, bank=bank, seed=seed)
    else:
        outcome = pipeline.simplify_single_prompt(
            instance.sentence, provider, mode, shots, config=config, bank=bank, seed=seed
        )
    return {"id": instance.id, **pipeline.outcome_to_dict(outcome)}


def _run_over(
    instances: list[Instance],
    provider: ProviderConfig,
    mode: Mode,
    config: PipelineConfig,
    bank: PromptBank,
    shots: int | None,
    seed: int | None,
    jobs: int,
) -> list[dict]:
    worker = functools.partial(
        _simplify_instance, provider=provider, mode=mode, config=config,
        bank=bank, shots=shots, seed=seed,
    )
    if jobs <= 1:
        return [worker(instance) for instance in instances]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, instances))


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--provider", "provider_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice([m.value for m in Mode]), default="colls", show_default=True)
@click.option("--n", type=int, default=3, show_default=True, help="Voters per stage.")
@click.option("--m", type=int, default=2, show_default=True, help="Acceptance threshold.")
@click.option("--shots", type=int, default=None, help="Demonstrations for direct/cot modes.")
@click.option("--cap", type=int, default=None, help="Max substitutes entering validation.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--bank", "bank_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "json"]),
              show_default=True, help="One outcome per line, or one JSON array.")
@click.option("--out", type=click.Path(), default=None)
@_runtime_errors
def run(
    dataset: str,
    provider_path: str,
    mode: str,
    n: int,
    m: int,
    shots: int | None,
    cap: int | None,
    jobs: int,
    seed: int | None,
    bank_path: str | None,
    fmt: str,
    out: str | None,
) -> None:
    """Simplify every dataset sentence; one JSON outcome per line."""
    config = _pipeline_config(n, m, cap, shots)
    manifest = RunManifest(mode, provider_path, dataset, config, out, seed)
    instances = _load_instances(manifest.dataset_path)
    provider = load_provider(manifest.provider_path)
    bank = _load_bank(bank_path)
    records = _run_over(instances, provider, Mode(mode), config, bank, shots, seed, jobs)
    if fmt == "json":
        text = json.dumps(records, ensure_ascii=False, indent=2) + "\n"
    else:
        text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    _emit(text, out)


# --------------------------------------------------------------------------
# evaluate / report
# --------------------------------------------------------------------------

def _read_outcomes(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fp:
        for line in fp:
            if line.strip():
                records.append(json.loads(line))
    return records


def _score_records(
    records: list[dict], by_id: dict[str, Instance], config: MetricConfig
) -> list[metrics.EvalCounts]:
    counts = []
    for record in records:
        instance = by_id.get(record.get("id"))
        if instance is None:
            raise InputError(f"outcome id {record.get('id')!r} not in dataset")
        outcome = pipeline.outcome_from_dict(record)
        counts.append(metrics.score_outcome(outcome, instance, config))
    return counts


def _emit_report(rows: list[ReportRow], fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit(metrics.report_json(rows), out)
    elif fmt == "csv":
        _emit(metrics.report_csv(rows), out)
    else:
        _emit(metrics.report_table(rows) + "\n", out)


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--outcomes", required=True, type=click.Path(exists=True))
@click.option("--label", default="run", show_default=True)
@click.option(
    "--aggregation", default="both", show_default=True,
    type=click.Choice([metrics.MICRO, metrics.MACRO, "both"]),
)
@click.option("--w-max", type=int, default=20, show_default=True)
@click.option("--format", "fmt", default="table", type=FORMAT_CHOICES, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@_runtime_errors
def evaluate(
    dataset: str,
    outcomes: str,
    label: str,
    aggregation: str,
    w_max: int,
    fmt: str,
    out: str | None,
) -> None:
    """Score a run's outcomes against the gold dataset."""
    instances = _load_instances(dataset)
    by_id = {instance.id: instance for instance in instances}
    records = _read_outcomes(outcomes)
    modes = [metrics.MICRO, metrics.MACRO] if aggregation == "both" else [aggregation]
    rows = []
    for agg in modes:
        config = MetricConfig(w_max=w_max, aggregation=agg)
        counts = _score_records(records, by_id, config)
        rows.append(metrics.aggregate(counts, config, label=label))
    _emit_report(rows, fmt, out)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="A report previously saved with --format json.")
@click.option("--format", "fmt", default="table", type=FORMAT_CHOICES, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@_runtime_errors
def report(input_path: str, fmt: str, out: str | None) -> None:
    """Re-render a saved JSON report as a table or CSV."""
    with open(input_path, encoding="utf-8") as fp:
        data = json.load(fp)
    rows = [ReportRow(**record) for record in data]
    _emit_report(rows, fmt, out)


# --------------------------------------------------------------------------
# ablate
# --------------------------------------------------------------------------

@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--provider", "provider_path", required=True, type=click.Path(exists=True))
@click.option("--stage", required=True, type=click.Choice(["cwi", "sg", "validation"]))
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--bank", "bank_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", default="table", type=FORMAT_CHOICES, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@_runtime_errors
def ablate(
    dataset: str,
    provider_path: str,
    stage: str,
    jobs: int,
    seed: int | None,
    bank_path: str | None,
    fmt: str,
    out: str | None,
) -> None:
    """Sweep one stage's voter count N (m = ceil(N/2)), others fixed at 3/2.

    N=0 is allowed only for validation and means: skip validation, take the
    top-ranked generated substitute.
    """
    instances = _load_instances(dataset)
    bank = _load_bank(bank_path)
    sweep = range(0, 7) if stage == "validation" else range(1, 7)
    results = []
    for n in sweep:
        m = math.ceil(n / 2)
        base = VoteConfig(3, 2)
        swept = None if n == 0 else VoteConfig(n, m)
        config = PipelineConfig(
            cwi_vote=swept if stage == "cwi" else base,
            sg_vote=swept if stage == "sg" else base,
            val_vote=swept if stage == "validation" else base,
        )
        provider = load_provider(provider_path)
        records = _run_over(instances, provider, Mode.COLLS, config, bank, None, seed, jobs)
        by_id = {instance.id: instance for instance in instances}
        counts = _score_records(records, by_id, MetricConfig())
        row = metrics.aggregate(counts, MetricConfig(), label=f"{stage}:N={n}")
        results.append(
            {
                "stage": stage,
                "n": n,
                "m": m,
                "num_cw": row.num_cw,
                "correct_cw": row.correct_cw,
                "correct_simp": row.correct_simp,
                "f1": row.f1,
                "f1_20": row.f1_20,
            }
        )
    if fmt == "json":
        _emit(json.dumps(results, indent=2), out)
    elif fmt == "csv":
        lines = ["Stage,N,M,NumCW,CorrectCW,CorrectSimp,F1,F1-20"]
        for r in results:
            lines.append(
                f"{r['stage']},{r['n']},{r['m']},{r['num_cw']},{r['correct_cw']},"
                f"{r['correct_simp']},{r['f1']:.3f},{r['f1_20']:.3f}"
            )
        _emit("\n".join(lines) + "\n", out)
    else:
        header = (
            f"{'Stage':<12}{'N':>3}{'M':>3}{'NumCW':>7}{'CorrectCW':>11}"
            f"{'CorrectSimp':>13}{'F1':>8}{'F1-20':>8}"
        )
        lines = [header]
        for r in results:
            lines.append(
                f"{r['stage']:<12}{r['n']:>3}{r['m']:>3}{r['num_cw']:>7}"
                f"{r['correct_cw']:>11}{r['correct_simp']:>13}"
                f"{r['f1']:>8.3f}{r['f1_20']:>8.3f}"
            )
        _emit("\n".join(lines) + "\n", out)


# --------------------------------------------------------------------------
# annotation workflow: candidates, preannotate, serve
# --------------------------------------------------------------------------

def _load_sources_file(path: str) -> list[anno_models.SourceInstance]:
    with open(path, encoding="utf-8") as fp:
        return anno_models.load_sources(fp)


def _generate_lists(
    sources: list[anno_models.SourceInstance],
    provider_paths: tuple[str, ...],
    bank: PromptBank,
    seed: int | None,
) -> dict:
    """Produce the 3 generator lists per target by prompting each provider once."""
    generators = [load_provider(path) for path in provider_paths]
    decoding = Decoding(
        GENERATE_DECODING.temperature, GENERATE_DECODING.max_tokens, seed
    )
    outputs = {}
    for source in sources:
        for target in source.targets:
            prompt = pipeline.sg_prompts(source.sentence, target.span, bank=bank)[0]
            lists = []
            for generator in generators:
                response = complete(generator, ChatRequest(prompt, decoding))
                lists.append(parse_word_list(response.text))
            outputs[(source.id, target.span)] = lists
    return outputs


@main.command()
@click.option("--sources", "sources_path", required=True, type=click.Path(exists=True),
              help="NDJSON sentences with weighted complex words (no substitutes).")
@click.option("--generators", "generators_path", type=click.Path(exists=True), default=None,
              help="JSON records {instance_id, span, lists: [3 candidate lists]}.")
@click.option("--provider", "provider_paths", multiple=True, type=click.Path(exists=True),
              help="Three provider configs to generate candidate lists live.")
@click.option("--seed", type=int, default=None)
@click.option("--bank", "bank_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@_runtime_errors
def candidates(
    sources_path: str,
    generators_path: str | None,
    provider_paths: tuple[str, ...],
    seed: int | None,
    bank_path: str | None,
    out: str,
) -> None:
    """Build annotation tasks with merged pseudo-substitute pools."""
    sources = _load_sources_file(sources_path)
    bank = _load_bank(bank_path)
    if generators_path:
        with open(generators_path, encoding="utf-8") as fp:
            outputs = anno_ops.generator_outputs_from_records(json.load(fp))
    elif len(provider_paths) == 3:
        outputs = _generate_lists(sources, provider_paths, bank, seed)
    else:
        raise InputError("pass --generators FILE or exactly three --provider configs")
    tasks = anno_ops.build_tasks(sources, outputs)
    payload = {
        "sources": [anno_models.source_to_dict(s) for s in sources],
        "tasks": [anno_models.task_to_dict(t) for t in tasks],
    }
    Path(out).write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
    click.echo(f"wrote {len(tasks)} tasks to {out}")


def _load_tasks_file(path: str) -> tuple[list[anno_models.AnnotationTask], list[anno_models.SourceInstance]]:
    with open(path, encoding="utf-8") as fp:
        data = json.load(fp)
    sources = [anno_models.source_from_dict(s) for s in data["sources"]]
    tasks = [anno_models.task_from_dict(t) for t in data["tasks"]]
    return tasks, sources


@main.command()
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--provider", "provider_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="Two provider configs (models A and B).")
@click.option("--shots", type=int, default=None)
@click.option("--bank", "bank_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
@_runtime_errors
def preannotate(
    tasks_path: str,
    provider_paths: tuple[str, ...],
    shots: int | None,
    bank_path: str | None,
    out: str,
) -> None:
    """Attach 2x2 machine yes/no signals to every pseudo substitute."""
    tasks, sources = _load_tasks_file(tasks_path)
    if len(provider_paths) != 2:
        raise InputError("preannotate needs exactly two --provider configs")
    pair = [load_provider(path) for path in provider_paths]
    annotated = anno_ops.preannotate(tasks, sources, pair, bank=_load_bank(bank_path), shots=shots)
    payload = {
        "sources": [anno_models.source_to_dict(s) for s in sources],
        "tasks": [anno_models.task_to_dict(t) for t in annotated],
    }
    Path(out).write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
    click.echo(f"annotated {len(annotated)} tasks -> {out}")


@main.command()
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--journal", required=True, type=click.Path())
@click.option("--ui", "ui_dir", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8470, show_default=True)
@click.option("--adjudicator", default=None)
@click.option("--policy", default="latest", type=click.Choice(["latest", "majority"]), show_default=True)
@_runtime_errors
def serve(
    tasks_path: str,
    journal: str,
    ui_dir: str | None,
    host: str,
    port: int,
    adjudicator: str | None,
    policy: str,
) -> None:
    """Run the annotation HTTP service (and optionally host the UI bundle)."""
    import uvicorn

    from .annostudio.server import create_app

    tasks, sources = _load_tasks_file(tasks_path)
    store = AnnoStore(tasks, sources, journal_path=journal)
    app = create_app(store, adjudicator=adjudicator, policy=policy, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
