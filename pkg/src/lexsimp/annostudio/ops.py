"""Batch operations of the annotation workflow.

``build_tasks`` fuses three generators' candidate lists per target into at
most 12 pseudo substitutes. ``preannotate`` asks two providers, each with a
plain and a step-by-step judging prompt, for advisory yes/no signals.
``export_dataset`` turns human verdicts into a corpus-valid dataset, and
``consistency_report`` measures machine/human agreement.

Human verdicts are authoritative everywhere; machine signals are advisory.
The adjudicating verdict for a substitute is, by default, the latest one
recorded by any annotator; pass ``adjudicator`` to pin one annotator, or
``policy="majority"`` to take the majority of per-annotator latest verdicts.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .. import providers
from ..corpus import GoldComplexWord, Instance, validate_instance
from ..ensemble import combine_score
from ..errors import IncompleteError, InputError, ParseError, TransportError
from ..promptkit import PromptBank, PromptRole, default_bank, mark_target, parse_yes_no, render
from ..providers import ChatRequest, Decoding, ProviderConfig
from .models import (
    MAX_PSEUDO_SUBSTITUTES,
    MODEL_KEYS,
    STYLE_KEYS,
    AddedSubstitute,
    AnnotationTask,
    ConsistencyReport,
    Judgment,
    SourceInstance,
    task_id_for,
)

ANNOTATE_DECODING = Decoding(temperature=0.0, max_tokens=512)

GeneratorOutputs = Mapping[tuple[str, tuple[int, int]], Sequence[Sequence[str]]]


def generator_outputs_from_records(records: Iterable[Mapping]) -> dict:
    """Index {"instance_id", "span", "lists"} records by (instance_id, span)."""
    out: dict[tuple[str, tuple[int, int]], list[list[str]]] = {}
    for record in records:
        key = (str(record["instance_id"]), (int(record["span"][0]), int(record["span"][1])))
        out[key] = [list(candidates) for candidates in record["lists"]]
    return out


def build_tasks(
    sources: Sequence[SourceInstance], generator_outputs: GeneratorOutputs
) -> list[AnnotationTask]:
    """One task per target, with combination-scored pseudo substitutes."""
    tasks = []
    for source in sources:
        for target in source.targets:
            key = (source.id, target.span)
            lists = generator_outputs.get(key)
            if lists is None or len(lists) != 3:
                raise InputError(
                    f"target {target.surface!r} in {source.id!r} needs exactly 3 generator lists"
                )
            surface_key = target.surface.casefold()
            cleaned = [
                [c for c in candidates if c.strip().casefold() != surface_key]
                for candidates in lists
            ]
            scored = combine_score(cleaned, k=MAX_PSEUDO_SUBSTITUTES)
            task = AnnotationTask(
                task_id=task_id_for(source.id, target.span),
                instance_id=source.id,
                target=target,
                pseudo_substitutes=tuple(s.text for s in scored),
            )
            task.validate()
            tasks.append(task)
    return tasks


_STYLE_ROLES = {
    "direct": PromptRole.ANNOTATE_DIRECT,
    "cot": PromptRole.ANNOTATE_COT,
}


def preannotate(
    tasks: Sequence[AnnotationTask],
    sources: Sequence[SourceInstance],
    provider_pair: Mapping[str, ProviderConfig] | Sequence[ProviderConfig],
    *,
    bank: PromptBank | None = None,
    shots: int | None = None,
) -> list[AnnotationTask]:
    """Fill the 2x2 advisory signal grid for every (task, substitute)."""
    bank = bank or default_bank()
    if not isinstance(provider_pair, Mapping):
        if len(provider_pair) != len(MODEL_KEYS):
            raise InputError(f"expected {len(MODEL_KEYS)} providers, got {len(provider_pair)}")
        provider_pair = dict(zip(MODEL_KEYS, provider_pair))
    if set(provider_pair) != set(MODEL_KEYS):
        raise InputError(f"provider keys must be {MODEL_KEYS}, got {sorted(provider_pair)}")
    by_id = {source.id: source for source in sources}

    annotated = []
    for task in tasks:
        source = by_id.get(task.instance_id)
        if source is None:
            raise InputError(f"task {task.task_id!r} references unknown instance {task.instance_id!r}")
        marked = mark_target(source.sentence, task.target.span)
        recommendations: dict[str, dict[str, dict[str, str]]] = {}
        for substitute in task.pseudo_substitutes:
            grid: dict[str, dict[str, str]] = {}
            for model_key in MODEL_KEYS:
                provider = provider_pair[model_key]
                grid[model_key] = {}
                for style in STYLE_KEYS:
                    role = _STYLE_ROLES[style]
                    demos = bank.demos_for(role)
                    k = bank.shots_for(role) if shots is None else shots
                    prompt = render(
                        role, {"sentence": marked, "alternative": substitute}, demos,
                        min(k, len(demos)), bank=bank,
                    )
                    try:
                        response = providers.complete(provider, ChatRequest(prompt, ANNOTATE_DECODING))
                        grid[model_key][style] = "yes" if parse_yes_no(response.text) else "no"
                    except (TransportError, ParseError):
                        grid[model_key][style] = "failed"
            recommendations[substitute] = grid
        annotated.append(
            AnnotationTask(
                task_id=task.task_id,
                instance_id=task.instance_id,
                target=task.target,
                pseudo_substitutes=task.pseudo_substitutes,
                recommendations=recommendations,
            )
        )
    return annotated


def resolve_verdicts(
    judgments: Sequence[Judgment],
    *,
    adjudicator: str | None = None,
    policy: str = "latest",
) -> dict[tuple[str, str], str]:
    """Adjudicated verdict per (task_id, substitute key), from journal order."""
    if adjudicator is not None:
        judgments = [j for j in judgments if j.annotator_id == adjudicator]
    if policy == "majority":
        per_annotator: dict[tuple[str, str, str], str] = {}
        for judgment in judgments:
            key = (judgment.task_id, judgment.substitute.casefold(), judgment.annotator_id)
            per_annotator[key] = judgment.verdict
        tallies: dict[tuple[str, str], dict[str, int]] = {}
        for (task_id, sub_key, _), verdict in per_annotator.items():
            tally = tallies.setdefault((task_id, sub_key), {})
            tally[verdict] = tally.get(verdict, 0) + 1
        resolved = {}
        for key, tally in tallies.items():
            best = max(tally.values())
            winners = [v for v, count in tally.items() if count == best]
            resolved[key] = winners[0] if len(winners) == 1 else "UNSURE"
        return resolved
    return {(j.task_id, j.substitute.casefold()): j.verdict for j in judgments}


def export_dataset(
    tasks: Sequence[AnnotationTask],
    judgments: Sequence[Judgment],
    added: Sequence[AddedSubstitute],
    sources: Sequence[SourceInstance],
    *,
    force: bool = False,
    adjudicator: str | None = None,
    policy: str = "latest",
    w_max: int | None = None,
) -> list[Instance]:
    """Assemble the final dataset from YES verdicts.

    A target with no accepted substitute is dropped from its instance.
    Every exported instance is validated against the corpus invariants.
    """
    resolved = resolve_verdicts(judgments, adjudicator=adjudicator, policy=policy)
    judged = {(j.task_id, j.substitute.casefold()) for j in judgments}
    added_by_task: dict[str, list[AddedSubstitute]] = {}
    for item in added:
        added_by_task.setdefault(item.task_id, []).append(item)

    if not force:
        for task in tasks:
            pending = [
                sub
                for sub in list(task.pseudo_substitutes)
                + [a.text for a in added_by_task.get(task.task_id, [])]
                if (task.task_id, sub.casefold()) not in judged
            ]
            if pending:
                raise IncompleteError(
                    f"task {task.task_id!r} has unjudged substitutes: {pending[:3]}"
                )

    tasks_by_instance: dict[str, list[AnnotationTask]] = {}
    for task in tasks:
        tasks_by_instance.setdefault(task.instance_id, []).append(task)

    instances = []
    for source in sources:
        words = []
        for task in sorted(tasks_by_instance.get(source.id, []), key=lambda t: t.target.span):
            accepted = [
                sub
                for sub in task.pseudo_substitutes
                if resolved.get((task.task_id, sub.casefold())) == "YES"
            ]
            accepted += [
                item.text
                for item in added_by_task.get(task.task_id, [])
                if resolved.get((task.task_id, item.text.casefold())) == "YES"
            ]
            if not accepted:
                continue
            words.append(
                GoldComplexWord(
                    surface=task.target.surface,
                    span=task.target.span,
                    weight=task.target.weight,
                    substitutes=tuple(accepted),
                )
            )
        instance = Instance(
            id=source.id, genre=source.genre, sentence=source.sentence,
            complex_words=tuple(words),
        )
        validate_instance(instance, **({"w_max": w_max} if w_max is not None else {}))
        instances.append(instance)
    return instances


def consistency_report(
    tasks: Sequence[AnnotationTask],
    judgments: Sequence[Judgment],
    k: int,
    *,
    adjudicator: str | None = None,
    policy: str = "latest",
) -> ConsistencyReport:
    """Agreement between the machine signal consensus and human verdicts.

    A substitute is adopted when at least k of its 4 signals agree on yes or
    on no ("failed" never counts) and a human verdict of YES or NO exists;
    UNSURE and unjudged substitutes are excluded from both counts.
    """
    if k not in (3, 4):
        raise InputError(f"consistency threshold must be 3 or 4, got {k}")
    resolved = resolve_verdicts(judgments, adjudicator=adjudicator, policy=policy)
    adopted = 0
    agree = 0
    for task in tasks:
        for substitute in task.pseudo_substitutes:
            grid = task.recommendations.get(substitute)
            if not grid:
                continue
            signals = [
                grid.get(model, {}).get(style, "failed")
                for model in MODEL_KEYS
                for style in STYLE_KEYS
            ]
            yes_count = signals.count("yes")
            no_count = signals.count("no")
            if yes_count >= k:
                consensus = "yes"
            elif no_count >= k:
                consensus = "no"
            else:
                continue
            verdict = resolved.get((task.task_id, substitute.casefold()))
            if verdict not in ("YES", "NO"):
                continue
            adopted += 1
            if consensus == verdict.lower():
                agree += 1
    return ConsistencyReport(
        threshold=k, adopted=adopted, agree=agree,
        ratio=agree / adopted if adopted else 0.0,
    )


def audit_ratio(correct: int, total: int) -> float:
    """Bookkeeping helper for manual precision/coverage audits."""
    if not (0 <= correct <= total):
        raise InputError(f"need 0 <= correct <= total, got {correct}/{total}")
    return correct / total if total else 0.0
