"""Simplification pipelines.

Three modes produce a SimplificationOutcome for a sentence:

* ``direct`` / ``cot``: one prompt, whole-sentence rewrite, edits recovered
  afterwards by LCS alignment (``align_edits``).
* ``colls``: staged multi-voter pipeline. Complex words are identified by
  majority vote, substitutes are generated and vote-ranked per word, and each
  surviving candidate is validated by yes/no votes at sentence level. The
  winner replaces the word; words whose candidates never reach the acceptance
  threshold are abandoned and kept verbatim.

Voter diversity within a stage comes from varying the number of few-shot
demonstrations (2/4/6 by default; larger voter counts continue 8, 10, ...
and rotate the demonstration order). All stage functions are deterministic
given a scripted provider.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple, Sequence

from . import providers
from .ensemble import RankedCandidate, VoteConfig, vote_rank
from .errors import (
    ConfigError,
    EmptyOutputError,
    InputError,
    ParseError,
    ScriptMissError,
    SpanError,
    StageError,
)
from .promptkit import (
    Demonstration,
    PromptBank,
    PromptRole,
    RenderedPrompt,
    default_bank,
    mark_target,
    parse_word_list,
    parse_yes_no,
    render,
)
from .providers import ChatRequest, ChatResponse, Decoding, ProviderConfig

# Generation stages sample with some temperature for diversity; yes/no
# judgment stages run greedily.
GENERATE_DECODING = Decoding(temperature=0.7, max_tokens=512)
JUDGE_DECODING = Decoding(temperature=0.0, max_tokens=512)


class Mode(str, Enum):
    DIRECT = "direct"
    COT = "cot"
    COLLS = "colls"


class Token(NamedTuple):
    text: str
    start: int
    end: int
    is_word: bool


_TOKEN_RE = re.compile(r"(?P<word>\w+)|(?P<punct>[^\w\s])", re.UNICODE)


def tokenize(text: str) -> list[Token]:
    """Unicode word tokens plus single-character punctuation tokens."""
    return [
        Token(m.group(), m.start(), m.end(), m.lastgroup == "word")
        for m in _TOKEN_RE.finditer(text)
    ]


@dataclass(frozen=True)
class StageTrace:
    cwi_votes: int
    sg: tuple[RankedCandidate, ...]
    validation_yes: Mapping[str, int]


@dataclass(frozen=True)
class Edit:
    original_surface: str
    span: tuple[int, int]
    substitute: str
    approximate: bool = False
    stage_trace: StageTrace | None = None


@dataclass(frozen=True)
class SimplificationOutcome:
    original: str
    simplified: str
    edits: tuple[Edit, ...]
    mode: Mode
    abandoned: tuple[str, ...] = ()
    diagnostics: tuple[str, ...] = ()


def _default_vote() -> VoteConfig:
    return VoteConfig(3, 2)


@dataclass(frozen=True)
class PipelineConfig:
    """Voting and demonstration settings for the staged pipeline.

    ``val_vote=None`` skips validation entirely and takes the top-ranked
    generated substitute (the N=0 ablation case).
    """

    cwi_vote: VoteConfig = field(default_factory=_default_vote)
    sg_vote: VoteConfig = field(default_factory=_default_vote)
    val_vote: VoteConfig | None = field(default_factory=_default_vote)
    demo_counts: tuple[int, ...] = (2, 4, 6)
    candidate_cap: int | None = None
    baseline_shots: int = 4


# --------------------------------------------------------------------------
# Edit alignment for free-text rewrites
# --------------------------------------------------------------------------

def _lcs_pairs(left: Sequence[str], right: Sequence[str]) -> list[tuple[int, int]]:
    n, m = len(left), len(right)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = below[j + 1] + 1 if left[i] == right[j] else max(below[j], row[j + 1])
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m:
        if left[i] == right[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def align_report(original: str, simplified: str) -> tuple[list[Edit], list[str]]:
    """Recover per-word edits plus diagnostic flags from a rewritten sentence.

    Tokens are matched case-insensitively via LCS. Equal-length replaced
    regions pair tokens positionally; unequal regions collapse into one
    approximate edit keyed on the first original token. Pure insertions or
    deletions cannot be expressed as word substitutions and only raise flags.
    """
    tokens_o = tokenize(original)
    tokens_s = tokenize(simplified)
    pairs = _lcs_pairs(
        [t.text.casefold() for t in tokens_o],
        [t.text.casefold() for t in tokens_s],
    )
    if not pairs and tokens_o and tokens_s:
        return [], ["alignment:no-anchor"]

    edits: list[Edit] = []
    flags: list[str] = []
    prev_i = prev_j = 0
    for match_i, match_j in pairs + [(len(tokens_o), len(tokens_s))]:
        region_o = tokens_o[prev_i:match_i]
        region_s = tokens_s[prev_j:match_j]
        prev_i, prev_j = match_i + 1, match_j + 1
        if not region_o and not region_s:
            continue
        if not region_o:
            flags.append("alignment:insertion")
            continue
        if not region_s:
            flags.append("alignment:deletion")
            continue
        if len(region_o) == len(region_s):
            for tok_o, tok_s in zip(region_o, region_s):
                if tok_o.text.casefold() == tok_s.text.casefold():
                    continue
                edits.append(Edit(tok_o.text, (tok_o.start, tok_o.end), tok_s.text))
        else:
            head = region_o[0]
            substitute = " ".join(t.text for t in region_s)
            flags.append("alignment:region")
            if substitute.casefold() != head.text.casefold():
                edits.append(
                    Edit(head.text, (head.start, head.end), substitute, approximate=True)
                )
    return edits, flags


def align_edits(original: str, simplified: str) -> list[Edit]:
    return align_report(original, simplified)[0]


def apply_edits(sentence: str, edits: Sequence[Edit]) -> str:
    pieces: list[str] = []
    cursor = 0
    for edit in sorted(edits, key=lambda e: e.span[0]):
        start, end = edit.span
        pieces.append(sentence[cursor:start])
        pieces.append(edit.substitute)
        cursor = end
    pieces.append(sentence[cursor:])
    return "".join(pieces)


def case_adjust(candidate: str, original: str) -> str:
    """Carry a leading capital from the replaced word onto the substitute."""
    if original[:1].isupper() and candidate[:1].islower():
        return candidate[0].upper() + candidate[1:]
    return candidate


def replace_span(sentence: str, span: tuple[int, int], replacement: str) -> str:
    start, end = span
    return sentence[:start] + replacement + sentence[end:]


# --------------------------------------------------------------------------
# Prompt-variant construction
# --------------------------------------------------------------------------

def _voter_demos(
    demos: Sequence[Demonstration], demo_counts: Sequence[int], voter: int
) -> tuple[Sequence[Demonstration], int]:
    if voter < len(demo_counts):
        shots = demo_counts[voter]
        pool = demos
    else:
        # Beyond the configured counts, continue 8, 10, ... and rotate the
        # demonstration order so extra voters still see distinct prompts.
        shots = 2 * (voter + 1)
        rotation = (voter - len(demo_counts) + 1) % len(demos) if demos else 0
        pool = tuple(demos[rotation:]) + tuple(demos[:rotation])
    return pool, min(shots, len(pool))


def _stage_prompts(
    role: PromptRole,
    slots: Mapping[str, str],
    vote: VoteConfig,
    config: PipelineConfig,
    bank: PromptBank,
) -> list[RenderedPrompt]:
    demos = bank.demos_for(role)
    prompts = []
    for voter in range(vote.n):
        pool, shots = _voter_demos(demos, config.demo_counts, voter)
        prompts.append(render(role, slots, pool, shots, bank=bank))
    return prompts


def cwi_prompts(
    sentence: str, config: PipelineConfig | None = None, *, bank: PromptBank | None = None
) -> list[RenderedPrompt]:
    config = config or PipelineConfig()
    bank = bank or default_bank()
    return _stage_prompts(PromptRole.CWI, {"sentence": sentence}, config.cwi_vote, config, bank)


def sg_prompts(
    sentence: str,
    span: tuple[int, int],
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
) -> list[RenderedPrompt]:
    config = config or PipelineConfig()
    bank = bank or default_bank()
    slots = {"sentence": mark_target(sentence, span), "target": sentence[span[0]:span[1]]}
    return _stage_prompts(PromptRole.SG, slots, config.sg_vote, config, bank)


def validate_prompts(
    original: str,
    updated: str,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
) -> list[RenderedPrompt]:
    config = config or PipelineConfig()
    bank = bank or default_bank()
    if config.val_vote is None:
        return []
    slots = {"sentence1": original, "sentence2": updated}
    return _stage_prompts(PromptRole.VALIDATE, slots, config.val_vote, config, bank)


# --------------------------------------------------------------------------
# Stage execution
# --------------------------------------------------------------------------

def _run_voters(
    provider: ProviderConfig, prompts: Sequence[RenderedPrompt], decoding: Decoding
) -> list[ChatResponse | None]:
    """One response per prompt; transport failures become None slots."""
    requests = [ChatRequest(prompt, decoding) for prompt in prompts]
    results = providers.complete_many(provider, requests)
    out: list[ChatResponse | None] = []
    for result in results:
        if isinstance(result, (ScriptMissError, ConfigError)):
            raise result
        if isinstance(result, Exception):
            out.append(None)
        else:
            out.append(result)
    return out


def _with_seed(decoding: Decoding, seed: int | None) -> Decoding:
    if seed is None:
        return decoding
    return Decoding(decoding.temperature, decoding.max_tokens, seed)


def _word_occurrences(sentence: str, word: str) -> list[Token]:
    key = word.strip().casefold()
    return [t for t in tokenize(sentence) if t.is_word and t.text.casefold() == key]


def cwi_vote_counts(
    sentence: str,
    provider: ProviderConfig,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> dict[str, int]:
    """Vote counts per normalized complex word, after the in-sentence filter."""
    config = config or PipelineConfig()
    bank = bank or default_bank()
    responses = _run_voters(
        provider, cwi_prompts(sentence, config, bank=bank), _with_seed(GENERATE_DECODING, seed)
    )
    if all(r is None for r in responses):
        raise StageError("cwi: every voter call failed")
    counts: dict[str, int] = {}
    for response in responses:
        if response is None:
            continue
        voted: set[str] = set()
        for word in parse_word_list(response.text):
            if " " in word.strip():
                continue
            if not _word_occurrences(sentence, word):
                continue
            voted.add(word.strip().casefold())
        for key in voted:
            counts[key] = counts.get(key, 0) + 1
    return counts


def colls_cwi(
    sentence: str,
    provider: ProviderConfig,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> set[str]:
    """Complex words named by at least m of the n voters, as sentence surfaces."""
    config = config or PipelineConfig()
    counts = cwi_vote_counts(sentence, provider, config, bank=bank, seed=seed)
    out = set()
    for key, votes in counts.items():
        if votes >= config.cwi_vote.m:
            out.add(_word_occurrences(sentence, key)[0].text)
    return out


def _resolve_target(sentence: str, target: str | tuple[int, int]) -> tuple[int, int]:
    if isinstance(target, str):
        occurrences = _word_occurrences(sentence, target)
        if not occurrences:
            raise SpanError(f"target {target!r} does not occur in the sentence")
        return (occurrences[0].start, occurrences[0].end)
    start, end = target
    if not (0 <= start < end <= len(sentence)):
        raise SpanError(f"span {target} invalid for sentence of length {len(sentence)}")
    return (start, end)


def colls_sg(
    sentence: str,
    target: str | tuple[int, int],
    provider: ProviderConfig,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> list[RankedCandidate]:
    """Vote-ranked substitutes for one target occurrence."""
    config = config or PipelineConfig()
    bank = bank or default_bank()
    span = _resolve_target(sentence, target)
    surface = sentence[span[0]:span[1]]
    responses = _run_voters(
        provider, sg_prompts(sentence, span, config, bank=bank), _with_seed(GENERATE_DECODING, seed)
    )
    if all(r is None for r in responses):
        raise StageError("sg: every voter call failed")
    lists: list[list[str]] = []
    for response in responses:
        if response is None:
            lists.append([])
            continue
        words = parse_word_list(response.text)
        lists.append([w for w in words if w.casefold() != surface.casefold()])
    ranked = vote_rank(lists, config.sg_vote)
    if config.candidate_cap is not None:
        ranked = ranked[: config.candidate_cap]
    return ranked


@dataclass(frozen=True)
class ValidationResult:
    chosen: str | None
    yes_votes: Mapping[str, int]


def colls_validate(
    sentence: str,
    word_span: tuple[int, int],
    candidates: Sequence[RankedCandidate],
    provider: ProviderConfig,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> ValidationResult:
    """Yes/no-vote each candidate in rank order; None chosen means abandon."""
    config = config or PipelineConfig()
    bank = bank or default_bank()
    if config.val_vote is None:
        raise ConfigError("validation stage is disabled (val_vote is None)")
    surface = sentence[word_span[0]:word_span[1]]
    yes_votes: dict[str, int] = {}
    any_success = False
    for candidate in candidates:
        updated = replace_span(sentence, word_span, case_adjust(candidate.text, surface))
        responses = _run_voters(
            provider,
            validate_prompts(sentence, updated, config, bank=bank),
            _with_seed(JUDGE_DECODING, seed),
        )
        yes = 0
        for response in responses:
            if response is None:
                continue
            any_success = True
            try:
                if parse_yes_no(response.text):
                    yes += 1
            except ParseError:
                pass  # abstained vote
        yes_votes[candidate.text] = yes
    if candidates and not any_success:
        raise StageError("validation: every voter call failed")

    threshold = config.val_vote.m
    chosen: str | None = None
    best = -1
    for candidate in candidates:  # rank order breaks ties
        votes = yes_votes[candidate.text]
        if votes >= threshold and votes > best:
            chosen = candidate.text
            best = votes
    return ValidationResult(chosen, yes_votes)


def run_colls(
    sentence: str,
    provider: ProviderConfig,
    config: PipelineConfig | None = None,
    *,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> SimplificationOutcome:
    """Full staged pipeline: identify, generate, validate, substitute."""
    config = config or PipelineConfig()
    bank = bank or default_bank()
    counts = cwi_vote_counts(sentence, provider, config, bank=bank, seed=seed)

    targets: list[tuple[Token, int]] = []
    for key, votes in counts.items():
        if votes < config.cwi_vote.m:
            continue
        for token in _word_occurrences(sentence, key):
            targets.append((token, votes))
    targets.sort(key=lambda item: item[0].start)

    edits: list[Edit] = []
    abandoned: list[str] = []
    for token, votes in targets:
        span = (token.start, token.end)
        ranked = colls_sg(sentence, span, provider, config, bank=bank, seed=seed)
        if not ranked:
            abandoned.append(token.text)
            continue
        if config.val_vote is None:
            chosen = ranked[0].text
            yes_votes: Mapping[str, int] = {}
        else:
            result = colls_validate(sentence, span, ranked, provider, config, bank=bank, seed=seed)
            chosen = result.chosen
            yes_votes = result.yes_votes
            if chosen is None:
                abandoned.append(token.text)
                continue
        edits.append(
            Edit(
                original_surface=token.text,
                span=span,
                substitute=case_adjust(chosen, token.text),
                stage_trace=StageTrace(votes, tuple(ranked), dict(yes_votes)),
            )
        )
    return SimplificationOutcome(
        original=sentence,
        simplified=apply_edits(sentence, edits),
        edits=tuple(edits),
        mode=Mode.COLLS,
        abandoned=tuple(abandoned),
    )


def extract_answer(text: str) -> str:
    """Final sentence of a one-shot response: after the last ANSWER:, else last line."""
    if not text.strip():
        raise EmptyOutputError("provider returned an empty response")
    if "ANSWER:" in text:
        tail = text.rsplit("ANSWER:", 1)[1]
        lines = [line.strip() for line in tail.splitlines() if line.strip()]
        if not lines:
            raise EmptyOutputError("nothing follows the ANSWER: marker")
        return lines[0]
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    return lines[-1]


def simplify_single_prompt(
    sentence: str,
    provider: ProviderConfig,
    mode: Mode | str = Mode.DIRECT,
    shots: int | None = None,
    *,
    config: PipelineConfig | None = None,
    bank: PromptBank | None = None,
    seed: int | None = None,
) -> SimplificationOutcome:
    """One-prompt simplification (plain or step-by-step instructions)."""
    mode = Mode(mode)
    if mode not in (Mode.DIRECT, Mode.COT):
        raise InputError(f"single-prompt mode must be direct or cot, got {mode.value}")
    config = config or PipelineConfig()
    bank = bank or default_bank()
    role = PromptRole.ONE_STEP_DIRECT if mode is Mode.DIRECT else PromptRole.ONE_STEP_COT
    demos = bank.demos_for(role)
    k = config.baseline_shots if shots is None else shots
    prompt = render(role, {"Input_sentence": sentence}, demos, k, bank=bank)
    response = providers.complete(provider, ChatRequest(prompt, _with_seed(GENERATE_DECODING, seed)))
    simplified = extract_answer(response.text)
    edits, flags = align_report(sentence, simplified)
    return SimplificationOutcome(
        original=sentence,
        simplified=simplified,
        edits=tuple(edits),
        mode=mode,
        diagnostics=tuple(flags),
    )


# --------------------------------------------------------------------------
# Outcome (de)serialization for the JSON-lines run format
# --------------------------------------------------------------------------

def outcome_to_dict(outcome: SimplificationOutcome) -> dict:
    def edit_dict(edit: Edit) -> dict:
        trace = None
        if edit.stage_trace is not None:
            trace = {
                "cwi_votes": edit.stage_trace.cwi_votes,
                "sg": [{"text": c.text, "votes": c.votes} for c in edit.stage_trace.sg],
                "validation_yes": dict(edit.stage_trace.validation_yes),
            }
        return {
            "original_surface": edit.original_surface,
            "span": list(edit.span),
            "substitute": edit.substitute,
            "approximate": edit.approximate,
            "stage_trace": trace,
        }

    return {
        "mode": outcome.mode.value,
        "original": outcome.original,
        "simplified": outcome.simplified,
        "edits": [edit_dict(e) for e in outcome.edits],
        "abandoned": list(outcome.abandoned),
        "diagnostics": list(outcome.diagnostics),
    }


def outcome_from_dict(data: Mapping) -> SimplificationOutcome:
    edits = []
    for raw in data.get("edits", []):
        trace = None
        if raw.get("stage_trace"):
            t = raw["stage_trace"]
            trace = StageTrace(
                cwi_votes=int(t["cwi_votes"]),
                sg=tuple(RankedCandidate(c["text"], int(c["votes"])) for c in t["sg"]),
                validation_yes={k: int(v) for k, v in t["validation_yes"].items()},
            )
        edits.append(
            Edit(
                original_surface=raw["original_surface"],
                span=(int(raw["span"][0]), int(raw["span"][1])),
                substitute=raw["substitute"],
                approximate=bool(raw.get("approximate", False)),
                stage_trace=trace,
            )
        )
    return SimplificationOutcome(
        original=data["original"],
        simplified=data["simplified"],
        edits=tuple(edits),
        mode=Mode(data["mode"]),
        abandoned=tuple(data.get("abandoned", ())),
        diagnostics=tuple(data.get("diagnostics", ())),
    )
