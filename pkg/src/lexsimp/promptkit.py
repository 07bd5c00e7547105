"""Prompt rendering and response parsing.

Templates live in a JSON bank (role -> template text + demonstration pool);
the stock bank ships with the package under ``data/prompt_bank.json``.
Placeholders use ``[name]`` tokens, and few-shot demonstrations are inserted
at the ``[(examples)]`` line as ``####Example N####`` blocks. Rendering is a
pure function of (role, slots, demos, shot count), so the fingerprint of a
rendered prompt is stable and can key scripted providers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .errors import ParseError, SpanError, TemplateError

EXAMPLES_MARKER = "[(examples)]"
ANSWER_PREFIX = "ANSWER:"


class PromptRole(str, Enum):
    ONE_STEP_DIRECT = "one_step_direct"
    ONE_STEP_COT = "one_step_cot"
    CWI = "cwi"
    SG = "sg"
    VALIDATE = "validate"
    ANNOTATE_DIRECT = "annotate_direct"
    ANNOTATE_COT = "annotate_cot"


# Placeholders each role's template may use, and the labeled fields a
# demonstration block prints, in order.
_ROLE_PLACEHOLDERS: dict[PromptRole, tuple[str, ...]] = {
    PromptRole.ONE_STEP_DIRECT: ("Input_sentence",),
    PromptRole.ONE_STEP_COT: ("Input_sentence",),
    PromptRole.CWI: ("sentence",),
    PromptRole.SG: ("sentence", "target"),
    PromptRole.VALIDATE: ("sentence1", "sentence2"),
    PromptRole.ANNOTATE_DIRECT: ("sentence", "alternative"),
    PromptRole.ANNOTATE_COT: ("sentence", "alternative"),
}

_ROLE_DEMO_FIELDS: dict[PromptRole, tuple[tuple[str, str], ...]] = {
    PromptRole.ONE_STEP_DIRECT: (("SENTENCE", "sentence"), ("ANSWER", "answer")),
    PromptRole.ONE_STEP_COT: (("SENTENCE", "sentence"), ("ANSWER", "answer")),
    PromptRole.CWI: (("SENTENCE", "sentence"), ("ANSWER", "answer")),
    PromptRole.SG: (("SENTENCE", "sentence"), ("TARGET", "target"), ("ANSWER", "answer")),
    PromptRole.VALIDATE: (
        ("SENTENCE 1", "sentence1"),
        ("SENTENCE 2", "sentence2"),
        ("ANSWER", "answer"),
    ),
    PromptRole.ANNOTATE_DIRECT: (
        ("SENTENCE", "sentence"),
        ("ALTERNATIVE", "alternative"),
        ("ANSWER", "answer"),
    ),
    PromptRole.ANNOTATE_COT: (
        ("SENTENCE", "sentence"),
        ("ALTERNATIVE", "alternative"),
        ("ANSWER", "answer"),
    ),
}


@dataclass(frozen=True)
class Demonstration:
    """One few-shot exemplar: slot values keyed by placeholder name."""

    role: PromptRole
    slots: Mapping[str, str]


@dataclass(frozen=True)
class RenderedPrompt:
    system_text: str
    user_text: str
    fingerprint: str


@dataclass(frozen=True)
class PromptBank:
    templates: Mapping[PromptRole, str]
    demos: Mapping[PromptRole, tuple[Demonstration, ...]]
    default_shots: Mapping[PromptRole, int]

    def template(self, role: PromptRole) -> str:
        try:
            return self.templates[role]
        except KeyError:
            raise TemplateError(f"no template for role {role.value!r}") from None

    def demos_for(self, role: PromptRole) -> tuple[Demonstration, ...]:
        return self.demos.get(role, ())

    def shots_for(self, role: PromptRole) -> int:
        return self.default_shots.get(role, 0)


def load_bank(data: Mapping[str, dict]) -> PromptBank:
    templates: dict[PromptRole, str] = {}
    demos: dict[PromptRole, tuple[Demonstration, ...]] = {}
    shots: dict[PromptRole, int] = {}
    for name, entry in data.items():
        role = PromptRole(name)
        templates[role] = entry["template"]
        demos[role] = tuple(Demonstration(role, dict(d)) for d in entry.get("demos", []))
        shots[role] = int(entry.get("default_shots", 0))
    return PromptBank(templates, demos, shots)


def load_bank_file(path: str) -> PromptBank:
    with open(path, encoding="utf-8") as fp:
        return load_bank(json.load(fp))


@lru_cache(maxsize=1)
def default_bank() -> PromptBank:
    text = resources.files("lexsimp").joinpath("data/prompt_bank.json").read_text("utf-8")
    return load_bank(json.loads(text))


def _fingerprint(system_text: str, user_text: str) -> str:
    digest = hashlib.sha256()
    digest.update(system_text.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(user_text.encode("utf-8"))
    return digest.hexdigest()[:16]


def _demo_block(role: PromptRole, demo: Demonstration, number: int) -> str:
    lines = [f"####Example {number}####"]
    for label, slot in _ROLE_DEMO_FIELDS[role]:
        if slot not in demo.slots:
            raise TemplateError(f"demonstration for {role.value!r} is missing slot {slot!r}")
        lines.append(f"{label}: {demo.slots[slot]}")
    return "\n".join(lines)


def render(
    role: PromptRole,
    slots: Mapping[str, str],
    demos: Sequence[Demonstration] = (),
    k: int = 0,
    *,
    bank: PromptBank | None = None,
    system_text: str = "",
) -> RenderedPrompt:
    """Fill a role's template with slot values and the first k demonstrations."""
    bank = bank or default_bank()
    template = bank.template(role)
    if k > len(demos):
        raise TemplateError(f"requested {k} demonstrations but only {len(demos)} available")

    if EXAMPLES_MARKER in template:
        if k > 0:
            blocks = "\n".join(_demo_block(role, demo, i + 1) for i, demo in enumerate(demos[:k]))
            text = template.replace(EXAMPLES_MARKER + "\n", blocks + "\n")
            text = text.replace(EXAMPLES_MARKER, blocks)
        else:
            text = template.replace(EXAMPLES_MARKER + "\n", "")
            text = text.replace(EXAMPLES_MARKER, "")
    else:
        text = template

    for placeholder in _ROLE_PLACEHOLDERS[role]:
        marker = f"[{placeholder}]"
        if marker not in text:
            continue
        if placeholder not in slots:
            raise TemplateError(f"missing slot {placeholder!r} for role {role.value!r}")
        text = text.replace(marker, slots[placeholder])

    return RenderedPrompt(system_text, text, _fingerprint(system_text, text))


def mark_target(sentence: str, span: tuple[int, int]) -> str:
    """Wrap the span in << >> marks, leaving every other character intact."""
    start, end = span
    if not (0 <= start < end <= len(sentence)):
        raise SpanError(f"span {span} invalid for sentence of length {len(sentence)}")
    return f"{sentence[:start]}<<{sentence[start:end]}>>{sentence[end:]}"


def parse_word_list(text: str) -> list[str]:
    """Split a ';'-separated response into trimmed, case-insensitively unique words."""
    body = text.strip()
    if body.startswith(ANSWER_PREFIX):
        body = body[len(ANSWER_PREFIX):]
    words: list[str] = []
    seen: set[str] = set()
    for part in body.split(";"):
        word = part.strip()
        key = word.casefold()
        if word and key not in seen:
            seen.add(key)
            words.append(word)
    return words


def parse_yes_no(text: str) -> bool:
    """True/False from the ##YES##/##NO## markers; ambiguity raises ParseError."""
    has_yes = "##YES##" in text
    has_no = "##NO##" in text
    if has_yes == has_no:
        raise ParseError(f"response is not a clear yes/no: {text!r}")
    return has_yes
