"""Voting and list-fusion primitives used by every multi-voter stage.

Three pure operations:

* ``combine_score`` merges ranked candidate lists from several generators by
  position-decayed scoring (5 - 0.5 * index per list, floored at zero) and
  keeps the top k.
* ``majority_elements`` keeps items named by at least ``m`` of ``n`` voters.
* ``vote_rank`` is the ordered variant: membership by the same threshold,
  ordered by vote count.

Candidates are compared after trimming whitespace and case-folding; the
surface form of the first occurrence is kept. Ties are broken by the lowest
index at which a candidate appears in any input list, then lexicographically
on the normalized text, so results are reproducible regardless of voter
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ArityError, ValidationError


@dataclass(frozen=True)
class ScoredCandidate:
    text: str
    score: float


@dataclass(frozen=True)
class VoteConfig:
    """Majority-vote parameters: n voters, accept at >= m agreements."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if not (1 <= self.m <= self.n):
            raise ValidationError(f"vote config requires 1 <= m <= n, got n={self.n}, m={self.m}")


@dataclass(frozen=True)
class RankedCandidate:
    text: str
    votes: int


def _norm(text: str) -> str:
    return text.strip().casefold()


def _dedup_indexed(candidates: Iterable[str]) -> dict[str, tuple[str, int]]:
    """Map normalized key -> (surface, first index), collapsing duplicates."""
    out: dict[str, tuple[str, int]] = {}
    for index, raw in enumerate(candidates):
        key = _norm(raw)
        if key and key not in out:
            out[key] = (raw.strip(), index)
    return out


def combine_score(lists: Sequence[Sequence[str]], k: int = 12) -> list[ScoredCandidate]:
    """Fuse generator lists by per-position score and keep the top k.

    A candidate at index i (from 0) in a list contributes max(0, 5 - 0.5*i);
    its total score is the sum over all lists containing it. Duplicates
    within one list count once, at their first index.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    scores: dict[str, float] = {}
    best_index: dict[str, int] = {}
    surface: dict[str, str] = {}
    for candidates in lists:
        for key, (text, index) in _dedup_indexed(candidates).items():
            scores[key] = scores.get(key, 0.0) + max(0.0, 5.0 - 0.5 * index)
            if key not in best_index or index < best_index[key]:
                best_index[key] = index
            surface.setdefault(key, text)
    ordered = sorted(scores, key=lambda key: (-scores[key], best_index[key], key))
    return [ScoredCandidate(surface[key], scores[key]) for key in ordered[:k]]


def majority_elements(sets: Sequence[Iterable[str]], config: VoteConfig) -> set[str]:
    """Items present in at least config.m of the voter collections.

    Unordered collections (sets) are scanned in sorted order so the surface
    form chosen for the result is deterministic.
    """
    if len(sets) != config.n:
        raise ArityError(f"expected {config.n} voter sets, got {len(sets)}")
    counts: dict[str, int] = {}
    surface: dict[str, str] = {}
    for voter in sets:
        items = list(voter) if isinstance(voter, (list, tuple)) else sorted(voter)
        seen: set[str] = set()
        for raw in items:
            key = _norm(raw)
            if not key or key in seen:
                continue
            seen.add(key)
            counts[key] = counts.get(key, 0) + 1
            surface.setdefault(key, raw.strip())
    return {surface[key] for key, count in counts.items() if count >= config.m}


def vote_rank(lists: Sequence[Sequence[str]], config: VoteConfig) -> list[RankedCandidate]:
    """Membership filter at >= m votes, then rank by vote count descending."""
    if len(lists) != config.n:
        raise ArityError(f"expected {config.n} voter lists, got {len(lists)}")
    counts: dict[str, int] = {}
    best_index: dict[str, int] = {}
    surface: dict[str, str] = {}
    for candidates in lists:
        for key, (text, index) in _dedup_indexed(candidates).items():
            counts[key] = counts.get(key, 0) + 1
            if key not in best_index or index < best_index[key]:
                best_index[key] = index
            surface.setdefault(key, text)
    kept = [key for key, count in counts.items() if count >= config.m]
    kept.sort(key=lambda key: (-counts[key], best_index[key], key))
    return [RankedCandidate(surface[key], counts[key]) for key in kept]
