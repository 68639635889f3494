"""Combining the outcomes of two disjoint paths attempted in parallel."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .engine import CENSORED, TrialResult


class Winner(str, Enum):
    PATH_A = "path_a"
    PATH_B = "path_b"
    TIE = "tie"
    NONE = "none"


@dataclass(frozen=True)
class DiversityOutcome:
    first_completion: TrialResult
    all_completion: TrialResult
    winner: Winner
    path_a: TrialResult
    path_b: TrialResult


def _winner(ra: TrialResult, rb: TrialResult) -> Winner:
    if ra.censored and rb.censored:
        return Winner.NONE
    if rb.censored:
        return Winner.PATH_A
    if ra.censored:
        return Winner.PATH_B
    if ra.completion_step == rb.completion_step:
        return Winner.TIE
    return Winner.PATH_A if ra.completion_step < rb.completion_step else Winner.PATH_B


def first_completion(ra: TrialResult, rb: TrialResult) -> TrialResult:
    """Whichever path finishes first; ties report path A's link."""
    if _winner(ra, rb) is Winner.PATH_B:
        return rb
    return ra


def all_completion(ra: TrialResult, rb: TrialResult) -> TrialResult:
    """Done once both paths are done; reports the later path's fidelity."""
    if ra.censored or rb.censored:
        return CENSORED
    if rb.completion_step > ra.completion_step:
        return rb
    return ra


def combine(ra: TrialResult, rb: TrialResult) -> DiversityOutcome:
    return DiversityOutcome(
        first_completion=first_completion(ra, rb),
        all_completion=all_completion(ra, rb),
        winner=_winner(ra, rb),
        path_a=ra,
        path_b=rb,
    )
