"""Discrete-time Monte Carlo engine for e2e entanglement over a linear chain.

Each time step runs three phases in a fixed order:

1. generation on every adjacent pair whose facing memory slots are free;
2. swaps, scanning intermediate nodes left to right, only on links formed
   in an earlier step (classical signalling takes a step);
3. memory decay of links that predate this step, then discarding of links
   below the fidelity threshold or older than the cutoff.

Every trial draws from its own stream keyed by ``(seed, *key, trial, path)``
so results never depend on how trials are spread over workers.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .chain import ChainState, PathSpec, WernerLink, init_chain
from .fidelity import DecayModel, DomainError, fidelity_to_werner, werner_to_fidelity

THREADS_ENV = "ENTROUTE_THREADS"

SWAP_RULES = ("product", "oldest")


@dataclass(frozen=True)
class SimParams:
    p_e: float
    p_s: float
    T: int
    f_th: float
    model: DecayModel = field(default_factory=DecayModel)
    max_steps: int = 10_000
    delta_t_us: float = 106.0
    discard_on_swap_failure: bool = True
    apply_creation_noise: bool = True
    # "oldest": merged link keeps the weaker (older) constituent's parameter.
    # "product": merged Werner parameter is wL * wR.
    swap_rule: str = "oldest"

    def __post_init__(self):
        if not 0.0 <= self.p_e <= 1.0:
            raise DomainError(f"p_e must lie in [0, 1], got {self.p_e}")
        if not 0.0 <= self.p_s <= 1.0:
            raise DomainError(f"p_s must lie in [0, 1], got {self.p_s}")
        if self.T < 1:
            raise DomainError(f"cutoff T must be >= 1, got {self.T}")
        if self.max_steps < self.T:
            raise DomainError(f"max_steps ({self.max_steps}) must be >= T ({self.T})")
        if not 0.25 < self.f_th <= 1.0:
            raise DomainError(f"f_th must lie in (1/4, 1], got {self.f_th}")
        if self.delta_t_us <= 0:
            raise DomainError("delta_t_us must be positive")
        if self.swap_rule not in SWAP_RULES:
            raise DomainError(f"swap_rule must be one of {SWAP_RULES}, got {self.swap_rule!r}")

    @cached_property
    def kernel(self) -> tuple[float, float, float, bool]:
        """(decay factor, fresh-link parameter, survival floor, product rule) for the step loop."""
        factor = self.model.step_factor
        w_new = factor if self.apply_creation_noise else 1.0
        w_min = fidelity_to_werner(self.f_th) - 1e-12
        return factor, w_new, w_min, self.swap_rule == "product"


@dataclass(frozen=True, slots=True)
class TrialResult:
    completion_step: Optional[int]
    e2e_fidelity: Optional[float]

    @property
    def censored(self) -> bool:
        return self.completion_step is None


CENSORED = TrialResult(None, None)


@dataclass
class Audit:
    """Counters for invariant violations, filled in when passed to the engine."""

    steps: int = 0
    swaps: int = 0
    age_violations: int = 0
    threshold_violations: int = 0
    deferral_violations: int = 0
    completions: int = 0
    subthreshold_completions: int = 0

    @property
    def clean(self) -> bool:
        return not (
            self.age_violations
            or self.threshold_violations
            or self.deferral_violations
            or self.subthreshold_completions
        )

    def merge(self, other: "Audit") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))


def trial_rng(seed: int, *key: int) -> random.Random:
    """Independent Mersenne Twister stream for one (seed, key...) path."""
    token = ":".join(str(int(k)) for k in (seed, *key)).encode()
    digest = hashlib.blake2b(token, digest_size=16).digest()
    return random.Random(int.from_bytes(digest, "little"))


def step(
    chain: ChainState,
    params: SimParams,
    rng: random.Random,
    t: int,
    audit: Optional[Audit] = None,
) -> ChainState:
    """Advance ``chain`` by one time step ``t`` (>= 1), in place."""
    n = chain.spec.n_hops
    right_of = chain.right_of
    left_of = chain.left_of
    rand = rng.random
    factor, w_new, w_min, product = params.kernel

    if audit is not None:
        existing = {id(link) for link in chain.links}

    p_e = params.p_e
    for i in range(n):
        if right_of[i] is None and left_of[i + 1] is None and rand() < p_e:
            link = WernerLink(i, i + 1, t, t, w_new)
            right_of[i] = link
            left_of[i + 1] = link

    p_s = params.p_s
    for node in range(1, n):
        left = left_of[node]
        right = right_of[node]
        if left is None or right is None or left.formed_step >= t or right.formed_step >= t:
            continue
        if audit is not None:
            audit.swaps += 1
            if id(left) not in existing or id(right) not in existing:
                audit.deferral_violations += 1
        if rand() < p_s:
            if product:
                w = left.w * right.w
            else:
                w = left.w if left.w < right.w else right.w
            right_of[node] = left_of[node] = None
            merged = WernerLink(
                left.left, right.right, min(left.birth_step, right.birth_step), t, w
            )
            right_of[left.left] = merged
            left_of[right.right] = merged
        elif params.discard_on_swap_failure:
            right_of[node] = left_of[node] = None
            right_of[left.left] = None
            left_of[right.right] = None

    T = params.T
    for i in range(n):
        link = right_of[i]
        if link is None:
            continue
        if link.formed_step < t:
            link.w *= factor
        if link.w < w_min or t - link.birth_step > T:
            right_of[i] = None
            left_of[link.right] = None

    if audit is not None:
        audit.steps += 1
        for link in chain.links:
            if t - link.birth_step > T:
                audit.age_violations += 1
            if link.w < w_min:
                audit.threshold_violations += 1
    return chain


def run_trial(
    spec: PathSpec,
    params: SimParams,
    rng: random.Random,
    audit: Optional[Audit] = None,
) -> TrialResult:
    chain = init_chain(spec, params.model, creation_noise=params.apply_creation_noise)
    n = spec.n_hops
    right_of = chain.right_of
    for t in range(1, params.max_steps + 1):
        step(chain, params, rng, t, audit)
        link = right_of[0]
        if link is not None and link.right == n:
            fidelity = werner_to_fidelity(link.w)
            if audit is not None:
                audit.completions += 1
                if fidelity < params.f_th - 1e-12:
                    audit.subthreshold_completions += 1
            return TrialResult(t, fidelity)
    return CENSORED


def run_trial_pair(
    spec_a: PathSpec,
    spec_b: PathSpec,
    params: SimParams,
    rng_a: random.Random,
    rng_b: random.Random,
    audit: Optional[Audit] = None,
) -> tuple[TrialResult, TrialResult]:
    """Run both paths of one trial; the streams must be independent."""
    return run_trial(spec_a, params, rng_a, audit), run_trial(spec_b, params, rng_b, audit)


def _worker_count(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(workers))


def _run_chunk(args):
    specs, params, seed, key, start, stop, audit_on = args
    audit = Audit() if audit_on else None
    out = []
    for trial in range(start, stop):
        row = []
        for path_index, spec in enumerate(specs):
            rng = trial_rng(seed, *key, trial, path_index)
            row.append(run_trial(spec, params, rng, audit))
        out.append(tuple(row))
    return out, audit


def run_trials(
    specs: tuple[PathSpec, ...] | list[PathSpec],
    params: SimParams,
    trials: int,
    seed: int,
    key: tuple[int, ...] = (),
    workers: Optional[int] = None,
    audit: Optional[Audit] = None,
) -> list[tuple[TrialResult, ...]]:
    """Run ``trials`` independent trials of every path in ``specs``.

    Returns one tuple of results per trial, in trial order. The output is
    identical for any worker count.
    """
    specs = tuple(specs)
    workers = min(_worker_count(workers), max(1, trials))
    bounds = [(trials * k) // workers for k in range(workers + 1)]
    jobs = [
        (specs, params, seed, tuple(key), bounds[k], bounds[k + 1], audit is not None)
        for k in range(workers)
    ]
    if workers == 1:
        chunks = [_run_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    results = []
    for rows, chunk_audit in chunks:
        results.extend(rows)
        if audit is not None:
            audit.merge(chunk_audit)
    return results


def creation_werner(params: SimParams) -> float:
    return params.model.step_factor if params.apply_creation_noise else 1.0


def threshold_exponent(params: SimParams) -> float:
    """Largest number of e^(-1/tau) factors a link can carry and survive."""
    w_th = fidelity_to_werner(params.f_th)
    if w_th <= 0:
        return math.inf
    return -params.model.tau_steps * math.log(w_th)
