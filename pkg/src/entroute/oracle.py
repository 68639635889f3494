"""Exact completion-time distributions for small chains.

Instead of sampling, we push a probability distribution over chain states
through the same three phases the engine runs, enumerating every Bernoulli
branch. A link is stored as ``(left, right, age, m)`` where ``m`` counts the
``exp(-1/tau)`` factors in its Werner parameter, so fidelity comparisons are
integer comparisons and equal states merge exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import PathSpec
from .engine import SimParams, run_trials, threshold_exponent
from .stats import dkw_halfwidth, empirical_cdf

DEFAULT_BUDGET = 5_000


class BudgetExceededError(RuntimeError):
    def __init__(self, states: int, budget: int):
        super().__init__(f"oracle state space grew to {states} states (budget {budget})")
        self.states = states
        self.budget = budget


@dataclass(frozen=True)
class ExactCdf:
    cdf: np.ndarray
    # probability still in flight (neither completed nor lost) after each step
    in_flight: np.ndarray
    max_states: int

    def __getitem__(self, step: int) -> float:
        return float(self.cdf[step - 1])


def _initial_state(spec: PathSpec, params: SimParams) -> tuple:
    links = []
    for (i, j), age in zip(spec.prior_links, spec.ages()):
        m = (j - i if params.apply_creation_noise else 0) + age
        links.append((i, j, age, m))
    return tuple(sorted(links))


def _evolve(state: tuple, n: int, params: SimParams, m_max: int, out: dict, prob: float):
    """Accumulate the successors of ``state`` after one step into ``out``."""
    p_e, p_s = params.p_e, params.p_s
    m_new = 1 if params.apply_creation_noise else 0
    product = params.swap_rule == "product"
    T = params.T

    right_used = {link[0] for link in state}
    left_used = {link[1] for link in state}
    pairs = [i for i in range(n) if i not in right_used and (i + 1) not in left_used]

    # generation: every subset of eligible pairs
    for mask in range(1 << len(pairs)):
        p_gen = prob
        # (left, right, age, m, kind) with kind 0=old, 1=generated, 2=merged
        links = [(*link, 0) for link in state]
        for bit, i in enumerate(pairs):
            if mask >> bit & 1:
                p_gen *= p_e
                links.append((i, i + 1, 0, m_new, 1))
            else:
                p_gen *= 1.0 - p_e
        if p_gen == 0.0:
            continue
        _swap_phase(links, 1, n, p_gen, p_s, product, params, T, m_max, out)


def _swap_phase(links, node, n, prob, p_s, product, params, T, m_max, out):
    while node < n:
        left = next((l for l in links if l[1] == node), None)
        right = next((l for l in links if l[0] == node), None)
        if left is not None and right is not None and left[4] == 0 and right[4] == 0:
            break
        node += 1
    else:
        _finish(links, prob, T, m_max, out)
        return
    rest = [l for l in links if l is not left and l is not right]
    m = left[3] + right[3] if product else max(left[3], right[3])
    merged = (left[0], right[1], max(left[2], right[2]) + 1, m, 2)
    if p_s > 0.0:
        _swap_phase(rest + [merged], node + 1, n, prob * p_s, p_s, product, params, T, m_max, out)
    if p_s < 1.0:
        after_fail = links if not params.discard_on_swap_failure else rest
        _swap_phase(after_fail, node + 1, n, prob * (1.0 - p_s), p_s, product, params, T, m_max, out)


def _finish(links, prob, T, m_max, out):
    survivors = []
    for left, right, age, m, kind in links:
        if kind == 0:
            age += 1
            m += 1
        if age > T or m > m_max:
            continue
        survivors.append((left, right, age, m))
    key = tuple(sorted(survivors))
    out[key] = out.get(key, 0.0) + prob


def exact_cdf(
    spec: PathSpec,
    params: SimParams,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> ExactCdf:
    """P(completion step <= n) for n = 1..horizon, computed exactly."""
    n = spec.n_hops
    limit = threshold_exponent(params)
    m_max = math.floor(limit + 1e-6) if math.isfinite(limit) else 10**9
    dist = {_initial_state(spec, params): 1.0}
    cdf = np.zeros(horizon)
    in_flight = np.zeros(horizon)
    completed = 0.0
    max_states = 1
    for t in range(1, horizon + 1):
        nxt: dict = {}
        for state, prob in dist.items():
            _evolve(state, n, params, m_max, nxt, prob)
            if len(nxt) > budget:
                raise BudgetExceededError(len(nxt), budget)
        dist = {}
        for state, prob in nxt.items():
            if any(l[0] == 0 and l[1] == n for l in state):
                completed += prob
            else:
                dist[state] = prob
        max_states = max(max_states, len(dist))
        cdf[t - 1] = completed
        in_flight[t - 1] = sum(dist.values())
    return ExactCdf(cdf=cdf, in_flight=in_flight, max_states=max_states)


@dataclass(frozen=True)
class OracleReport:
    exact: np.ndarray
    empirical: np.ndarray
    trials: int
    sup_distance: float
    band: float
    passed: bool


def mc_vs_oracle(
    spec: PathSpec,
    params: SimParams,
    trials: int,
    horizon: int,
    seed: int = 0,
    workers: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> OracleReport:
    """Compare the engine's empirical CDF with the exact one over ``horizon`` steps.

    Passes when the sup-distance lies inside the 99% DKW band. With zero
    trials the empirical CDF is taken as identically zero and the band as 1.
    """
    exact = exact_cdf(spec, params, horizon, budget).cdf
    if trials == 0:
        empirical = np.zeros(horizon)
        band = 1.0
    else:
        results = [row[0] for row in run_trials((spec,), params, trials, seed, workers=workers)]
        empirical = empirical_cdf(results, horizon)
        band = dkw_halfwidth(trials, 0.01)
    sup = float(np.max(np.abs(empirical - exact)))
    return OracleReport(
        exact=exact,
        empirical=empirical,
        trials=trials,
        sup_distance=sup,
        band=band,
        passed=sup <= band,
    )
