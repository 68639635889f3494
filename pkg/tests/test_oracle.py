import copy
import time

import numpy as np
import pytest

from entroute.chain import PathSpec, e2e_link, init_chain
from entroute.engine import SimParams, step
from entroute.fidelity import DecayModel, fidelity_at_age
from entroute.oracle import BudgetExceededError, exact_cdf, mc_vs_oracle

M100 = DecayModel(100.0)


def params(p_e, p_s=1.0, T=5, **kw):
    return SimParams(p_e=p_e, p_s=p_s, T=T, f_th=fidelity_at_age(T, M100), **kw)


def test_geometric_examples():
    cdf = exact_cdf(PathSpec(1), params(0.5), 3).cdf
    assert cdf.tolist() == pytest.approx([0.5, 0.75, 0.875], abs=1e-15)


def test_deterministic_two_hop():
    ex = exact_cdf(PathSpec(2), params(1.0), 3)
    assert ex[1] == 0 and ex[2] == 1 and ex[3] == 1


def test_no_generation_means_no_completion():
    assert np.all(exact_cdf(PathSpec(3, ((0, 2),)), params(0.0), 20).cdf == 0)
    assert np.all(exact_cdf(PathSpec(2), params(0.0, 0.5), 10).cdf == 0)


@pytest.mark.parametrize(
    "spec, p",
    [
        (PathSpec(2), params(0.5, 0.8, 5)),
        (PathSpec(4, ((0, 1), (2, 4))), params(0.3, 0.9, 10)),
        (PathSpec(3), params(0.4, 0.7, 4, discard_on_swap_failure=False)),
    ],
)
def test_mass_conservation_and_monotone(spec, p):
    ex = exact_cdf(spec, p, 25)
    assert np.all(np.diff(ex.cdf) >= -1e-15)
    assert np.all(np.abs(ex.cdf + ex.in_flight - 1.0) <= 1e-10)


def test_budget_exceeded():
    start = time.perf_counter()
    with pytest.raises(BudgetExceededError) as info:
        exact_cdf(PathSpec(4, ((0, 1), (2, 4))), params(0.15, 0.9, 20), 200, budget=2_000)
    assert info.value.states > 2_000
    assert time.perf_counter() - start < 30


class Probe(float):
    """A draw whose comparison against a probability is decided by a script."""

    def __new__(cls, log, decisions):
        obj = super().__new__(cls, 0.5)
        obj.log, obj.decisions = log, decisions
        return obj

    def __lt__(self, p):
        k = len(self.log)
        decision = self.decisions[k] if k < len(self.decisions) else False
        self.log.append((p, decision))
        return decision


class ScriptedRng:
    def __init__(self, decisions):
        self.decisions, self.log = decisions, []

    def random(self):
        return Probe(self.log, self.decisions)


def branches(chain, p, t):
    """Every outcome of one engine step, with its probability."""
    out = []

    def explore(prefix):
        rng = ScriptedRng(prefix)
        child = step(copy.deepcopy(chain), p, rng, t)
        prob = 1.0
        for q, decision in rng.log:
            prob *= q if decision else 1.0 - q
        out.append((prob, child))
        taken = [d for _, d in rng.log]
        for k in range(len(prefix), len(rng.log)):
            explore(taken[:k] + [True])

    explore([])
    return out


def key(chain, t):
    return tuple(sorted((l.left, l.right, t - l.birth_step, round(l.w, 12)) for l in chain.links))


def enumerated_cdf(spec, p, horizon):
    dist = {key(init_chain(spec, p.model, p.apply_creation_noise), 0): (1.0, init_chain(spec, p.model, p.apply_creation_noise))}
    completed, cdf = 0.0, []
    for t in range(1, horizon + 1):
        nxt = {}
        for prob, chain in dist.values():
            for q, child in branches(chain, p, t):
                if q == 0.0:
                    continue
                if e2e_link(child) is not None:
                    completed += prob * q
                    continue
                k = key(child, t)
                old = nxt.get(k, (0.0, child))[0]
                nxt[k] = (old + prob * q, child)
        dist = nxt
        cdf.append(completed)
    return np.array(cdf)


@pytest.mark.parametrize("rule", ["product", "oldest"])
@pytest.mark.parametrize(
    "spec, p_e, p_s, T, discard",
    [
        (PathSpec(2), 0.5, 0.8, 5, True),
        (PathSpec(3), 0.4, 0.7, 4, True),
        (PathSpec(3), 0.4, 0.7, 4, False),
        (PathSpec(4, ((0, 1), (2, 4))), 0.3, 0.9, 5, True),
        (PathSpec(4, ((0, 2),)), 0.6, 0.6, 3, True),
    ],
)
def test_oracle_matches_enumerated_engine(spec, p_e, p_s, T, discard, rule):
    p = params(p_e, p_s, T, discard_on_swap_failure=discard, swap_rule=rule)
    horizon = 8
    assert np.allclose(enumerated_cdf(spec, p, horizon), exact_cdf(spec, p, horizon).cdf, atol=1e-12)


def test_mc_vs_oracle_degenerate():
    report = mc_vs_oracle(PathSpec(1), params(0.3), 0, 10)
    assert report.sup_distance == pytest.approx(report.exact.max())
    assert report.band == 1.0 and report.passed


@pytest.mark.parametrize("rule", ["product", "oldest"])
def test_mc_vs_oracle_two_hop(rule):
    report = mc_vs_oracle(PathSpec(2), params(0.5, 0.8, 5, swap_rule=rule), 20_000, 40, seed=3)
    assert report.passed, report.sup_distance
