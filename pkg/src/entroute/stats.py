"""Empirical CDFs, summaries, convergence checks and rate conversion.

Censored trials stay in every CDF denominator, so a CDF with censoring
plateaus below one; means and rates only use completed trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import TrialResult
from .fidelity import DomainError
from .policies import all_completion, first_completion

SERIES = ("path_a", "path_b", "first", "all")
SUMMARY_QUANTILES = (0.25, 0.5, 0.75, 0.9)
# a table stops once every series is at least this complete
COMPLETE_LEVEL = 0.999


def _steps(results: Sequence[TrialResult]) -> np.ndarray:
    """Completion steps with censored trials mapped to 0."""
    return np.fromiter(
        (r.completion_step or 0 for r in results), dtype=np.int64, count=len(results)
    )


def empirical_cdf(results: Sequence[TrialResult], horizon: int) -> np.ndarray:
    """``cdf[n - 1]`` is the fraction of trials completed by step ``n``."""
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if len(results) == 0:
        raise DomainError("cannot build a CDF from no results")
    steps = _steps(results)
    done = steps[(steps > 0) & (steps <= horizon)]
    counts = np.bincount(done, minlength=horizon + 1)[1:]
    return np.cumsum(counts) / len(results)


def quantile_step(cdf: np.ndarray, q: float) -> Optional[int]:
    """Smallest step whose CDF value reaches ``q``; None if it never does."""
    hits = np.nonzero(cdf >= q - 1e-12)[0]
    return int(hits[0]) + 1 if hits.size else None


def dkw_halfwidth(n: int, alpha: float = 0.01) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz confidence band."""
    if n <= 0:
        return math.inf
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def entanglement_rate(mean_steps: float, delta_t_us: float) -> float:
    """Average e2e rate in Hz given the mean number of steps per success."""
    if not mean_steps > 0 or not delta_t_us > 0:
        raise DomainError("mean_steps and delta_t_us must be positive")
    return 1.0 / (mean_steps * delta_t_us * 1e-6)


@dataclass(frozen=True)
class SummaryStats:
    trials: int
    completed: int
    mean_steps: Optional[float]
    quantiles: dict
    censored_fraction: float
    mean_e2e_fidelity: Optional[float]
    rate_hz: Optional[float]


def summarize(results: Sequence[TrialResult], delta_t_us: float) -> SummaryStats:
    steps = _steps(results)
    done = steps[steps > 0]
    n = len(results)
    if done.size:
        mean = float(done.mean())
        fidelity = float(np.mean([r.e2e_fidelity for r in results if not r.censored]))
        rate = entanglement_rate(mean, delta_t_us)
        cdf = empirical_cdf(results, int(done.max()))
        quantiles = {q: quantile_step(cdf, q) for q in SUMMARY_QUANTILES}
    else:
        mean = fidelity = rate = None
        quantiles = {q: None for q in SUMMARY_QUANTILES}
    return SummaryStats(
        trials=n,
        completed=int(done.size),
        mean_steps=mean,
        quantiles=quantiles,
        censored_fraction=(n - done.size) / n if n else 0.0,
        mean_e2e_fidelity=fidelity,
        rate_hz=rate,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    passed: bool
    inconclusive: bool
    mean_rel_diff: Optional[float] = None
    quantile_rel_diffs: dict = field(default_factory=dict)


def _mean_and_quantiles(steps: np.ndarray, n_total: int, quantiles) -> tuple[float, dict]:
    done = steps[steps > 0]
    counts = np.bincount(done, minlength=int(done.max()) + 1)[1:]
    cdf = np.cumsum(counts) / n_total
    return float(done.mean()), {q: quantile_step(cdf, q) for q in quantiles}


def convergence_check(
    results: Sequence[TrialResult],
    tolerance: float = 0.02,
    quantiles: tuple = (0.5, 0.9),
) -> ConvergenceReport:
    """Compare mean and quantiles of the first half of the trials to the full set.

    Passes when every relative difference is within ``tolerance``.
    """
    steps = _steps(results)
    half = steps[: len(steps) // 2]
    if np.count_nonzero(half > 0) < 2 or np.count_nonzero(steps > 0) < 4:
        return ConvergenceReport(passed=False, inconclusive=True)
    mean_full, q_full = _mean_and_quantiles(steps, len(steps), quantiles)
    mean_half, q_half = _mean_and_quantiles(half, len(half), quantiles)
    mean_diff = abs(mean_half - mean_full) / mean_full
    q_diffs = {}
    for q in quantiles:
        if q_full[q] is None or q_half[q] is None:
            # censoring keeps the CDF below q in at least one sample
            return ConvergenceReport(False, True, mean_diff, q_diffs)
        q_diffs[q] = abs(q_half[q] - q_full[q]) / q_full[q]
    passed = mean_diff <= tolerance and all(d <= tolerance for d in q_diffs.values())
    return ConvergenceReport(passed, False, mean_diff, q_diffs)


def crossover_step(cdf_a, cdf_b, noise: float = 0.01) -> Optional[int]:
    """First step at which ``a`` overtakes ``b`` after ``b`` has led.

    Leads smaller than ``noise`` are ignored.
    """
    cdf_a = np.asarray(cdf_a, dtype=float)
    cdf_b = np.asarray(cdf_b, dtype=float)
    if cdf_a.shape != cdf_b.shape:
        raise DomainError("CDF sequences must have equal length")
    b_led = False
    for n, (a, b) in enumerate(zip(cdf_a, cdf_b), start=1):
        if b_led and a > b + noise:
            return n
        if b > a + noise:
            b_led = True
    return None


@dataclass
class CdfTable:
    horizon: int
    series: dict
    trials: int
    censored: dict

    def rows(self):
        for n in range(self.horizon):
            yield (n + 1, *(float(self.series[name][n]) for name in SERIES))


def diversity_series(pairs: Sequence[tuple[TrialResult, TrialResult]]) -> dict:
    """The four result series of paired trials: each path, first and all completion."""
    return {
        "path_a": [ra for ra, _ in pairs],
        "path_b": [rb for _, rb in pairs],
        "first": [first_completion(ra, rb) for ra, rb in pairs],
        "all": [all_completion(ra, rb) for ra, rb in pairs],
    }


def cdf_table(
    pairs: Sequence[tuple[TrialResult, TrialResult]],
    max_steps: int,
    series: Optional[dict] = None,
) -> CdfTable:
    """Four-series CDF table running until every series reaches 0.999 or ``max_steps``."""
    if series is None:
        series = diversity_series(pairs)
    n = len(pairs)
    full = {name: empirical_cdf(rs, max_steps) for name, rs in series.items()}
    complete = np.ones(max_steps, dtype=bool)
    for values in full.values():
        complete &= values >= COMPLETE_LEVEL
    hits = np.nonzero(complete)[0]
    horizon = int(hits[0]) + 1 if hits.size else max_steps
    return CdfTable(
        horizon=horizon,
        series={name: values[:horizon] for name, values in full.items()},
        trials=n,
        censored={name: sum(r.censored for r in rs) for name, rs in series.items()},
    )
