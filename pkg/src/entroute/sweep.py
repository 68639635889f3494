"""Experiment presets, regime classification and the rate comparison.

Each (p_e, p_s, T) cell draws from streams keyed by the master seed and the
cell coordinates, so a cell gives the same trials whichever preset or grid it
is run from.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .chain import PathSpec
from .engine import Audit, SimParams, run_trials
from .fidelity import DecayModel, DomainError, cutoff_steps, fidelity_at_age
from .stats import (
    SERIES,
    CdfTable,
    ConvergenceReport,
    SummaryStats,
    cdf_table,
    convergence_check,
    diversity_series,
    summarize,
)

TWO_HOP = PathSpec(2)
# nodes 1-2 and 3-5 of a five-node path, numbered from zero
FOUR_HOP_WITH_PRIORS = PathSpec(4, ((0, 1), (2, 4)))

FIGURE_PANELS = ((0.25, 0.8), (0.15, 0.9), (0.4, 0.95), (0.1, 0.5))


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    T: int
    panels: tuple
    trials: int = 10_000
    seed: int = 0
    path_a: PathSpec = TWO_HOP
    path_b: PathSpec = FOUR_HOP_WITH_PRIORS

    def __post_init__(self):
        for pe, ps in self.panels:
            if not (0 <= pe <= 1 and 0 <= ps <= 1):
                raise DomainError(f"panel ({pe}, {ps}) has a probability outside [0, 1]")


PRESETS = {
    "figure4": ExperimentPreset("figure4", 5, FIGURE_PANELS),
    "figure5": ExperimentPreset("figure5", 10, FIGURE_PANELS),
    "figure6": ExperimentPreset("figure6", 20, FIGURE_PANELS),
    "figure7_t50": ExperimentPreset(
        "figure7_t50", 50, ((0.25, 0.75), (0.15, 0.9), (0.4, 0.95), (0.1, 0.5))
    ),
}

# grid behind the "regime_map" preset
REGIME_PE = (0.1, 0.15, 0.25, 0.4)
REGIME_PS = (0.5, 0.8, 0.9, 0.95)
REGIME_T = (5, 10, 20, 50)
REGIME_TRIALS = 2_000


def cell_key(pe: float, ps: float, T: int) -> tuple[int, int, int]:
    return (round(pe * 1_000_000), round(ps * 1_000_000), T)


def panel_params(base: SimParams, pe: float, ps: float, T: int) -> SimParams:
    """``base`` with the panel's probabilities and a cutoff-derived threshold."""
    max_steps = max(base.max_steps, T)
    return replace(
        base, p_e=pe, p_s=ps, T=T, f_th=fidelity_at_age(T, base.model), max_steps=max_steps
    )


def default_params(model: Optional[DecayModel] = None, **overrides) -> SimParams:
    model = model or DecayModel()
    T = overrides.pop("T", 5)
    values = dict(p_e=0.5, p_s=0.9, T=T, f_th=fidelity_at_age(T, model), model=model)
    values.update(overrides)
    return SimParams(**values)


@dataclass
class PanelResult:
    pe: float
    ps: float
    T: int
    params: SimParams
    table: CdfTable
    summaries: dict
    convergence: dict
    pairs: list = field(repr=False, default_factory=list)


def run_panel(
    path_a: PathSpec,
    path_b: PathSpec,
    params: SimParams,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
    audit: Optional[Audit] = None,
) -> PanelResult:
    key = cell_key(params.p_e, params.p_s, params.T)
    pairs = run_trials((path_a, path_b), params, trials, seed, key=key, workers=workers, audit=audit)
    series = diversity_series(pairs)
    return PanelResult(
        pe=params.p_e,
        ps=params.p_s,
        T=params.T,
        params=params,
        table=cdf_table(pairs, params.max_steps, series),
        summaries={name: summarize(series[name], params.delta_t_us) for name in SERIES},
        convergence={name: convergence_check(series[name]) for name in SERIES},
        pairs=pairs,
    )


def run_experiment(
    preset: ExperimentPreset,
    params: Optional[SimParams] = None,
    workers: Optional[int] = None,
    audit: Optional[Audit] = None,
) -> list[PanelResult]:
    base = params or default_params()
    return [
        run_panel(
            preset.path_a,
            preset.path_b,
            panel_params(base, pe, ps, preset.T),
            preset.trials,
            preset.seed,
            workers=workers,
            audit=audit,
        )
        for pe, ps in preset.panels
    ]


class Verdict(str, Enum):
    FOUR_HOP_FAVORABLE = "four_hop_favorable"
    TWO_HOP_FAVORABLE = "two_hop_favorable"
    INDISTINCT = "indistinct"


def regime_verdict(cdf_a, cdf_b, window: int = 6, eps: float = 0.02) -> tuple[Verdict, float]:
    """Which path leads over the first ``window`` steps.

    Path B is favorable when it leads A by at least ``eps`` somewhere in the
    window and A never leads it by more than ``eps`` there; mirrored for A.
    The returned statistic is B's largest lead over A inside the window.
    """
    a = np.asarray(cdf_a, dtype=float)[:window]
    b = np.asarray(cdf_b, dtype=float)[:window]
    if a.size < window:
        a = np.pad(a, (0, window - a.size), mode="edge")
        b = np.pad(b, (0, window - b.size), mode="edge")
    lead_b = b - a
    stat = float(lead_b.max())
    if np.any(lead_b >= eps) and not np.any(-lead_b > eps):
        return Verdict.FOUR_HOP_FAVORABLE, stat
    if np.any(-lead_b >= eps) and not np.any(lead_b > eps):
        return Verdict.TWO_HOP_FAVORABLE, stat
    return Verdict.INDISTINCT, stat


@dataclass(frozen=True)
class RegimeCell:
    pe: float
    ps: float
    T: int
    verdict: Verdict
    stat: float


@dataclass
class RegimeMap:
    pe_grid: tuple
    ps_grid: tuple
    T: int
    cells: list

    def verdict(self, pe: float, ps: float) -> Verdict:
        for cell in self.cells:
            if cell.pe == pe and cell.ps == ps:
                return cell.verdict
        raise KeyError((pe, ps))


def classify_panel(panel: PanelResult, window: int = 6, eps: float = 0.02) -> RegimeCell:
    verdict, stat = regime_verdict(
        panel.table.series["path_a"], panel.table.series["path_b"], window, eps
    )
    return RegimeCell(panel.pe, panel.ps, panel.T, verdict, stat)


def classify_regime(
    pe_grid,
    ps_grid,
    T: int,
    params: Optional[SimParams] = None,
    trials: int = 10_000,
    seed: int = 0,
    window: int = 6,
    eps: float = 0.02,
    path_a: PathSpec = TWO_HOP,
    path_b: PathSpec = FOUR_HOP_WITH_PRIORS,
    workers: Optional[int] = None,
) -> RegimeMap:
    if not len(pe_grid) or not len(ps_grid):
        raise DomainError("regime grids must be non-empty")
    base = params or default_params()
    cells = []
    for pe in pe_grid:
        for ps in ps_grid:
            panel = run_panel(path_a, path_b, panel_params(base, pe, ps, T), trials, seed, workers)
            cells.append(classify_panel(panel, window, eps))
    return RegimeMap(tuple(pe_grid), tuple(ps_grid), T, cells)


class FairModeError(DomainError):
    """Parameters that do not describe the idealised comparison mode."""


def fair_params(realistic: SimParams, f_th: float = 0.8) -> SimParams:
    """Idealised counterpart of ``realistic``: perfect swaps that never discard,
    no creation noise and a relaxed threshold."""
    return replace(
        realistic,
        p_s=1.0,
        discard_on_swap_failure=False,
        apply_creation_noise=False,
        f_th=f_th,
        T=cutoff_steps(f_th, realistic.model),
        max_steps=max(realistic.max_steps, cutoff_steps(f_th, realistic.model)),
    )


def check_fair(params: SimParams) -> None:
    if params.p_s != 1.0:
        raise FairModeError(f"fair mode needs p_s = 1, got {params.p_s}")
    if params.discard_on_swap_failure:
        raise FairModeError("fair mode keeps links when a swap fails")
    if abs(params.f_th - 0.8) > 1e-9:
        raise FairModeError(f"fair mode uses a fidelity threshold of 0.8, got {params.f_th}")


@dataclass(frozen=True)
class RateReport:
    realistic: SummaryStats
    fair: SummaryStats
    ratio: Optional[float]


def rate_comparison(
    params_realistic: SimParams,
    params_fair: SimParams,
    trials: int = 10_000,
    seed: int = 0,
    path: PathSpec = FOUR_HOP_WITH_PRIORS,
    workers: Optional[int] = None,
) -> RateReport:
    """Average e2e rates of ``path`` in both modes; ratio is fair over realistic."""
    check_fair(params_fair)
    stats = []
    # both modes share streams (common random numbers)
    for params in (params_realistic, params_fair):
        rows = run_trials((path,), params, trials, seed, workers=workers)
        stats.append(summarize([row[0] for row in rows], params.delta_t_us))
    realistic, fair = stats
    ratio = None
    if realistic.rate_hz and fair.rate_hz:
        ratio = fair.rate_hz / realistic.rate_hz
    return RateReport(realistic, fair, ratio)
