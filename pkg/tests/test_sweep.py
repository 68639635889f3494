from dataclasses import replace

import numpy as np
import pytest

from entroute.chain import PathSpec
from entroute.fidelity import DomainError, fidelity_at_age
from entroute.sweep import (
    FIGURE_PANELS,
    FOUR_HOP_WITH_PRIORS,
    PRESETS,
    TWO_HOP,
    ExperimentPreset,
    FairModeError,
    Verdict,
    check_fair,
    classify_regime,
    default_params,
    fair_params,
    panel_params,
    rate_comparison,
    regime_verdict,
    run_experiment,
    run_panel,
)


def test_presets():
    assert PRESETS["figure4"].T == 5 and PRESETS["figure4"].panels == FIGURE_PANELS
    assert PRESETS["figure5"].T == 10 and PRESETS["figure6"].T == 20
    assert PRESETS["figure7_t50"].T == 50
    assert PRESETS["figure7_t50"].panels[0] == (0.25, 0.75)
    assert FIGURE_PANELS == ((0.25, 0.8), (0.15, 0.9), (0.4, 0.95), (0.1, 0.5))
    assert PRESETS["figure4"].path_a == TWO_HOP
    assert FOUR_HOP_WITH_PRIORS.prior_links == ((0, 1), (2, 4))
    with pytest.raises(DomainError):
        ExperimentPreset("bad", 5, ((1.2, 0.5),))


def test_panel_params_derive_threshold():
    p = panel_params(default_params(), 0.15, 0.9, 10)
    assert (p.p_e, p.p_s, p.T) == (0.15, 0.9, 10)
    assert p.f_th == pytest.approx(0.921876, abs=1e-6)


def test_single_trial_experiment():
    preset = replace(PRESETS["figure4"], trials=1)
    panels = run_experiment(preset)
    assert len(panels) == 4
    for panel in panels:
        assert panel.table.trials == 1
        for values in panel.table.series.values():
            assert set(np.unique(values)) <= {0.0, 1.0}


def test_panels_are_deterministic_and_cell_keyed():
    p = panel_params(default_params(), 0.25, 0.8, 5)
    first = run_panel(TWO_HOP, FOUR_HOP_WITH_PRIORS, p, 200, seed=9)
    again = run_panel(TWO_HOP, FOUR_HOP_WITH_PRIORS, p, 200, seed=9)
    assert first.pairs == again.pairs
    other_cell = panel_params(default_params(), 0.25, 0.8, 10)
    assert run_panel(TWO_HOP, FOUR_HOP_WITH_PRIORS, other_cell, 200, seed=9).pairs != first.pairs


def test_regime_verdict_rules():
    a = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
    assert regime_verdict(a, [x + 0.05 for x in a])[0] is Verdict.FOUR_HOP_FAVORABLE
    assert regime_verdict([x + 0.05 for x in a], a)[0] is Verdict.TWO_HOP_FAVORABLE
    assert regime_verdict(a, [x + 0.01 for x in a])[0] is Verdict.INDISTINCT
    mixed = [0.05, 0.1, 0.2, 0.3, 0.4, 0.45]
    assert regime_verdict(a, mixed)[0] is Verdict.INDISTINCT
    # only the first six steps count
    late = a + [0.6, 0.9]
    assert regime_verdict(a + [0.6, 0.6], late)[0] is Verdict.INDISTINCT
    verdict, stat = regime_verdict(a, [x + 0.05 for x in a])
    assert stat == pytest.approx(0.05)
    # short tables are padded with their final value
    assert regime_verdict([0.0, 0.1], [0.0, 0.2])[0] is Verdict.FOUR_HOP_FAVORABLE


def test_classify_regime_small():
    m = classify_regime((0.15,), (0.9,), 10, trials=2000, seed=1)
    assert m.verdict(0.15, 0.9) is Verdict.FOUR_HOP_FAVORABLE
    with pytest.raises(KeyError):
        m.verdict(0.2, 0.9)
    with pytest.raises(DomainError):
        classify_regime((), (0.9,), 5)


def test_fair_params_and_checks():
    realistic = panel_params(default_params(), 0.15, 0.9, 5)
    fair = fair_params(realistic)
    assert fair.p_s == 1.0 and not fair.discard_on_swap_failure
    assert fair.f_th == 0.8 and fair.T == 30 and fair.p_e == 0.15
    check_fair(fair)
    for bad in (replace(fair, p_s=0.9), replace(fair, discard_on_swap_failure=True), replace(fair, f_th=0.9)):
        with pytest.raises(FairModeError):
            check_fair(bad)


def test_fair_mode_deterministic_generation():
    realistic = panel_params(default_params(), 1.0, 0.9, 5)
    report = rate_comparison(realistic, fair_params(realistic), trials=50, seed=0)
    assert report.fair.mean_steps == 3.0
    assert report.fair.rate_hz == pytest.approx(1 / (3 * 106e-6))


def test_identical_modes_give_unit_ratio():
    fair = fair_params(panel_params(default_params(), 0.3, 0.9, 5))
    report = rate_comparison(fair, fair, trials=500, seed=0)
    assert report.ratio == pytest.approx(1.0)


@pytest.mark.parametrize("pe", [0.15, 0.4])
def test_fair_mode_beats_realistic(pe):
    realistic = panel_params(default_params(), pe, 0.9, 5)
    report = rate_comparison(realistic, fair_params(realistic), trials=1000, seed=0)
    assert report.fair.rate_hz > report.realistic.rate_hz


def test_spec_override_in_preset():
    preset = replace(PRESETS["figure4"], trials=20, path_b=PathSpec(3))
    assert all(p.table.trials == 20 for p in run_experiment(preset))
