import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entroute.fidelity import (
    DecayModel,
    DomainError,
    InfeasibleThresholdError,
    cutoff_steps,
    cutoff_time,
    decay_step,
    fidelity_at_age,
    fidelity_to_werner,
    swap_fidelity,
    swap_then_wait,
    wait_then_swap,
    werner_to_fidelity,
)

M100 = DecayModel(100.0)

fidelities = st.floats(min_value=0.25, max_value=1.0, allow_nan=False)
waits = st.integers(min_value=0, max_value=2000)
taus = st.floats(min_value=1.0, max_value=5000.0, allow_nan=False)


@pytest.mark.parametrize("f, w", [(1.0, 1.0), (0.25, 0.0), (0.9, 0.866667)])
def test_fidelity_to_werner(f, w):
    assert fidelity_to_werner(f) == pytest.approx(w, abs=1e-6)


@pytest.mark.parametrize("w, f", [(0.0, 0.25), (1.0, 1.0), (0.866667, 0.9)])
def test_werner_to_fidelity(w, f):
    assert werner_to_fidelity(w) == pytest.approx(f, abs=1e-6)


@pytest.mark.parametrize("bad", [0.2, 1.1, -1.0])
def test_fidelity_domain(bad):
    with pytest.raises(DomainError):
        fidelity_to_werner(bad)


@pytest.mark.parametrize("bad", [-0.1, 1.5])
def test_werner_domain(bad):
    with pytest.raises(DomainError):
        werner_to_fidelity(bad)


@pytest.mark.parametrize(
    "age, expected, reported",
    [(5, 0.956323, 0.96), (10, 0.921876, 0.92), (20, 0.857938, 0.86)],
)
def test_fidelity_at_age_matches_reported_cutoffs(age, expected, reported):
    f = fidelity_at_age(age, M100)
    assert f == pytest.approx(expected, abs=1e-6)
    assert f == pytest.approx(reported, abs=0.005)


def test_decay_step_examples():
    assert decay_step(1.0, M100) == pytest.approx(0.990050, abs=1e-6)
    assert decay_step(0.0, M100) == 0.0
    w = decay_step(1.0, M100)
    for _ in range(4):
        w = decay_step(w, M100)
    assert w == pytest.approx(0.951229, abs=1e-6)
    # the created link carries one factor, so five factors is age 4
    assert werner_to_fidelity(w) == pytest.approx(fidelity_at_age(4, M100), abs=1e-12)


def test_decay_fixed_point_and_depolarizing_probability():
    assert M100.depolarizing_probability == pytest.approx(1 - math.exp(-0.01))


def test_swap_fidelity_examples():
    assert swap_fidelity(1.0, 1.0) == 1.0
    assert swap_fidelity(0.7, 0.25) == pytest.approx(0.25)
    assert swap_fidelity(0.9, 0.9) == pytest.approx(0.813333, abs=1e-6)


def test_wait_and_swap_examples():
    assert wait_then_swap(1, 1, 0, M100) == pytest.approx(1.0)
    assert wait_then_swap(1, 1, 100, M100) == pytest.approx(0.351501, abs=1e-6)
    assert wait_then_swap(0.25, 0.8, 17, M100) == pytest.approx(0.25)
    assert swap_then_wait(1, 1, 0, M100) == pytest.approx(1.0)
    assert swap_then_wait(1, 1, 100, M100) == pytest.approx(0.525909, abs=1e-6)
    assert swap_then_wait(0.25, 0.25, 50, M100) == pytest.approx(0.25)


def test_cutoff_time_examples():
    assert cutoff_time(0.956323, M100) == pytest.approx(5.0, abs=1e-3)
    assert cutoff_time(0.921876, M100) == pytest.approx(10.0, abs=1e-3)
    assert cutoff_time(fidelity_at_age(0, M100), M100) == pytest.approx(0.0, abs=1e-9)
    assert cutoff_steps(fidelity_at_age(10, M100), M100) == 10
    assert cutoff_steps(0.95, M100) == 5
    assert cutoff_steps(0.8, M100) == 30


def test_cutoff_time_errors():
    with pytest.raises(DomainError):
        cutoff_time(0.25, M100)
    with pytest.raises(InfeasibleThresholdError):
        cutoff_time(0.995, M100)


@given(fidelities)
def test_round_trip(f):
    assert werner_to_fidelity(fidelity_to_werner(f)) == pytest.approx(f, abs=1e-12)


@given(st.integers(min_value=0, max_value=10_000), taus)
def test_monotone_decay(age, tau):
    m = DecayModel(tau)
    assert fidelity_at_age(age + 1, m) <= fidelity_at_age(age, m)
    assert fidelity_at_age(age, m) >= 0.25


def test_decay_limit():
    assert fidelity_at_age(100_000, M100) == pytest.approx(0.25, abs=1e-12)
    assert fidelity_at_age(11, M100) < fidelity_at_age(10, M100)


@given(fidelities, fidelities)
def test_swap_contracts_and_is_symmetric(f1, f2):
    out = swap_fidelity(f1, f2)
    assert out <= min(f1, f2) + 1e-12
    assert out == pytest.approx(swap_fidelity(f2, f1), abs=1e-15)


@settings(max_examples=500)
@given(fidelities, fidelities, waits, taus)
def test_wait_then_swap_never_beats_swap_then_wait(f1, f2, t_w, tau):
    m = DecayModel(tau)
    ws = wait_then_swap(f1, f2, t_w, m)
    sw = swap_then_wait(f1, f2, t_w, m)
    assert ws <= sw + 1e-15
    product = fidelity_to_werner(f1) * fidelity_to_werner(f2)
    if t_w == 0 or product == 0:
        assert ws == pytest.approx(sw, abs=1e-15)


@given(st.floats(min_value=0.26, max_value=0.99, allow_nan=False))
def test_cutoff_inversion_brackets_threshold(f_th):
    try:
        t = cutoff_time(f_th, M100)
    except InfeasibleThresholdError:
        return
    k = round(t)
    if t >= 1:
        assert fidelity_at_age(k + 1, M100) <= f_th + 1e-12
        assert f_th <= fidelity_at_age(k - 1, M100) + 1e-12
    # exact inverse over the continuous range
    assert 0.25 + 0.75 * math.exp(-(t + 1) / 100) == pytest.approx(f_th, abs=1e-12)


@given(st.integers(min_value=0, max_value=400), taus)
def test_composed_decay_then_swap_equals_closed_form(t_w, tau):
    m = DecayModel(tau)
    w1 = w2 = fidelity_to_werner(fidelity_at_age(0, m))
    for _ in range(t_w):
        w1 = decay_step(w1, m)
        w2 = decay_step(w2, m)
    composed = swap_fidelity(werner_to_fidelity(w1), werner_to_fidelity(w2))
    f0 = fidelity_at_age(0, m)
    assert composed == pytest.approx(wait_then_swap(f0, f0, t_w, m), abs=1e-12)


def test_decay_model_validation():
    with pytest.raises(DomainError):
        DecayModel(0.0)
    with pytest.raises(DomainError):
        DecayModel(10.0, f0=0.9)
