"""Werner-state fidelity algebra.

A Werner state is fully described by one scalar. We carry the Werner
parameter ``w = (4F - 1) / 3`` internally because memory decay is then a
plain multiplication and a swap is a product, and only convert to fidelity
``F = 1/4 + 3w/4`` at the boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FIDELITY_MIN = 0.25
FIDELITY_MAX = 1.0

# absorbs float noise when a value sits exactly on a bound
_EPS = 1e-12


class DomainError(ValueError):
    """An argument lies outside the range an operation is defined on."""


class InfeasibleThresholdError(DomainError):
    """A fidelity threshold no freshly created link can meet."""


@dataclass(frozen=True)
class DecayModel:
    """Depolarizing memory with decoherence constant ``tau_steps`` (in time steps).

    Freshly created links start from unit fidelity and pick up one step's
    worth of depolarizing noise at creation.
    """

    tau_steps: float = 100.0
    f0: float = 1.0

    def __post_init__(self):
        if not self.tau_steps > 0:
            raise DomainError(f"tau_steps must be positive, got {self.tau_steps}")
        if self.f0 != 1.0:
            raise DomainError("only unit initial fidelity is supported")

    @property
    def step_factor(self) -> float:
        """Multiplier applied to the Werner parameter per stored time step."""
        return math.exp(-1.0 / self.tau_steps)

    @property
    def depolarizing_probability(self) -> float:
        return 1.0 - self.step_factor


def _check_fidelity(f: float, name: str = "fidelity") -> float:
    if not (FIDELITY_MIN - _EPS <= f <= FIDELITY_MAX + _EPS):
        raise DomainError(f"{name} must lie in [0.25, 1], got {f}")
    return min(max(f, FIDELITY_MIN), FIDELITY_MAX)


def _check_werner(w: float) -> float:
    if not (-_EPS <= w <= 1.0 + _EPS):
        raise DomainError(f"Werner parameter must lie in [0, 1], got {w}")
    return min(max(w, 0.0), 1.0)


def fidelity_to_werner(f: float) -> float:
    f = _check_fidelity(f)
    return (4.0 * f - 1.0) / 3.0


def werner_to_fidelity(w: float) -> float:
    w = _check_werner(w)
    return 0.25 + 0.75 * w


def fidelity_at_age(age: int, model: DecayModel) -> float:
    """Fidelity of an elementary link that has been stored for ``age`` steps."""
    if age < 0:
        raise DomainError(f"age must be non-negative, got {age}")
    return 0.25 + 0.75 * math.exp(-(age + 1) / model.tau_steps)


def decay_step(w: float, model: DecayModel) -> float:
    return _check_werner(w) * model.step_factor


def swap_fidelity(f1: float, f2: float) -> float:
    w1 = fidelity_to_werner(f1)
    w2 = fidelity_to_werner(f2)
    return 0.25 + 0.75 * w1 * w2


def wait_then_swap(f01: float, f02: float, t_w: int, model: DecayModel) -> float:
    """Both links sit in memory for ``t_w`` steps, then get swapped."""
    if t_w < 0:
        raise DomainError(f"waiting time must be non-negative, got {t_w}")
    w = fidelity_to_werner(f01) * fidelity_to_werner(f02)
    return 0.75 * (1.0 / 3.0 + w * math.exp(-2.0 * t_w / model.tau_steps))


def swap_then_wait(f01: float, f02: float, t_w: int, model: DecayModel) -> float:
    """Links are swapped immediately and the merged link waits ``t_w`` steps."""
    if t_w < 0:
        raise DomainError(f"waiting time must be non-negative, got {t_w}")
    w = fidelity_to_werner(f01) * fidelity_to_werner(f02)
    return 0.75 * (1.0 / 3.0 + w * math.exp(-t_w / model.tau_steps))


def cutoff_time(f_th: float, model: DecayModel) -> float:
    """Storage time (real, in steps) after which a fresh link drops to ``f_th``.

    Inverse of :func:`fidelity_at_age`.
    """
    if f_th <= FIDELITY_MIN:
        raise DomainError(f"threshold {f_th} <= 1/4 gives an infinite cutoff")
    if f_th > FIDELITY_MAX + _EPS:
        raise DomainError(f"threshold {f_th} exceeds 1")
    best = fidelity_at_age(0, model)
    if f_th > best + _EPS:
        raise InfeasibleThresholdError(
            f"threshold {f_th} exceeds the fidelity of a fresh link ({best:.6f})"
        )
    t = -model.tau_steps * math.log((4.0 * f_th - 1.0) / (4.0 * model.f0 - 1.0)) - 1.0
    return max(t, 0.0)


def cutoff_steps(f_th: float, model: DecayModel) -> int:
    """Integer cutoff derived from a threshold, rounded down."""
    return int(math.floor(cutoff_time(f_th, model) + 1e-9))
