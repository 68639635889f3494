"""Monte Carlo study of e2e entanglement over linear repeater chains with prior links."""

from .chain import PathSpec, parse_prior_links
from .engine import SimParams, TrialResult, run_trial, run_trials, trial_rng
from .fidelity import DecayModel, cutoff_time, fidelity_at_age

__all__ = [
    "DecayModel",
    "PathSpec",
    "SimParams",
    "TrialResult",
    "cutoff_time",
    "fidelity_at_age",
    "parse_prior_links",
    "run_trial",
    "run_trials",
    "trial_rng",
]
