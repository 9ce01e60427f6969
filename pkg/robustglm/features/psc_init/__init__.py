"""Two-stage deterministic initial estimator."""

from robustglm.features.psc_init.services import (
    Candidate,
    CandidateSet,
    candidate_set,
    initial_estimate,
    objective_L,
    restore_indices,
    stage1,
    stage2,
    trim_indices,
    within_bounds,
)

__all__ = [
    "Candidate",
    "CandidateSet",
    "candidate_set",
    "initial_estimate",
    "objective_L",
    "restore_indices",
    "stage1",
    "stage2",
    "trim_indices",
    "within_bounds",
]
