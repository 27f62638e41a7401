"""Probabilities of intermediate outcomes between pre- and post-selection.

For a system prepared in ``pre`` and later post-selected on ``post``, the
probability that an intermediate projective measurement of observable C
yielded outcome c_j is

    P(c_j) = |<post| P_j |pre>|^2 / sum_i |<post| P_i |pre>|^2

where P_i are the eigenspace projectors of C.  This formula is only about
the observable that was actually measured.  :func:`contextual_abl` makes
that explicit: each query carries the actually-measured observable, and a
query about any *other* observable is flagged as counterfactual and answered
only when the combined history family is interference-free (see
:mod:`prepost.histories`); otherwise the query has no probability and
CounterfactualInvalid is raised with diagnostics attached.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditioningOnNull,
    CounterfactualInvalid,
    DimensionMismatch,
    PostSelectionImpossible,
)
from .hilbert import EPS_NORM, Observable, StateVector, apply_projector, inner_product

EPS_DENOMINATOR = 1e-12


class Usage(enum.Enum):
    """Whether a query concerns the observable that was actually measured."""

    NON_COUNTERFACTUAL = "non_counterfactual"
    COUNTERFACTUAL = "counterfactual"


@dataclass(frozen=True)
class TwoStateVector:
    """Pre- and post-selection pair <post| |pre> describing one selected ensemble.

    ``feasible`` records whether post-selection is possible at all when the
    intermediate measurement is trivial (identity), i.e. |<post|pre>|^2 > 0.
    """

    pre: StateVector
    post: StateVector
    feasible: bool = field(init=False)

    def __post_init__(self):
        if self.pre.dim != self.post.dim:
            raise DimensionMismatch(
                f"pre dim {self.pre.dim} != post dim {self.post.dim}"
            )
        overlap_sq = abs(inner_product(self.post, self.pre)) ** 2
        object.__setattr__(self, "feasible", bool(overlap_sq > EPS_DENOMINATOR))

    @property
    def dim(self) -> int:
        return self.pre.dim


@dataclass(frozen=True)
class AblResult:
    """One intermediate-outcome probability plus its usage classification.

    probability == numerator / denominator; numerator and denominator are the
    raw quadratic forms |<post|P_j|pre>|^2 and sum_i |<post|P_i|pre>|^2 so
    callers can audit the arithmetic.  ``consistency_certified`` is True only
    on the counterfactual path, after the merged history family passed the
    consistency check.
    """

    probability: float
    usage: Usage
    consistency_certified: bool
    numerator: float
    denominator: float


def _branch_amplitudes(tsv: TwoStateVector, obs: Observable) -> np.ndarray:
    """<post| P_i |pre> for every event of obs."""
    post = tsv.post.amplitudes
    amps = np.empty(obs.n_outcomes, dtype=np.complex128)
    for i in range(obs.n_outcomes):
        projected, _ = apply_projector(obs.projector(i), tsv.pre)
        amps[i] = np.vdot(post, projected)
    return amps


def _weights(tsv: TwoStateVector, obs: Observable) -> tuple[np.ndarray, float]:
    amps = _branch_amplitudes(tsv, obs)
    weights = np.abs(amps) ** 2
    denominator = float(np.sum(weights))
    if denominator < EPS_DENOMINATOR:
        raise PostSelectionImpossible(
            f"no outcome of {obs.name!r} permits the post-selection "
            f"(denominator {denominator:.3e})"
        )
    return weights, denominator


def _check(tsv: TwoStateVector, obs: Observable) -> None:
    if obs.dim != tsv.dim:
        raise DimensionMismatch(
            f"observable {obs.name!r} dim {obs.dim} != state dim {tsv.dim}"
        )
    obs.require_valid()


def abl_probability(tsv: TwoStateVector, obs: Observable, outcome_index: int) -> AblResult:
    """Probability of one outcome of the actually-measured observable.

    The caller asserts obs is what was measured at the intermediate time, so
    the usage is non-counterfactual by construction.
    """
    _check(tsv, obs)
    if not 0 <= outcome_index < obs.n_outcomes:
        raise IndexError(
            f"outcome index {outcome_index} out of range for {obs.name!r} "
            f"with {obs.n_outcomes} outcomes"
        )
    weights, denominator = _weights(tsv, obs)
    numerator = float(weights[outcome_index])
    return AblResult(
        probability=numerator / denominator,
        usage=Usage.NON_COUNTERFACTUAL,
        consistency_certified=False,
        numerator=numerator,
        denominator=denominator,
    )


def abl_distribution(tsv: TwoStateVector, obs: Observable) -> list[float]:
    """Probabilities over all outcomes of the measured observable; sums to 1."""
    _check(tsv, obs)
    weights, denominator = _weights(tsv, obs)
    return [float(w) / denominator for w in weights]


def _find_matching_event(measured: Observable, queried: Observable,
                         queried_outcome: int) -> int | None:
    """Index of the measured event equal to the queried one, or None.

    Events are matched by eigenspace (projectors equal within EPS_NORM), not
    by eigenvalue label: the labels are arbitrary reals while the physics
    lives in the subspaces.
    """
    target = queried.projector(queried_outcome)
    for i in range(measured.n_outcomes):
        if measured.projector(i).matches(target, tol=EPS_NORM):
            return i
    return None


def contextual_abl(tsv: TwoStateVector, measured: Observable, queried: Observable,
                   queried_outcome: int) -> AblResult:
    """Outcome probability with the actually-measured observable made explicit.

    If the queried eigenspace occurs among the measured observable's events,
    this is an ordinary non-counterfactual query and the measured observable's
    distribution applies.  Otherwise the query is counterfactual: the event
    sets of both observables are pooled into one history family, and a
    probability is returned only if that family is consistent (certified in
    the result).  An inconsistent family means the question has no answer for
    any individual system; CounterfactualInvalid is raised carrying the
    violation magnitude and, for study only, the raw chain conditional one
    would otherwise be tempted to quote.
    """
    from . import histories  # deferred: histories imports this module's types

    _check(tsv, measured)
    _check(tsv, queried)
    if not 0 <= queried_outcome < queried.n_outcomes:
        raise IndexError(
            f"outcome index {queried_outcome} out of range for {queried.name!r}"
        )

    match = _find_matching_event(measured, queried, queried_outcome)
    if match is not None:
        return abl_probability(tsv, measured, match)

    merged = histories.merge_families([
        histories.family_from_two_state(tsv, measured),
        histories.family_from_two_state(tsv, queried),
    ])
    report = histories.consistency_check(merged)
    if report.consistent:
        # Defensive branch: with rank-1 selection states and two complete
        # observables the pooled family can never pass the test (each
        # observable's branch weights must sum to the same selection overlap,
        # which forces an interfering pair), but the contract is honored for
        # any inputs where it could.
        base = abl_probability(tsv, queried, queried_outcome)
        return AblResult(
            probability=base.probability,
            usage=Usage.COUNTERFACTUAL,
            consistency_certified=True,
            numerator=base.numerator,
            denominator=base.denominator,
        )

    try:
        diagnostic = histories.ch_conditional_general(tsv, queried, queried_outcome)
    except ConditioningOnNull:
        diagnostic = None
    raise CounterfactualInvalid(
        f"counterfactual query of {queried.name!r} given a measurement of "
        f"{measured.name!r}: merged history family is inconsistent "
        f"(max violation {report.max_violation:.6g}); no probability exists",
        explanation="merged_family_inconsistent",
        max_violation=report.max_violation,
        diagnostic_conditional=diagnostic,
        consistency=report,
    )
