"""History families over three times, their consistency test, and probabilities.

A history family fixes an initial projector D at preparation time, a set of
event projectors [E^a] at the intermediate time, and a final projector F at
post-selection time (zero Hamiltonian throughout, so nothing evolves between
the slots).  The family supports classical probability assignments exactly
when the interference between any two distinct branches vanishes:

    Re Tr((D E^a F)^dagger  D E^b F) = 0   for all a != b.

Only the real part enters the test ("weak" consistency); the imaginary parts
are reported alongside as a diagnostic but never affect the verdict.  When
the test passes, each history D ^ E^a ^ F carries weight Tr(E^a D E^a F) and
conditioning on the selection follows the usual ratio rule.

A merged family (see :func:`merge_families`) pools the event sets of several
observables into one counterfactual event set.  Such a set is deliberately
exempt from the orthogonality/completeness rules that a single observable's
events satisfy, because its whole point is to be fed to the consistency test:
pooling incompatible observables is exactly how invalid counterfactual
reasoning shows up as a nonzero interference term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abl import EPS_DENOMINATOR, TwoStateVector, abl_distribution
from .errors import ConditioningOnNull, DimensionMismatch, InconsistentFamily
from .hilbert import EPS_NORM, Observable, Projector

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class HistoryFamily:
    """Initial projector, intermediate event set, final projector.

    Families built from a single observable's events satisfy pairwise
    orthogonality and completeness; merged counterfactual event sets need
    not, and are judged only by :func:`consistency_check`.
    """

    initial: Projector
    events: tuple[Projector, ...]
    final: Projector

    def __post_init__(self):
        events = tuple(self.events)
        if not events:
            raise ValueError("history family needs at least one event")
        dim = self.initial.dim
        if self.final.dim != dim or any(e.dim != dim for e in events):
            raise DimensionMismatch("history family members must share one dimension")
        object.__setattr__(self, "events", events)

    @property
    def dim(self) -> int:
        return self.initial.dim

    @property
    def n_events(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class History:
    """One branch of a family: initial ^ events[event_index] ^ final."""

    family: HistoryFamily
    event_index: int

    def __post_init__(self):
        if not 0 <= self.event_index < self.family.n_events:
            raise IndexError(
                f"event index {self.event_index} out of range for family "
                f"with {self.family.n_events} events"
            )


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    """Branch-interference matrix and the verdict derived from it.

    ``violations[a][b]`` is Re Tr((D E^a F)^dagger D E^b F); the diagonal
    holds the (nonnegative) branch weights and is ignored by the verdict.
    ``imag_parts`` carries the imaginary components for inspection; a strict
    "medium" consistency condition would also require these to vanish, but
    the verdict here uses the real part only.
    """

    consistent: bool
    violations: np.ndarray
    imag_parts: np.ndarray
    max_violation: float
    max_imag_violation: float
    tolerance: float

    def __post_init__(self):
        v = np.asarray(self.violations, dtype=np.float64)
        im = np.asarray(self.imag_parts, dtype=np.float64)
        v.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "violations", v)
        object.__setattr__(self, "imag_parts", im)


def family_from_two_state(tsv: TwoStateVector, obs: Observable) -> HistoryFamily:
    """Family with rank-1 endpoints from a selection pair and one observable."""
    return HistoryFamily(
        initial=Projector.onto(tsv.pre),
        events=tuple(obs.projector(i) for i in range(obs.n_outcomes)),
        final=Projector.onto(tsv.post),
    )


def consistency_check(fam: HistoryFamily, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    """Evaluate branch interference for every event pair of the family.

    The chain operator of branch a is D E^a F; entry (a, b) of the returned
    matrices is its Hilbert-Schmidt overlap with branch b's chain operator.
    The family is consistent iff every off-diagonal real part is below tol.
    """
    d_mat = fam.initial.matrix()
    f_mat = fam.final.matrix()
    chains = [d_mat @ e.matrix() @ f_mat for e in fam.events]
    n = len(chains)
    overlaps = np.empty((n, n), dtype=np.complex128)
    for a in range(n):
        for b in range(n):
            overlaps[a, b] = np.trace(chains[a].conj().T @ chains[b])
    re = overlaps.real.copy()
    im = overlaps.imag.copy()
    off_diag = ~np.eye(n, dtype=bool)
    max_violation = float(np.max(np.abs(re[off_diag]))) if n > 1 else 0.0
    max_imag = float(np.max(np.abs(im[off_diag]))) if n > 1 else 0.0
    return ConsistencyReport(
        consistent=max_violation < tol,
        violations=re,
        imag_parts=im,
        max_violation=max_violation,
        max_imag_violation=max_imag,
        tolerance=tol,
    )


def _require_consistent(fam: HistoryFamily) -> ConsistencyReport:
    report = consistency_check(fam)
    if not report.consistent:
        raise InconsistentFamily(
            f"family fails the consistency condition "
            f"(max violation {report.max_violation:.6g} >= {report.tolerance:g})"
        )
    return report


def history_probability(h: History) -> float:
    """Weight Tr(E^a D E^a F) of one branch of a consistent family."""
    _require_consistent(h.family)
    fam = h.family
    e_mat = fam.events[h.event_index].matrix()
    value = np.trace(e_mat @ fam.initial.matrix() @ e_mat @ fam.final.matrix())
    return float(value.real)


def conditional_probability(fam: HistoryFamily, alpha: int) -> float:
    """Probability of event alpha given both endpoint events, for a consistent family."""
    if not 0 <= alpha < fam.n_events:
        raise IndexError(f"event index {alpha} out of range")
    _require_consistent(fam)
    d_mat = fam.initial.matrix()
    f_mat = fam.final.matrix()
    weight = np.trace(d_mat @ f_mat).real
    if weight < EPS_DENOMINATOR:
        raise ConditioningOnNull(
            f"endpoint weight Tr(DF) = {weight:.3e} vanishes; nothing to condition on"
        )
    e_mat = fam.events[alpha].matrix()
    numerator = np.trace(e_mat @ d_mat @ e_mat @ f_mat).real
    return float(numerator / weight)


def ch_conditional_general(tsv: TwoStateVector, obs: Observable, k: int) -> float:
    """Raw chain conditional Tr(D C_k F C_k) / Tr(D F), consistency NOT assumed.

    This is the general-formalism value for "the system had property C_k at
    the intermediate time".  It coincides with the ABL probability only when
    the family built from (tsv, obs) is consistent; without consistency it is
    reported as a diagnostic quantity, not a probability.  Endpoints are the
    rank-1 projectors of the selection states; any apparatus degrees of
    freedom cancel between numerator and denominator and are never modeled.
    """
    if obs.dim != tsv.dim:
        raise DimensionMismatch(
            f"observable {obs.name!r} dim {obs.dim} != state dim {tsv.dim}"
        )
    if not 0 <= k < obs.n_outcomes:
        raise IndexError(f"outcome index {k} out of range for {obs.name!r}")
    d_mat = Projector.onto(tsv.pre).matrix()
    f_mat = Projector.onto(tsv.post).matrix()
    weight = np.trace(d_mat @ f_mat).real
    if weight < EPS_DENOMINATOR:
        raise ConditioningOnNull(
            f"endpoint weight Tr(DF) = {weight:.3e} vanishes; nothing to condition on"
        )
    c_mat = obs.projector(k).matrix()
    numerator = np.trace(d_mat @ c_mat @ f_mat @ c_mat).real
    return float(numerator / weight)


@dataclass(frozen=True)
class EquivalenceReport:
    """Per-outcome comparison of the chain conditionals against the ABL values."""

    abl: tuple[float, ...]
    chain: tuple[float, ...]
    deltas: tuple[float, ...]
    max_delta: float
    consistency: ConsistencyReport


def abl_ch_equivalence(tsv: TwoStateVector, obs: Observable) -> EquivalenceReport:
    """Check that chain conditionals reproduce the ABL rule outcome-for-outcome.

    Requires the family built from (tsv, obs) to be consistent; raises
    InconsistentFamily otherwise.  For consistent rank-1 endpoint families
    the two calculations agree to floating precision, which is the formal
    content of the reduction of the histories conditional to the ABL formula.
    """
    fam = family_from_two_state(tsv, obs)
    report = _require_consistent(fam)
    abl_values = tuple(abl_distribution(tsv, obs))
    chain_values = tuple(
        ch_conditional_general(tsv, obs, k) for k in range(obs.n_outcomes)
    )
    deltas = tuple(abs(a - c) for a, c in zip(abl_values, chain_values))
    return EquivalenceReport(
        abl=abl_values,
        chain=chain_values,
        deltas=deltas,
        max_delta=max(deltas),
        consistency=report,
    )


def merge_families(fams) -> HistoryFamily:
    """Pool the event sets of several families sharing the same endpoints.

    The result is the counterfactual event set "one of these observables was
    measured, with these outcomes".  Its events are a plain concatenation and
    are NOT required to be pairwise orthogonal or complete; feeding the merge
    to :func:`consistency_check` is what decides whether reasoning across the
    pooled alternatives is legitimate.
    """
    fams = list(fams)
    if not fams:
        raise ValueError("merge_families needs at least one family")
    first = fams[0]
    for fam in fams[1:]:
        if fam.dim != first.dim:
            raise DimensionMismatch("merged families must share one dimension")
        if not fam.initial.matches(first.initial, tol=EPS_NORM):
            raise ValueError("merged families must share the initial projector")
        if not fam.final.matches(first.final, tol=EPS_NORM):
            raise ValueError("merged families must share the final projector")
    events = tuple(e for fam in fams for e in fam.events)
    return HistoryFamily(initial=first.initial, events=events, final=first.final)
