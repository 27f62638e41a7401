"""Seeded Monte Carlo over pre-selection, one projective measurement, post-selection.

Each run draws an intermediate outcome with Born weights ||E_i |pre>||^2,
collapses the state onto the outcome's eigenspace (minimally disturbing
update: project and renormalize), then accepts or rejects the run with
probability |<post|state>|^2.  Rejected runs are kept in the statistics; the
discarded fraction is itself one of the quantities of interest.

Randomness is counter-based: run k draws from a Philox stream keyed by
(seed, k), so results are bit-identical no matter how runs are scheduled or
aggregated.  A branch whose collapsed state is orthogonal to the
post-selection state (squared overlap below 1e-14) never consumes a sample
and is forced to reject, making "zero post-selections from an orthogonal
branch" exact rather than statistical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownObservable
from .scenarios import Scenario

ORTHO_EPS = 1e-14


@dataclass(frozen=True)
class SimSeed:
    """Root seed; per-run generators are derived from (seed, run_index)."""

    seed: int

    def run_stream(self, run_index: int) -> np.random.Generator:
        key = np.array([self.seed % (1 << 64), run_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RunRecord:
    """Outcome of a single simulated run."""

    run_index: int
    opened: str
    intermediate_outcome: str
    post_selected: bool


@dataclass(frozen=True)
class _BranchProfile:
    """Per-outcome sampling data for a fixed scenario and observable."""

    labels: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    born: tuple[float, ...]       # intermediate-outcome probabilities, sums to 1
    post_prob: tuple[float, ...]  # acceptance probability after collapsing onto each outcome


def _branch_profile(scenario: Scenario, obs_name: str) -> _BranchProfile:
    obs = scenario.observable(obs_name)
    pre = scenario.pre.amplitudes
    post = scenario.post.amplitudes
    born = []
    post_prob = []
    for i in range(obs.n_outcomes):
        projected = obs.projector(i).apply(pre)
        weight = float(np.vdot(projected, projected).real)
        born.append(weight)
        if weight < ORTHO_EPS:
            post_prob.append(0.0)
        else:
            collapsed = projected / np.sqrt(weight)
            post_prob.append(float(abs(np.vdot(post, collapsed)) ** 2))
    total = sum(born)
    return _BranchProfile(
        labels=obs.event_labels,
        eigenvalues=tuple(ev for ev, _ in obs.events),
        born=tuple(w / total for w in born),
        post_prob=tuple(post_prob),
    )


def _sample_branch(profile: _BranchProfile, rng: np.random.Generator) -> tuple[int, bool]:
    """Draw (outcome index, post_selected) from one run's stream."""
    u = rng.random()
    cumulative = 0.0
    outcome = len(profile.born) - 1  # float leftovers land on the last branch
    for i, p in enumerate(profile.born):
        cumulative += p
        if u < cumulative:
            outcome = i
            break
    p_accept = profile.post_prob[outcome]
    if p_accept < ORTHO_EPS:
        post_selected = False  # orthogonal branch: forced rejection, no draw
    else:
        post_selected = rng.random() < p_accept
    return outcome, post_selected


def _iter_branches(profile: _BranchProfile, sim_seed: SimSeed, n_runs: int):
    """Yield per-run (outcome index, post_selected) pairs.

    Reuses one Philox instance and rewinds it to the (seed, run_index) key for
    every run, which draws exactly what a fresh per-run stream would while
    skipping 90k generator constructions.
    """
    bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
    rng = np.random.Generator(bitgen)
    template = dict(bitgen.state)
    zero_counter = np.zeros(4, dtype=np.uint64)
    seed_word = sim_seed.seed % (1 << 64)
    for k in range(n_runs):
        template["state"] = {
            "counter": zero_counter,
            "key": np.array([seed_word, k], dtype=np.uint64),
        }
        template["buffer_pos"] = 4  # discard any buffered draws
        bitgen.state = template
        yield _sample_branch(profile, rng)


def simulate_run(scenario: Scenario, obs_name: str, rng: np.random.Generator,
                 run_index: int = 0) -> RunRecord:
    """Simulate one run: sample outcome, collapse, sample post-selection."""
    profile = _branch_profile(scenario, obs_name)
    outcome, post_selected = _sample_branch(profile, rng)
    return RunRecord(
        run_index=run_index,
        opened=obs_name,
        intermediate_outcome=profile.labels[outcome],
        post_selected=post_selected,
    )


def simulate_records(scenario: Scenario, obs_name: str, n_runs: int,
                     seed: SimSeed | int) -> list[RunRecord]:
    """All run records for a seeded ensemble, in run order."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    sim_seed = seed if isinstance(seed, SimSeed) else SimSeed(seed)
    profile = _branch_profile(scenario, obs_name)
    return [
        RunRecord(
            run_index=k,
            opened=obs_name,
            intermediate_outcome=profile.labels[outcome],
            post_selected=post_selected,
        )
        for k, (outcome, post_selected) in enumerate(
            _iter_branches(profile, sim_seed, n_runs)
        )
    ]


@dataclass(frozen=True)
class EnsembleStats:
    """Per-branch counts from an ensemble, with derived frequencies.

    ``counts`` maps (outcome label, post_selected) to the number of runs;
    the counts over all keys sum to n_runs.  Frequencies carry binomial
    standard errors sqrt(f (1 - f) / n).
    """

    scenario: str
    opened: str
    n_runs: int
    seed: int
    outcome_labels: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    counts: dict[tuple[str, bool], int] = field(compare=False)

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.n_runs:
            raise ValueError(f"counts sum to {total}, expected n_runs = {self.n_runs}")

    def branch_count(self, label: str, post_selected: bool) -> int:
        return self.counts.get((label, post_selected), 0)

    def outcome_count(self, label: str) -> int:
        return self.branch_count(label, True) + self.branch_count(label, False)

    def frequency(self, label: str) -> float:
        return self.outcome_count(label) / self.n_runs

    def frequency_stderr(self, label: str) -> float:
        f = self.frequency(label)
        return float(np.sqrt(f * (1.0 - f) / self.n_runs))

    @property
    def post_selected_count(self) -> int:
        return sum(v for (_, kept), v in self.counts.items() if kept)

    @property
    def post_selected_fraction(self) -> float:
        return self.post_selected_count / self.n_runs

    @property
    def post_selected_fraction_stderr(self) -> float:
        f = self.post_selected_fraction
        return float(np.sqrt(f * (1.0 - f) / self.n_runs))

    def post_selected_given_outcome(self, label: str) -> float:
        total = self.outcome_count(label)
        return self.branch_count(label, True) / total if total else 0.0

    def outcome_distribution_given_post_selected(self) -> dict[str, float]:
        kept = self.post_selected_count
        return {
            label: (self.branch_count(label, True) / kept if kept else 0.0)
            for label in self.outcome_labels
        }

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "opened": self.opened,
            "n_runs": self.n_runs,
            "seed": self.seed,
            "branches": [
                {
                    "outcome": label,
                    "eigenvalue": self.eigenvalues[i],
                    "runs": self.outcome_count(label),
                    "post_selected": self.branch_count(label, True),
                    "rejected": self.branch_count(label, False),
                    "frequency": self.frequency(label),
                    "frequency_stderr": self.frequency_stderr(label),
                    "post_selected_given_outcome": self.post_selected_given_outcome(label),
                }
                for i, label in enumerate(self.outcome_labels)
            ],
            "post_selected": {
                "runs": self.post_selected_count,
                "fraction": self.post_selected_fraction,
                "fraction_stderr": self.post_selected_fraction_stderr,
            },
            "outcome_distribution_given_post_selected":
                self.outcome_distribution_given_post_selected(),
        }

    def to_table(self) -> str:
        header = ["outcome", "runs", "post_selected", "rejected",
                  "frequency", "p(post_selected|outcome)"]
        rows = [
            [
                label,
                str(self.outcome_count(label)),
                str(self.branch_count(label, True)),
                str(self.branch_count(label, False)),
                repr(self.frequency(label)),
                repr(self.post_selected_given_outcome(label)),
            ]
            for label in self.outcome_labels
        ]
        rows.append([
            "TOTAL",
            str(self.n_runs),
            str(self.post_selected_count),
            str(self.n_runs - self.post_selected_count),
            repr(1.0),
            repr(self.post_selected_fraction),
        ])
        widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
        lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header))]
        for r in rows:
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(len(header))))
        return "\n".join(lines)


def aggregate_records(scenario: Scenario, obs_name: str, records,
                      seed: SimSeed | int, n_runs: int | None = None) -> EnsembleStats:
    """Fold run records into EnsembleStats (associative, order-independent)."""
    obs = scenario.observable(obs_name)
    counts: dict[tuple[str, bool], int] = {}
    for label in obs.event_labels:
        counts[(label, True)] = 0
        counts[(label, False)] = 0
    total = 0
    for rec in records:
        counts[(rec.intermediate_outcome, rec.post_selected)] += 1
        total += 1
    return EnsembleStats(
        scenario=scenario.name,
        opened=obs_name,
        n_runs=n_runs if n_runs is not None else total,
        seed=(seed.seed if isinstance(seed, SimSeed) else int(seed)),
        outcome_labels=obs.event_labels,
        eigenvalues=tuple(ev for ev, _ in obs.events),
        counts=counts,
    )


def simulate_ensemble(scenario: Scenario, obs_name: str, n_runs: int,
                      seed: SimSeed | int) -> EnsembleStats:
    """Aggregate statistics of n_runs seeded runs; deterministic for a fixed seed.

    Produces exactly the counts that aggregating :func:`simulate_records`
    would, without materializing the records.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    sim_seed = seed if isinstance(seed, SimSeed) else SimSeed(seed)
    profile = _branch_profile(scenario, obs_name)
    counts: dict[tuple[str, bool], int] = {}
    for label in profile.labels:
        counts[(label, True)] = 0
        counts[(label, False)] = 0
    for outcome, post_selected in _iter_branches(profile, sim_seed, n_runs):
        counts[(profile.labels[outcome], post_selected)] += 1
    return EnsembleStats(
        scenario=scenario.name,
        opened=obs_name,
        n_runs=n_runs,
        seed=sim_seed.seed,
        outcome_labels=profile.labels,
        eigenvalues=profile.eigenvalues,
        counts=counts,
    )


@dataclass(frozen=True)
class AuditViolation:
    record: RunRecord
    reason: str  # impossible_branch | unknown_observable | unknown_outcome


@dataclass(frozen=True)
class AuditReport:
    """Result of checking records for post-selections from impossible branches."""

    n_records: int
    n_post_selected: int
    violations: tuple[AuditViolation, ...]

    @property
    def clean(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.clean:
            return (
                f"{self.n_records} records, {self.n_post_selected} post-selected, "
                "no violations: every post-selected run came from an outcome "
                "compatible with the post-selection"
            )
        return f"{len(self.violations)} violation(s) in {self.n_records} records"


def mutual_exclusivity_audit(scenario: Scenario, records) -> AuditReport:
    """Verify no record was post-selected out of an orthogonal branch.

    A post-selected run whose recorded outcome collapses the state onto a
    subspace orthogonal to the post-selection state is physically impossible;
    any such record is flagged.  Records naming unknown observables or
    outcomes are flagged as malformed rather than raising, keeping the audit
    report-style.
    """
    profiles: dict[str, _BranchProfile | None] = {}
    violations: list[AuditViolation] = []
    n_records = 0
    n_post = 0
    for rec in records:
        n_records += 1
        if rec.post_selected:
            n_post += 1
        if rec.opened not in profiles:
            try:
                profiles[rec.opened] = _branch_profile(scenario, rec.opened)
            except UnknownObservable:
                profiles[rec.opened] = None
        profile = profiles[rec.opened]
        if profile is None:
            violations.append(AuditViolation(rec, "unknown_observable"))
            continue
        if rec.intermediate_outcome not in profile.labels:
            violations.append(AuditViolation(rec, "unknown_outcome"))
            continue
        idx = profile.labels.index(rec.intermediate_outcome)
        if rec.post_selected and profile.post_prob[idx] < ORTHO_EPS:
            violations.append(AuditViolation(rec, "impossible_branch"))
    return AuditReport(
        n_records=n_records,
        n_post_selected=n_post,
        violations=tuple(violations),
    )


def records_to_csv(records, stream) -> None:
    """Write raw run records as CSV: run_index, opened, outcome, post_selected."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["run_index", "opened", "outcome", "post_selected"])
    for rec in records:
        writer.writerow([
            rec.run_index,
            rec.opened,
            rec.intermediate_outcome,
            "true" if rec.post_selected else "false",
        ])
