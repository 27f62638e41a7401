"""Self-contained checks reproducing every headline number at desk scale.

Each check returns a CheckResult with the measured quantities quoted in the
detail string, so a failing check says what was computed, not just that it
failed.  :func:`run_all` executes the whole battery in a few seconds; the
CLI exposes it as the ``reproduce`` subcommand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .abl import TwoStateVector, Usage, abl_distribution, abl_probability, contextual_abl
from .errors import CounterfactualInvalid
from .hilbert import Observable, Projector, StateVector, inner_product
from .histories import (
    ch_conditional_general,
    conditional_probability,
    consistency_check,
    family_from_two_state,
    merge_families,
)
from .scenarios import n_plus_one_box, three_box
from .ensemble import simulate_ensemble

ENSEMBLE_RUNS = 90_000
ENSEMBLE_SEED = 42
RANDOM_FAMILY_COUNT = 1200
RANDOM_FAMILY_SEED = 20_240_817


@dataclass(frozen=True)
class CheckResult:
    check_id: int
    name: str
    passed: bool
    detail: str


def check_certainty() -> CheckResult:
    """Opening box A (or B) finds the particle with probability exactly one."""
    s = three_box()
    tsv = s.two_state()
    values = {}
    for obs_name, found, missing in (("A", "a", "a_prime"), ("B", "b", "b_prime")):
        obs = s.observable(obs_name)
        values[found] = abl_probability(tsv, obs, obs.label_index(found)).probability
        values[missing] = abl_probability(tsv, obs, obs.label_index(missing)).probability
    passed = (
        abs(values["a"] - 1.0) < 1e-12
        and abs(values["b"] - 1.0) < 1e-12
        and abs(values["a_prime"]) < 1e-12
        and abs(values["b_prime"]) < 1e-12
    )
    detail = ", ".join(f"P({k}) = {v:.3g}" for k, v in values.items())
    return CheckResult(1, "certainty of the opened box", passed, detail)


def check_orthogonality() -> CheckResult:
    """The "not in the opened box" states are orthogonal to the post-selection."""
    s = three_box()
    not_a = StateVector.normalized([0.0, 1.0, 1.0])
    not_b = StateVector.normalized([1.0, 0.0, 1.0])
    ov_a = abs(inner_product(s.post, not_a))
    ov_b = abs(inner_product(s.post, not_b))
    passed = ov_a < 1e-12 and ov_b < 1e-12
    return CheckResult(
        2, "orthogonality of the not-found states", passed,
        f"|<post|not-in-A>| = {ov_a:.3g}, |<post|not-in-B>| = {ov_b:.3g}",
    )


def check_ensemble_fractions() -> CheckResult:
    """Seeded 90k-run ensembles show the 1/3 and 1/9 fractions and the empty branch."""
    s = three_box()
    details = []
    passed = True
    for obs_name, found, missing in (("A", "a", "a_prime"), ("B", "b", "b_prime")):
        stats = simulate_ensemble(s, obs_name, ENSEMBLE_RUNS, ENSEMBLE_SEED)
        f_found = stats.frequency(found)
        f_post = stats.post_selected_fraction
        impossible = stats.branch_count(missing, True)
        ok = (
            abs(f_found - 1.0 / 3.0) <= 0.01
            and abs(f_post - 1.0 / 9.0) <= 0.01
            and impossible == 0
        )
        passed = passed and ok
        details.append(
            f"open {obs_name}: freq({found}) = {f_found:.4f}, "
            f"post-selected = {f_post:.4f}, "
            f"post-selected & {missing} = {impossible}"
        )
    return CheckResult(3, "ensemble fractions at 90000 runs", passed, "; ".join(details))


def check_merged_inconsistency() -> CheckResult:
    """Pooling both observables' events yields interference of exactly 1/9."""
    s = three_box()
    tsv = s.two_state()
    merged = merge_families([
        family_from_two_state(tsv, s.observable("A")),
        family_from_two_state(tsv, s.observable("B")),
    ])
    report = consistency_check(merged)
    # events are [P_a, P_not_a, P_b, P_not_b]; the (P_a, P_b) entry is (0, 2)
    violation = float(report.violations[0][2])
    passed = (not report.consistent) and abs(violation - 1.0 / 9.0) < 1e-12
    return CheckResult(
        4, "merged-family interference equals 1/9", passed,
        f"consistent = {report.consistent}, (found-A, found-B) term = {violation!r}",
    )


def check_single_family_consistency() -> CheckResult:
    """Each observable's own family is consistent and reproduces the ABL values."""
    s = three_box()
    tsv = s.two_state()
    passed = True
    details = []
    for obs_name in ("A", "B"):
        obs = s.observable(obs_name)
        fam = family_from_two_state(tsv, obs)
        report = consistency_check(fam)
        abl_values = abl_distribution(tsv, obs)
        max_delta = max(
            abs(conditional_probability(fam, k) - abl_values[k])
            for k in range(obs.n_outcomes)
        )
        ok = report.consistent and max_delta < 1e-12
        passed = passed and ok
        details.append(
            f"{obs_name}: consistent = {report.consistent}, "
            f"max |conditional - abl| = {max_delta:.3g}"
        )
    return CheckResult(5, "single-family consistency and agreement", passed, "; ".join(details))


def _random_consistent_case(rng: np.random.Generator):
    """Random rank-1 selection pair plus observable whose family is consistent.

    Writing u_i = <c_i|pre> and v_i = <c_i|post> in the observable eigenbasis,
    consistency of the rank-1 family is equivalent to Re(w_i conj(w_j)) = 0
    for i != j where w_i = u_i conj(v_i).  Nonzero w_i must therefore be
    pairwise perpendicular as plane vectors, which allows at most two of
    them: one can zero out all but one w_i (three ways: concentrate pre, or
    post, or split the zeros between them), or keep exactly two w's with a
    purely imaginary ratio.  All four constructions are sampled here.

    Coefficient magnitudes are kept in [0.3, 2] with the anchor branch k in
    [1, 2], and draws are rejected until the selection weight |<pre|post>|^2
    clears 1e-3: near-null post-selections would let plain matrix-product
    rounding dominate the conditionals being compared.
    """
    dim = int(rng.integers(2, 9))
    gauss = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, _ = np.linalg.qr(gauss)
    basis = [q[:, i] for i in range(dim)]
    k = int(rng.integers(0, dim))
    style = int(rng.integers(0, 4))

    def coeff(lo=0.3, hi=2.0) -> complex:
        phase = rng.uniform(0.0, 2.0 * np.pi)
        return float(rng.uniform(lo, hi)) * complex(np.cos(phase), np.sin(phase))

    def coeffs(nonzero_idx) -> np.ndarray:
        out = np.zeros(dim, dtype=np.complex128)
        for i in nonzero_idx:
            out[i] = coeff(1.0, 2.0) if i == k else coeff()
        return out

    while True:
        if style == 0:
            # post concentrated on branch k, pre arbitrary
            u = coeffs(range(dim))
            v = coeffs([k])
        elif style == 1:
            # pre concentrated on branch k, post arbitrary
            u = coeffs([k])
            v = coeffs(range(dim))
        elif style == 2:
            # zeros split: every other branch kills u or v
            u_live = {k}
            v_live = {k}
            for i in range(dim):
                if i == k:
                    continue
                (u_live if rng.random() < 0.5 else v_live).add(i)
            u = coeffs(sorted(u_live))
            v = coeffs(sorted(v_live))
        else:
            # two live branches whose weights have a purely imaginary ratio
            m = int(rng.integers(0, dim - 1))
            if m >= k:
                m += 1
            u = coeffs([k, m])
            v = coeffs([k])
            w_k = u[k] * np.conj(v[k])
            sign = 1.0 if rng.random() < 0.5 else -1.0
            target = np.angle(w_k) + sign * np.pi / 2.0  # arg of w_m
            v_phase = np.angle(u[m]) - target
            v[m] = float(rng.uniform(0.3, 2.0)) * complex(np.cos(v_phase), np.sin(v_phase))

        pre_vec = sum(u[i] * basis[i] for i in range(dim))
        post_vec = sum(v[i] * basis[i] for i in range(dim))
        pre = StateVector.normalized(pre_vec)
        post = StateVector.normalized(post_vec)
        if abs(np.vdot(post.amplitudes, pre.amplitudes)) ** 2 >= 1e-3:
            break

    obs = Observable(
        name="C",
        events=tuple(
            (float(i), Projector.onto(StateVector.normalized(basis[i])))
            for i in range(dim)
        ),
    )
    return TwoStateVector(pre, post), obs


def check_random_family_equivalence(
    count: int = RANDOM_FAMILY_COUNT, seed: int = RANDOM_FAMILY_SEED
) -> CheckResult:
    """Whenever a random rank-1 family is consistent, chain conditionals = ABL."""
    rng = np.random.default_rng(seed)
    compared = 0
    skipped = 0
    worst = 0.0
    for _ in range(count):
        tsv, obs = _random_consistent_case(rng)
        fam = family_from_two_state(tsv, obs)
        if not consistency_check(fam).consistent:
            skipped += 1  # construction is approximate only through rounding
            continue
        abl_values = abl_distribution(tsv, obs)
        for k in range(obs.n_outcomes):
            worst = max(worst, abs(ch_conditional_general(tsv, obs, k) - abl_values[k]))
        compared += 1
    # generic draws almost never pass the consistency gate; include some anyway
    for _ in range(count // 4):
        dim = int(rng.integers(2, 9))
        gauss = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, _ = np.linalg.qr(gauss)
        tsv = TwoStateVector(
            StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim)),
            StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim)),
        )
        obs = Observable(
            name="C",
            events=tuple(
                (float(i), Projector.onto(StateVector.normalized(q[:, i])))
                for i in range(dim)
            ),
        )
        weight = abs(np.vdot(tsv.post.amplitudes, tsv.pre.amplitudes)) ** 2
        if weight < 1e-3 or not consistency_check(family_from_two_state(tsv, obs)).consistent:
            skipped += 1
            continue
        abl_values = abl_distribution(tsv, obs)
        for k in range(obs.n_outcomes):
            worst = max(worst, abs(ch_conditional_general(tsv, obs, k) - abl_values[k]))
        compared += 1
    passed = compared >= count * 0.9 and worst < 1e-10
    return CheckResult(
        6, "chain conditionals = ABL on random consistent families", passed,
        f"{compared} consistent families compared ({skipped} inconsistent draws "
        f"skipped), max |chain - abl| = {worst:.3g}",
    )


def check_n_box() -> CheckResult:
    """Certainty generalizes to n boxes; n = 2 reproduces the three-box system."""
    worst = 0.0
    for n in (2, 3, 5, 10):
        s = n_plus_one_box(n)
        tsv = s.two_state()
        for i in range(n):
            p = abl_probability(tsv, s.observable(f"Box{i + 1}"), 0).probability
            worst = max(worst, abs(p - 1.0))
    s2 = n_plus_one_box(2)
    s3 = three_box()
    comp_delta = max(
        float(np.max(np.abs(s2.pre.amplitudes - s3.pre.amplitudes))),
        float(np.max(np.abs(s2.post.amplitudes - s3.post.amplitudes))),
    )
    passed = worst < 1e-12 and comp_delta < 1e-12
    return CheckResult(
        7, "n-box certainty and n = 2 reduction", passed,
        f"max |P(found) - 1| = {worst:.3g} over n in (2, 3, 5, 10); "
        f"n = 2 componentwise delta = {comp_delta:.3g}",
    )


def check_contextual_audit() -> CheckResult:
    """Counterfactual cross-observable query is rejected; same-observable query is not."""
    s = three_box()
    tsv = s.two_state()
    obs_a = s.observable("A")
    obs_b = s.observable("B")
    try:
        contextual_abl(tsv, obs_a, obs_b, obs_b.label_index("b"))
        rejected = False
        rejection = "no error raised"
    except CounterfactualInvalid as exc:
        rejected = True
        rejection = f"rejected with max violation {exc.max_violation:.6g}"
    same = contextual_abl(tsv, obs_a, obs_a, obs_a.label_index("a"))
    same_ok = same.usage is Usage.NON_COUNTERFACTUAL and abs(same.probability - 1.0) < 1e-12
    passed = rejected and same_ok
    return CheckResult(
        8, "counterfactual usage audit", passed,
        f"query B given A measured: {rejection}; query A given A measured: "
        f"usage = {same.usage.value}, P = {same.probability:.3g}",
    )


def check_determinism() -> CheckResult:
    """Identical seeds give byte-identical ensemble statistics documents."""
    s = three_box()
    docs = [
        json.dumps(simulate_ensemble(s, "A", 10_000, 7).to_json_dict(), indent=2)
        for _ in range(2)
    ]
    passed = docs[0] == docs[1]
    return CheckResult(
        9, "seeded simulation determinism", passed,
        "two 10000-run documents are byte-identical" if passed
        else "documents differ",
    )


def run_all() -> list[CheckResult]:
    return [
        check_certainty(),
        check_orthogonality(),
        check_ensemble_fractions(),
        check_merged_inconsistency(),
        check_single_family_consistency(),
        check_random_family_equivalence(),
        check_n_box(),
        check_contextual_audit(),
        check_determinism(),
    ]
