"""Tests for states, projectors, observables, and the trace operations.

Derived expected values are frozen after computing them with independent
oracles written inline here (brute-force sums and dense matrix products),
never with the functions under test.
"""

import numpy as np
import pytest

from prepost.errors import DimensionMismatch, NormalizationError, ZeroSpanError
from prepost.hilbert import (
    EPS_NORM,
    Observable,
    Projector,
    StateVector,
    apply_projector,
    inner_product,
    projector_from_basis,
    trace_product,
    validate_observable,
)

INV_SQRT3 = 1.0 / np.sqrt(3.0)


def random_state(rng, dim):
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_projector(rng, dim, rank):
    gauss = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return projector_from_basis([gauss[:, i] for i in range(rank)])


class TestStateVector:
    def test_unit_input_kept_bit_exact(self):
        amps = np.array([INV_SQRT3, INV_SQRT3, INV_SQRT3], dtype=complex)
        sv = StateVector(amps)
        assert np.array_equal(sv.amplitudes, amps)
        again = StateVector(sv.amplitudes)
        assert np.array_equal(again.amplitudes, sv.amplitudes)

    def test_snaps_small_norm_error(self):
        amps = np.array([1.0 + 3e-7, 0.0, 0.0], dtype=complex)
        sv = StateVector(amps)
        assert abs(np.linalg.norm(sv.amplitudes) - 1.0) < 1e-15

    def test_rejects_norm_far_from_one(self):
        with pytest.raises(NormalizationError) as exc:
            StateVector(np.array([0.5, 0.0], dtype=complex))
        assert "0.5" in str(exc.value)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            StateVector(np.array([np.nan, 0.0], dtype=complex))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            StateVector(np.array([], dtype=complex))

    def test_normalized_classmethod(self):
        sv = StateVector.normalized([3.0, 4.0])
        assert abs(abs(sv.amplitudes[0]) - 0.6) < 1e-15
        assert abs(abs(sv.amplitudes[1]) - 0.8) < 1e-15
        with pytest.raises(NormalizationError):
            StateVector.normalized([0.0, 0.0])

    def test_immutability_and_hash(self):
        sv = StateVector.basis_state(3, 0)
        with pytest.raises(ValueError):
            sv.amplitudes[0] = 2.0
        assert hash(sv) == hash(StateVector.basis_state(3, 0))
        assert sv == StateVector.basis_state(3, 0)
        assert sv != StateVector.basis_state(3, 1)


class TestInnerProduct:
    def test_post_state_orthogonal_to_not_found_state(self, box3):
        # the collapsed "not in A" state has no overlap with the post-selection
        not_in_a = StateVector.normalized([0.0, 1.0, 1.0])
        assert abs(inner_product(box3.post, not_in_a)) < 1e-12

    def test_normalization(self, box3):
        assert inner_product(box3.pre, box3.pre) == pytest.approx(1.0, abs=1e-15)

    def test_pre_post_overlap_is_one_third(self, box3):
        # oracle: brute-force componentwise sum
        brute = sum(
            complex(box3.post.amplitudes[i]).conjugate() * complex(box3.pre.amplitudes[i])
            for i in range(3)
        )
        assert brute == pytest.approx((1.0 + 1.0 - 1.0) / 3.0, abs=1e-15)
        assert inner_product(box3.post, box3.pre) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_conjugate_symmetry(self, rng):
        for _ in range(50):
            dim = int(rng.integers(1, 9))
            u, v = random_state(rng, dim), random_state(rng, dim)
            assert inner_product(u, v) == inner_product(v, u).conjugate()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            inner_product(StateVector.basis_state(2, 0), StateVector.basis_state(3, 0))


class TestApplyProjector:
    def test_plane_projection_of_uniform_state(self, box3):
        # oracle: explicit dense matrix-vector product
        p_bc = Projector(3, (StateVector.basis_state(3, 1), StateVector.basis_state(3, 2)))
        dense = np.diag([0.0, 1.0, 1.0]).astype(complex)
        oracle_vec = dense @ box3.pre.amplitudes
        oracle_norm_sq = float(np.vdot(oracle_vec, oracle_vec).real)
        assert oracle_norm_sq == pytest.approx(2.0 / 3.0, abs=1e-15)

        vec, norm_sq = apply_projector(p_bc, box3.pre)
        assert np.allclose(vec, oracle_vec, atol=1e-15)
        assert norm_sq == pytest.approx(2.0 / 3.0, abs=1e-12)
        # direction check: proportional to |b> + |c>
        assert vec[0] == 0.0
        assert vec[1] == pytest.approx(vec[2], abs=1e-15)

    def test_vector_in_range_unchanged(self, rng):
        p = random_projector(rng, 5, 2)
        inside = StateVector.normalized(p.basis[0].amplitudes + 0.7 * p.basis[1].amplitudes)
        vec, norm_sq = apply_projector(p, inside)
        assert np.allclose(vec, inside.amplitudes, atol=1e-12)
        assert norm_sq == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vector_killed(self):
        p_a = Projector.onto(StateVector.basis_state(3, 0))
        vec, norm_sq = apply_projector(p_a, StateVector.basis_state(3, 1))
        assert norm_sq == 0.0
        assert np.all(vec == 0.0)

    def test_norm_sq_matches_self_inner_product(self, rng):
        for _ in range(30):
            dim = int(rng.integers(2, 9))
            rank = int(rng.integers(1, dim + 1))
            p = random_projector(rng, dim, rank)
            v = random_state(rng, dim)
            vec, norm_sq = apply_projector(p, v)
            assert norm_sq == pytest.approx(float(np.vdot(vec, vec).real), abs=1e-12)
            assert -1e-12 <= norm_sq <= 1.0 + 1e-12

    def test_dimension_mismatch(self):
        p = Projector.identity(2)
        with pytest.raises(DimensionMismatch):
            apply_projector(p, StateVector.basis_state(3, 0))


class TestProjectorFromBasis:
    def test_plane_from_two_basis_states(self):
        p = projector_from_basis([StateVector.basis_state(3, 1), StateVector.basis_state(3, 2)])
        assert p.rank == 2
        assert np.allclose(p.matrix(), np.diag([0.0, 1.0, 1.0]), atol=1e-12)

    def test_duplicate_inputs_collapse_rank(self):
        a = StateVector.basis_state(3, 0)
        p = projector_from_basis([a, a])
        assert p.rank == 1
        assert np.allclose(p.matrix(), np.diag([1.0, 0.0, 0.0]), atol=1e-12)

    def test_basis_independence(self):
        plus = StateVector.normalized([0.0, 1.0, 1.0])
        minus = StateVector.normalized([0.0, 1.0, -1.0])
        rotated = projector_from_basis([plus, minus])
        axis_aligned = projector_from_basis(
            [StateVector.basis_state(3, 1), StateVector.basis_state(3, 2)]
        )
        assert np.allclose(rotated.matrix(), axis_aligned.matrix(), atol=1e-12)

    def test_zero_span_rejected(self):
        with pytest.raises(ZeroSpanError):
            projector_from_basis([np.zeros(3, dtype=complex)])

    def test_dependent_span_drops_rank(self, rng):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        p = projector_from_basis([v, 2.0 * v, -0.5j * v])
        assert p.rank == 1

    def test_raw_sequences_accepted(self):
        p = projector_from_basis([[1.0, 1.0], [1.0, -1.0]])
        assert p.rank == 2
        assert np.allclose(p.matrix(), np.eye(2), atol=1e-12)

    def test_projector_structural_invariants(self, rng):
        # every constructed projector: idempotent and Hermitian within EPS_NORM
        for _ in range(40):
            dim = int(rng.integers(1, 9))
            rank = int(rng.integers(1, dim + 1))
            mat = random_projector(rng, dim, rank).matrix()
            assert np.max(np.abs(mat @ mat - mat)) < EPS_NORM
            assert np.max(np.abs(mat - mat.conj().T)) < EPS_NORM


class TestProjectorType:
    def test_identity(self):
        p = Projector.identity(4)
        assert p.rank == 4
        assert np.allclose(p.matrix(), np.eye(4), atol=0)

    def test_rejects_non_orthonormal_basis(self):
        a = StateVector.basis_state(2, 0)
        tilted = StateVector.normalized([1.0, 1.0])
        with pytest.raises(ValueError):
            Projector(2, (a, tilted))

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            Projector(2, tuple(StateVector.basis_state(2, i % 2) for i in range(3)))

    def test_matches(self):
        plus = StateVector.normalized([1.0, 1.0, 0.0])
        minus = StateVector.normalized([1.0, -1.0, 0.0])
        p1 = projector_from_basis([plus, minus])
        p2 = projector_from_basis(
            [StateVector.basis_state(3, 0), StateVector.basis_state(3, 1)]
        )
        assert p1.matches(p2)
        assert not p1.matches(Projector.identity(3))

    def test_zero_rank_allowed_directly(self):
        p = Projector(3, ())
        assert p.rank == 0
        assert np.all(p.matrix() == 0.0)


class TestValidateObservable:
    def test_box_observable_passes(self, box3):
        report = validate_observable(box3.observable("A"))
        assert report.passed
        assert report.max_orthogonality_violation < EPS_NORM
        assert report.max_completeness_violation < EPS_NORM

    def test_incomplete_events_fail(self):
        p_a = Projector.onto(StateVector.basis_state(3, 0))
        obs = Observable(name="partial", events=((1.0, p_a),))
        report = validate_observable(obs)
        assert not report.complete
        assert report.orthogonal
        assert not report.passed
        assert report.max_completeness_violation == pytest.approx(1.0, abs=1e-12)

    def test_overlapping_events_fail(self):
        p_a = Projector.onto(StateVector.basis_state(3, 0))
        p_ab = Projector(3, (StateVector.basis_state(3, 0), StateVector.basis_state(3, 1)))
        obs = Observable(name="overlap", events=((1.0, p_a), (2.0, p_ab)))
        report = validate_observable(obs)
        assert not report.orthogonal
        assert report.max_orthogonality_violation == pytest.approx(1.0, abs=1e-12)

    def test_duplicate_eigenvalues_fail(self):
        obs = Observable(
            name="dup",
            events=(
                (1.0, Projector.onto(StateVector.basis_state(2, 0))),
                (1.0, Projector.onto(StateVector.basis_state(2, 1))),
            ),
            event_labels=("x", "y"),
        )
        report = validate_observable(obs)
        assert not report.eigenvalues_distinct
        assert not report.passed

    def test_default_event_labels(self):
        obs = Observable(
            name="Z",
            events=(
                (1.0, Projector.onto(StateVector.basis_state(2, 0))),
                (-1.0, Projector.onto(StateVector.basis_state(2, 1))),
            ),
        )
        assert obs.event_labels == ("1", "-1")
        assert obs.label_index("-1") == 1
        with pytest.raises(KeyError):
            obs.label_index("nope")


class TestTraceProduct:
    def test_selection_weight_is_one_ninth(self, box3):
        d = Projector.onto(box3.pre)
        f = Projector.onto(box3.post)
        # oracle: dense matrix product and trace
        oracle = complex(np.trace(d.matrix() @ f.matrix()))
        assert oracle.real == pytest.approx(1.0 / 9.0, abs=1e-15)
        assert trace_product([d, f]) == pytest.approx(oracle, abs=1e-15)
        assert trace_product([d, f]).real == pytest.approx(1.0 / 9.0, abs=1e-12)

    def test_identity_trace_is_dimension(self):
        assert trace_product([Projector.identity(3)]) == pytest.approx(3.0, abs=0)

    def test_orthogonal_projectors_vanish(self):
        p_a = Projector.onto(StateVector.basis_state(3, 0))
        p_b = Projector.onto(StateVector.basis_state(3, 1))
        assert abs(trace_product([p_a, p_b])) == 0.0

    def test_cyclic_invariance(self, rng):
        for _ in range(25):
            dim = int(rng.integers(2, 7))
            ps = [random_projector(rng, dim, int(rng.integers(1, dim + 1))) for _ in range(3)]
            base = trace_product(ps)
            rotated = trace_product(ps[1:] + ps[:1])
            assert abs(base - rotated) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            trace_product([Projector.identity(2), Projector.identity(3)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            trace_product([])
