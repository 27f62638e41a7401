"""Tests for the built-in scenarios and document round-trips."""

import io
import json

import numpy as np
import pytest

from prepost.abl import abl_probability
from prepost.errors import ScenarioFormatError, UnknownObservable
from prepost.hilbert import Observable, Projector, StateVector, apply_projector, inner_product
from prepost.scenarios import (
    Scenario,
    builtin_scenario,
    load_scenario,
    n_plus_one_box,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    three_box,
)

INV_SQRT3 = 1.0 / np.sqrt(3.0)


class TestThreeBox:
    def test_preparation_amplitudes(self, box3):
        assert np.allclose(
            box3.pre.amplitudes, [INV_SQRT3, INV_SQRT3, INV_SQRT3], atol=0
        )

    def test_post_selection_amplitudes(self, box3):
        assert np.allclose(
            box3.post.amplitudes, [INV_SQRT3, INV_SQRT3, -INV_SQRT3], atol=0
        )

    def test_not_found_eigenspace_is_the_bc_plane(self, box3):
        plane = box3.observable("A").projector(1)
        assert plane.rank == 2
        assert np.allclose(plane.matrix(), np.diag([0.0, 1.0, 1.0]), atol=1e-15)

    def test_all_invariants_hold(self, box3):
        for obs in box3.observables:
            obs.require_valid()
        assert abs(np.linalg.norm(box3.pre.amplitudes) - 1.0) < 1e-12
        assert abs(np.linalg.norm(box3.post.amplitudes) - 1.0) < 1e-12

    def test_unknown_observable(self, box3):
        with pytest.raises(UnknownObservable):
            box3.observable("Z")


class TestNPlusOneBox:
    def test_two_boxes_reproduce_three_box_componentwise(self, box3):
        s2 = n_plus_one_box(2)
        assert np.max(np.abs(s2.pre.amplitudes - box3.pre.amplitudes)) < 1e-12
        assert np.max(np.abs(s2.post.amplitudes - box3.post.amplitudes)) < 1e-12

    def test_certainty_for_every_box(self):
        s = n_plus_one_box(5)
        tsv = s.two_state()
        for i in range(5):
            result = abl_probability(tsv, s.observable(f"Box{i + 1}"), 0)
            assert result.probability == pytest.approx(1.0, abs=1e-12)

    def test_two_box_selection_weight(self):
        s = n_plus_one_box(2)
        assert abs(inner_product(s.post, s.pre)) ** 2 == pytest.approx(
            1.0 / 9.0, abs=1e-12
        )

    @pytest.mark.parametrize("n", [2, 3, 5, 10])
    def test_post_orthogonal_to_not_found_projections(self, n):
        s = n_plus_one_box(n)
        for i in range(n):
            outside = s.observable(f"Box{i + 1}").projector(1)
            projected, _ = apply_projector(outside, s.pre)
            overlap = np.vdot(s.post.amplitudes, projected)
            assert abs(overlap) < 1e-12

    def test_needs_at_least_two_boxes(self):
        with pytest.raises(ValueError):
            n_plus_one_box(1)

    def test_observable_count_excludes_compensating_box(self):
        s = n_plus_one_box(4)
        assert s.dim == 5
        assert s.observable_names == ("Box1", "Box2", "Box3", "Box4")


class TestBuiltinResolution:
    def test_names(self):
        assert builtin_scenario("three-box").name == "three-box"
        assert builtin_scenario("n-box:4").dim == 5

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin_scenario("five-box")
        with pytest.raises(ValueError):
            builtin_scenario("n-box:many")


def scenario_with_rotated_projector():
    """Dim-2 scenario whose observable eigenbasis has complex amplitudes."""
    plus = StateVector.normalized([1.0, 1.0j])
    minus = StateVector.normalized([1.0, -1.0j])
    obs = Observable(
        name="Y",
        events=((1.0, Projector.onto(plus)), (-1.0, Projector.onto(minus))),
        event_labels=("up", "down"),
    )
    return Scenario(
        name="rotated",
        basis_labels=("0", "1"),
        pre=StateVector.normalized([0.8, 0.6j]),
        post=StateVector.normalized([1.0, 0.3 - 0.2j]),
        observables=(obs,),
    )


class TestRoundTrip:
    @pytest.mark.parametrize("make", [three_box, lambda: n_plus_one_box(3),
                                      scenario_with_rotated_projector])
    def test_save_load_is_identity(self, make, tmp_path):
        original = make()
        path = tmp_path / "scenario.json"
        save_scenario(original, path)
        loaded = load_scenario(path)
        assert loaded == original  # bit-exact on every amplitude
        assert np.array_equal(loaded.pre.amplitudes, original.pre.amplitudes)
        assert np.array_equal(loaded.post.amplitudes, original.post.amplitudes)
        for got, want in zip(loaded.observables, original.observables):
            assert got.event_labels == want.event_labels
            for (ev_g, proj_g), (ev_w, proj_w) in zip(got.events, want.events):
                assert ev_g == ev_w
                for bg, bw in zip(proj_g.basis, proj_w.basis):
                    assert np.array_equal(bg.amplitudes, bw.amplitudes)

    def test_stream_round_trip(self, box3):
        buffer = io.StringIO()
        save_scenario(box3, buffer)
        buffer.seek(0)
        assert load_scenario(buffer) == box3

    def test_double_round_trip_stable(self, tmp_path):
        path1, path2 = tmp_path / "a.json", tmp_path / "b.json"
        save_scenario(three_box(), path1)
        save_scenario(load_scenario(path1), path2)
        assert path1.read_text() == path2.read_text()


class TestDocumentValidation:
    def test_non_normalized_pre_rejected_with_norm(self, box3):
        doc = scenario_to_dict(box3)
        doc["pre"] = [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0]]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "pre" in str(exc.value)
        assert "0.5" in str(exc.value)

    def test_incomplete_observable_rejected_citing_identity_check(self, box3):
        doc = scenario_to_dict(box3)
        del doc["observables"][0]["events"][1]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "identity" in str(exc.value)

    def test_overlapping_observable_rejected(self, box3):
        doc = scenario_to_dict(box3)
        doc["observables"][0]["events"][1]["basis"] = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                                                       [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "orthogonal" in str(exc.value)

    def test_json_syntax_error_has_line_info(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"name": "x",\n  "dim": }')
        with pytest.raises(ScenarioFormatError) as exc:
            load_scenario(path)
        assert "line 2" in str(exc.value)

    def test_missing_field_names_the_field(self, box3):
        doc = scenario_to_dict(box3)
        del doc["post"]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "post" in str(exc.value)

    def test_bad_amplitude_pair_names_the_index(self, box3):
        doc = scenario_to_dict(box3)
        doc["pre"][1] = [0.5, "x"]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "pre[1]" in str(exc.value)

    def test_wrong_amplitude_count(self, box3):
        doc = scenario_to_dict(box3)
        doc["pre"] = doc["pre"][:2]
        with pytest.raises(ScenarioFormatError) as exc:
            scenario_from_dict(doc)
        assert "expected 3 amplitudes" in str(exc.value)

    def test_non_orthonormal_event_basis_is_orthonormalized(self, box3):
        doc = scenario_to_dict(box3)
        # user typed a redundant, unnormalized spanning set for the bc plane
        doc["observables"][0]["events"][1]["basis"] = [
            [[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [2.0, 0.0], [2.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [-3.0, 0.0]],
        ]
        loaded = scenario_from_dict(doc)
        got = loaded.observable("A").projector(1)
        assert got.rank == 2
        assert np.allclose(got.matrix(), np.diag([0.0, 1.0, 1.0]), atol=1e-12)

    def test_labels_survive_or_default(self, box3):
        doc = scenario_to_dict(box3)
        assert doc["observables"][0]["events"][0]["label"] == "a"
        for event in doc["observables"][0]["events"]:
            del event["label"]
        loaded = scenario_from_dict(doc)
        assert loaded.observable("A").event_labels == ("1", "0")

    def test_duplicate_observable_names_rejected(self, box3):
        doc = scenario_to_dict(box3)
        doc["observables"][1]["name"] = "A"
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_dim_mismatch_between_states(self, box3):
        doc = scenario_to_dict(box3)
        doc["dim"] = 4
        with pytest.raises(ScenarioFormatError):
            scenario_from_dict(doc)

    def test_document_is_utf8_json(self, box3, tmp_path):
        path = tmp_path / "doc.json"
        save_scenario(box3, path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        assert doc["name"] == "three-box"
        assert doc["dim"] == 3
        assert doc["basis_labels"] == ["a", "b", "c"]
        assert doc["pre"][0] == [INV_SQRT3, 0.0]
