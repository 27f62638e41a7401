"""Built-in and user-defined measurement scenarios.

A scenario bundles everything one run of the thought experiment needs: the
preparation state, the post-selection state, and the named observables that
may be measured in between.  Two families ship built in:

* ``three-box``: one particle, three boxes.  Prepared in the equal
  superposition of the three box states and post-selected on the state whose
  third amplitude has flipped sign, opening box A (or box B) is certain to
  find the particle there, yet opening is a choice: only one box can actually
  be opened per run.
* ``n-box:<n>``: the same construction with n boxes that each give certainty
  plus one extra box carrying the compensating amplitude.  The post-selection
  state is fixed (up to phase) by requiring the "found in box i" outcome to
  be certain for every i <= n; for n = 2 it reproduces ``three-box``
  componentwise.

Scenario documents are JSON with explicit [re, im] amplitude pairs and no
implicit normalization beyond the constructor's snap rule, so a save/load
cycle reproduces every amplitude bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .abl import TwoStateVector
from .errors import (
    InvalidObservable,
    NormalizationError,
    ScenarioFormatError,
    UnknownObservable,
)
from .hilbert import (
    NORM_KEEP,
    Observable,
    Projector,
    StateVector,
    projector_from_basis,
    validate_observable,
)


@dataclass(frozen=True)
class Scenario:
    """Named system: basis labels, selection states, and intermediate observables."""

    name: str
    basis_labels: tuple[str, ...]
    pre: StateVector
    post: StateVector
    observables: tuple[Observable, ...]

    def __post_init__(self):
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))
        object.__setattr__(self, "observables", tuple(self.observables))
        dim = self.pre.dim
        if self.post.dim != dim:
            raise ScenarioFormatError(
                f"pre dim {dim} != post dim {self.post.dim}"
            )
        if len(self.basis_labels) != dim:
            raise ScenarioFormatError(
                f"{len(self.basis_labels)} basis labels for dimension {dim}"
            )
        names = [obs.name for obs in self.observables]
        if len(set(names)) != len(names):
            raise ScenarioFormatError(f"duplicate observable names in {names}")
        for obs in self.observables:
            if obs.dim != dim:
                raise ScenarioFormatError(
                    f"observable {obs.name!r} dim {obs.dim} != scenario dim {dim}"
                )
            obs.require_valid()

    @property
    def dim(self) -> int:
        return self.pre.dim

    @property
    def observable_names(self) -> tuple[str, ...]:
        return tuple(obs.name for obs in self.observables)

    def observable(self, name: str) -> Observable:
        for obs in self.observables:
            if obs.name == name:
                return obs
        raise UnknownObservable(
            f"scenario {self.name!r} has no observable {name!r}; "
            f"available: {', '.join(self.observable_names)}"
        )

    def two_state(self) -> TwoStateVector:
        return TwoStateVector(self.pre, self.post)


def three_box() -> Scenario:
    """One particle, three boxes, certainty for opening either A or B."""
    inv_sqrt3 = 1.0 / np.sqrt(3.0)
    pre = StateVector(np.array([inv_sqrt3, inv_sqrt3, inv_sqrt3]), label="pre")
    post = StateVector(np.array([inv_sqrt3, inv_sqrt3, -inv_sqrt3]), label="post")
    box_a, box_b, box_c = (StateVector.basis_state(3, k) for k in range(3))
    obs_a = Observable(
        name="A",
        events=((1.0, Projector.onto(box_a)), (0.0, Projector(3, (box_b, box_c)))),
        event_labels=("a", "a_prime"),
    )
    obs_b = Observable(
        name="B",
        events=((1.0, Projector.onto(box_b)), (0.0, Projector(3, (box_a, box_c)))),
        event_labels=("b", "b_prime"),
    )
    return Scenario(
        name="three-box",
        basis_labels=("a", "b", "c"),
        pre=pre,
        post=post,
        observables=(obs_a, obs_b),
    )


def n_plus_one_box(n: int) -> Scenario:
    """n boxes with certainty plus one compensating box (dimension n + 1).

    Preparation is the uniform superposition over all n + 1 boxes.  The
    post-selection amplitudes are 1 on boxes 1..n and -(n - 1) on box n + 1
    (normalized), the unique choice for which "found in box i" is certain for
    every one of the first n boxes: it makes the post state orthogonal to
    every projection of the preparation onto a "not in box i" subspace.
    Observables cover boxes 1..n only; the compensating box has no certainty
    to offer and gets no observable.
    """
    if n < 2:
        raise ValueError(f"n_plus_one_box needs n >= 2, got {n}")
    dim = n + 1
    pre = StateVector(np.full(dim, 1.0 / np.sqrt(float(dim))), label="pre")
    post_raw = np.ones(dim)
    post_raw[n] = -(n - 1.0)
    post = StateVector(post_raw / np.sqrt(float(n * n - n + 1)), label="post")
    observables = []
    for i in range(n):
        inside = Projector.onto(StateVector.basis_state(dim, i))
        outside = Projector(
            dim, tuple(StateVector.basis_state(dim, j) for j in range(dim) if j != i)
        )
        observables.append(
            Observable(
                name=f"Box{i + 1}",
                events=((1.0, inside), (0.0, outside)),
                event_labels=(f"in_{i + 1}", f"not_in_{i + 1}"),
            )
        )
    return Scenario(
        name=f"n-box:{n}",
        basis_labels=tuple(f"box{i + 1}" for i in range(dim)),
        pre=pre,
        post=post,
        observables=tuple(observables),
    )


def builtin_scenario(name: str) -> Scenario:
    """Resolve a built-in scenario name: ``three-box`` or ``n-box:<n>``."""
    if name == "three-box":
        return three_box()
    if name.startswith("n-box:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"malformed built-in scenario name {name!r}") from None
        return n_plus_one_box(n)
    raise ValueError(
        f"unknown built-in scenario {name!r}; expected 'three-box' or 'n-box:<n>'"
    )


# --- serialization ---------------------------------------------------------


def _amplitudes_to_pairs(vec: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vec]


def scenario_to_dict(s: Scenario) -> dict:
    """Plain-dict form of a scenario, matching the document schema."""
    return {
        "name": s.name,
        "dim": s.dim,
        "basis_labels": list(s.basis_labels),
        "pre": _amplitudes_to_pairs(s.pre.amplitudes),
        "post": _amplitudes_to_pairs(s.post.amplitudes),
        "observables": [
            {
                "name": obs.name,
                "events": [
                    {
                        "eigenvalue": float(ev),
                        "label": obs.event_labels[i],
                        "basis": [
                            _amplitudes_to_pairs(v.amplitudes) for v in proj.basis
                        ],
                    }
                    for i, (ev, proj) in enumerate(obs.events)
                ],
            }
            for obs in s.observables
        ],
    }


def save_scenario(s: Scenario, target) -> None:
    """Write a scenario document (JSON, UTF-8) to a path or text stream."""
    doc = scenario_to_dict(s)
    if hasattr(target, "write"):
        json.dump(doc, target, indent=2)
        target.write("\n")
    else:
        with open(Path(target), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def _fail(path: str, message: str) -> ScenarioFormatError:
    return ScenarioFormatError(f"{path}: {message}")


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise _fail(path, f"missing required field {key!r}")
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _fail(f"{path}.{key}", f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _fail(f"{path}.{key}", f"expected an integer, got {type(value).__name__}")
        return value
    if not isinstance(value, kind):
        raise _fail(f"{path}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _pairs_to_amplitudes(pairs, dim: int | None, path: str) -> np.ndarray:
    if not isinstance(pairs, list) or not pairs:
        raise _fail(path, "expected a non-empty list of [re, im] pairs")
    if dim is not None and len(pairs) != dim:
        raise _fail(path, f"expected {dim} amplitudes, got {len(pairs)}")
    out = np.empty(len(pairs), dtype=np.complex128)
    for i, pair in enumerate(pairs):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pair)
        ):
            raise _fail(f"{path}[{i}]", "expected an [re, im] pair of numbers")
        out[i] = complex(pair[0], pair[1])
    return out


def _state_from_doc(pairs, dim: int, path: str, label: str) -> StateVector:
    amps = _pairs_to_amplitudes(pairs, dim, path)
    try:
        return StateVector(amps, label=label)
    except (NormalizationError, ValueError) as exc:
        raise _fail(path, str(exc)) from exc


def _projector_from_doc(basis_doc, dim: int, path: str) -> Projector:
    if not isinstance(basis_doc, list) or not basis_doc:
        raise _fail(path, "expected a non-empty list of basis vectors")
    vectors = [
        _pairs_to_amplitudes(pairs, dim, f"{path}[{i}]")
        for i, pairs in enumerate(basis_doc)
    ]
    # Keep already-orthonormal bases bit-exact; orthonormalize anything else.
    gram_ok = all(
        abs(np.vdot(u, v) - (1.0 if i == j else 0.0)) <= NORM_KEEP
        for i, u in enumerate(vectors)
        for j, v in enumerate(vectors)
    )
    try:
        if gram_ok:
            return Projector(dim, tuple(StateVector(v) for v in vectors))
        return projector_from_basis(vectors)
    except (NormalizationError, ValueError) as exc:
        raise _fail(path, str(exc)) from exc


def scenario_from_dict(doc, path: str = "scenario") -> Scenario:
    """Build and validate a Scenario from a plain dict; diagnostics carry field paths."""
    if not isinstance(doc, dict):
        raise _fail(path, f"expected a JSON object, got {type(doc).__name__}")
    name = _require(doc, "name", str, path)
    dim = _require(doc, "dim", int, path)
    if dim < 1:
        raise _fail(f"{path}.dim", f"dimension must be >= 1, got {dim}")
    labels = _require(doc, "basis_labels", list, path)
    if len(labels) != dim or any(not isinstance(x, str) for x in labels):
        raise _fail(f"{path}.basis_labels", f"expected {dim} strings")
    pre = _state_from_doc(doc.get("pre"), dim, f"{path}.pre", "pre")
    post = _state_from_doc(doc.get("post"), dim, f"{path}.post", "post")
    obs_docs = _require(doc, "observables", list, path)

    observables = []
    for i, obs_doc in enumerate(obs_docs):
        obs_path = f"{path}.observables[{i}]"
        if not isinstance(obs_doc, dict):
            raise _fail(obs_path, "expected a JSON object")
        obs_name = _require(obs_doc, "name", str, obs_path)
        event_docs = _require(obs_doc, "events", list, obs_path)
        if not event_docs:
            raise _fail(f"{obs_path}.events", "observable needs at least one event")
        events = []
        event_labels: list[str] | None = []
        for j, ev_doc in enumerate(event_docs):
            ev_path = f"{obs_path}.events[{j}]"
            if not isinstance(ev_doc, dict):
                raise _fail(ev_path, "expected a JSON object")
            eigenvalue = _require(ev_doc, "eigenvalue", float, ev_path)
            projector = _projector_from_doc(ev_doc.get("basis"), dim, f"{ev_path}.basis")
            events.append((eigenvalue, projector))
            if "label" in ev_doc:
                label = ev_doc["label"]
                if not isinstance(label, str):
                    raise _fail(f"{ev_path}.label", "expected a string")
                if event_labels is not None:
                    event_labels.append(label)
            else:
                event_labels = None  # any missing label: fall back to defaults
        try:
            obs = Observable(
                name=obs_name,
                events=tuple(events),
                event_labels=tuple(event_labels) if event_labels else (),
            )
        except ValueError as exc:
            raise _fail(obs_path, str(exc)) from exc
        report = validate_observable(obs)
        if not report.passed:
            raise _fail(obs_path, report.summary())
        observables.append(obs)

    try:
        return Scenario(
            name=name,
            basis_labels=tuple(labels),
            pre=pre,
            post=post,
            observables=tuple(observables),
        )
    except (ScenarioFormatError, InvalidObservable) as exc:
        raise _fail(path, str(exc)) from exc


def load_scenario(source) -> Scenario:
    """Read a scenario document from a path or text stream.

    Malformed documents raise ScenarioFormatError; JSON syntax errors keep
    the decoder's line/column, structural errors name the offending field,
    and invariant violations quote the failing quantity.
    """
    if hasattr(source, "read"):
        text = source.read()
        origin = getattr(source, "name", "<stream>")
    else:
        origin = str(source)
        with open(Path(source), "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"{origin}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(doc, path=origin)
