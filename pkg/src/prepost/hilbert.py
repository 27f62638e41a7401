"""Exact small-dimension complex linear algebra: states, projectors, observables.

Everything in this module is immutable after construction and all operations
are pure, so objects can be shared freely across threads.  Projectors are
stored as orthonormal basis lists; the dense matrix is materialized on demand,
which keeps rank exact and idempotence checks cheap at the dimensions this
package targets (a few to a few dozen; anything up to ~64 is comfortable).

Tolerances:

* ``EPS_NORM`` (1e-9) governs every structural validation: orthonormality of
  projector bases, idempotence/hermiticity of materialized matrices,
  orthogonality and completeness of observables.
* State amplitudes whose norm is within 1e-6 of 1 are renormalized exactly;
  anything further off is rejected rather than silently fixed, so typos in
  scenario files surface instead of being masked.
* Gram-Schmidt drops directions whose residual norm falls below 1e-9 when
  deciding the rank of a span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidObservable,
    NormalizationError,
    ZeroSpanError,
)

EPS_NORM = 1e-9
NORM_SNAP = 1e-6
NORM_KEEP = 1e-12
GS_DROP_TOL = 1e-9


def _as_complex_vector(amplitudes) -> np.ndarray:
    vec = np.array(amplitudes, dtype=np.complex128)  # always copy; result is owned
    if vec.ndim != 1 or vec.size < 1:
        raise ValueError(f"amplitudes must be a non-empty 1-D sequence, got shape {vec.shape}")
    if not (np.all(np.isfinite(vec.real)) and np.all(np.isfinite(vec.imag))):
        raise ValueError("amplitudes must be finite (no NaN or Inf components)")
    return vec


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over a fixed orthonormal basis.

    The constructor accepts amplitudes whose Euclidean norm is within 1e-6
    of 1 and rescales them to unit norm; amplitudes further from unit norm
    raise NormalizationError.  Amplitudes already normalized to within 1e-12
    are kept bit-exact (no rescaling), which makes construction idempotent:
    feeding a state's own amplitudes back in reproduces it exactly.  Use
    :meth:`normalized` to build a state from an arbitrary nonzero vector.
    """

    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        vec = _as_complex_vector(self.amplitudes)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_SNAP:
            raise NormalizationError(
                f"state norm is {norm!r}, more than {NORM_SNAP} away from 1; "
                "use StateVector.normalized to rescale intentionally"
            )
        if abs(norm - 1.0) > NORM_KEEP:
            vec = vec / norm
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @classmethod
    def normalized(cls, amplitudes, label: str | None = None) -> "StateVector":
        """Build a state from any nonzero amplitude vector, rescaling to unit norm."""
        vec = _as_complex_vector(amplitudes)
        norm = float(np.linalg.norm(vec))
        if norm < GS_DROP_TOL:
            raise NormalizationError("cannot normalize a (near-)zero vector")
        return cls(vec / norm, label=label)

    @classmethod
    def basis_state(cls, dim: int, index: int, label: str | None = None) -> "StateVector":
        """Computational basis state |index> in the given dimension."""
        vec = np.zeros(dim, dtype=np.complex128)
        vec[index] = 1.0
        return cls(vec, label=label)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash((self.dim, self.amplitudes.tobytes()))


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector stored as an orthonormal basis of its range.

    ``basis`` may be empty (the zero projector).  The dense matrix
    P = sum_k |v_k><v_k| is materialized by :meth:`matrix`; by construction
    it satisfies P^2 = P and P = P^dagger to within EPS_NORM.
    """

    dim: int
    basis: tuple[StateVector, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("projector dimension must be >= 1")
        basis = tuple(self.basis)
        for v in basis:
            if v.dim != self.dim:
                raise DimensionMismatch(
                    f"basis vector of dim {v.dim} in projector of dim {self.dim}"
                )
        if len(basis) > self.dim:
            raise ValueError("projector rank cannot exceed its dimension")
        for i, u in enumerate(basis):
            for j, v in enumerate(basis):
                g = np.vdot(u.amplitudes, v.amplitudes)
                expect = 1.0 if i == j else 0.0
                if abs(g - expect) > EPS_NORM:
                    raise ValueError(
                        "projector basis is not orthonormal: "
                        f"<{i}|{j}> = {g:.3e}, expected {expect}"
                    )
        object.__setattr__(self, "basis", basis)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(dim, tuple(StateVector.basis_state(dim, k) for k in range(dim)))

    @classmethod
    def onto(cls, state: StateVector) -> "Projector":
        """Rank-1 projector |state><state|."""
        return cls(state.dim, (state,))

    def matrix(self) -> np.ndarray:
        """Dense matrix representation, built fresh on each call."""
        mat = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for v in self.basis:
            mat += np.outer(v.amplitudes, v.amplitudes.conj())
        return mat

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Project a raw amplitude vector onto the range, without renormalizing."""
        out = np.zeros(self.dim, dtype=np.complex128)
        for v in self.basis:
            out += np.vdot(v.amplitudes, vector) * v.amplitudes
        return out

    def matches(self, other: "Projector", tol: float = EPS_NORM) -> bool:
        """True when both projectors represent the same subspace within tol."""
        if self.dim != other.dim or self.rank != other.rank:
            return False
        return bool(np.max(np.abs(self.matrix() - other.matrix()), initial=0.0) <= tol)


@dataclass(frozen=True)
class Observable:
    """Named observable as a list of (eigenvalue, eigenspace projector) events.

    A valid observable's projectors are pairwise orthogonal and resolve the
    identity; use :func:`validate_observable` for a report, or
    :meth:`require_valid` to raise on failure.  ``event_labels`` give each
    outcome a stable name for reports and simulation records; they default to
    the eigenvalues rendered as text.
    """

    name: str
    events: tuple[tuple[float, Projector], ...]
    event_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        events = tuple((float(ev), proj) for ev, proj in self.events)
        if not events:
            raise ValueError("observable needs at least one event")
        dim = events[0][1].dim
        for _, proj in events:
            if proj.dim != dim:
                raise DimensionMismatch("all event projectors must share one dimension")
        labels = tuple(self.event_labels)
        if not labels:
            labels = _default_labels([ev for ev, _ in events])
        if len(labels) != len(events):
            raise ValueError("event_labels length must match number of events")
        if len(set(labels)) != len(labels):
            raise ValueError("event labels must be unique")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "event_labels", labels)

    @property
    def dim(self) -> int:
        return self.events[0][1].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.events)

    def eigenvalue(self, index: int) -> float:
        return self.events[index][0]

    def projector(self, index: int) -> Projector:
        return self.events[index][1]

    def label_index(self, label: str) -> int:
        try:
            return self.event_labels.index(label)
        except ValueError:
            raise KeyError(f"observable {self.name!r} has no outcome labeled {label!r}") from None

    def require_valid(self, tol: float = EPS_NORM) -> None:
        report = validate_observable(self, tol=tol)
        if not report.passed:
            raise InvalidObservable(
                f"observable {self.name!r} failed validation: {report.summary()}"
            )


def _default_labels(eigenvalues: list[float]) -> tuple[str, ...]:
    labels = [f"{ev:g}" for ev in eigenvalues]
    if len(set(labels)) != len(labels):
        labels = [repr(ev) for ev in eigenvalues]
    return tuple(labels)


@dataclass(frozen=True)
class ObservableValidation:
    """Report produced by validate_observable; never raises."""

    orthogonal: bool
    complete: bool
    eigenvalues_distinct: bool
    max_orthogonality_violation: float
    max_completeness_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.orthogonal and self.complete and self.eigenvalues_distinct

    def summary(self) -> str:
        parts = []
        if not self.eigenvalues_distinct:
            parts.append("eigenvalues not pairwise distinct")
        if not self.orthogonal:
            parts.append(
                f"projectors not pairwise orthogonal (max violation "
                f"{self.max_orthogonality_violation:.3e})"
            )
        if not self.complete:
            parts.append(
                f"projectors do not resolve the identity (max violation "
                f"{self.max_completeness_violation:.3e})"
            )
        return "; ".join(parts) if parts else "ok"


def inner_product(u: StateVector, v: StateVector) -> complex:
    """Hermitian inner product <u|v>, conjugating the first argument."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"inner product of dims {u.dim} and {v.dim}")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def apply_projector(p: Projector, v: StateVector) -> tuple[np.ndarray, float]:
    """Apply p to v; returns the unnormalized projected vector and its squared norm."""
    if p.dim != v.dim:
        raise DimensionMismatch(f"projector dim {p.dim} applied to state dim {v.dim}")
    projected = p.apply(v.amplitudes)
    norm_sq = float(np.vdot(projected, projected).real)
    return projected, norm_sq


def projector_from_basis(vectors) -> Projector:
    """Orthogonal projector onto the span of the given vectors.

    Accepts StateVector instances or raw amplitude sequences.  The span is
    orthonormalized with modified Gram-Schmidt using column pivoting; residual
    directions below the drop tolerance do not contribute to the rank, so
    duplicated or linearly dependent inputs are handled exactly.
    """
    rows = []
    for v in vectors:
        if isinstance(v, StateVector):
            rows.append(np.array(v.amplitudes, dtype=np.complex128))
        else:
            rows.append(_as_complex_vector(v))
    if not rows:
        raise ValueError("projector_from_basis needs at least one vector")
    dim = rows[0].shape[0]
    for r in rows:
        if r.shape[0] != dim:
            raise DimensionMismatch("span vectors must share one dimension")

    remaining = [r.copy() for r in rows]
    ortho: list[np.ndarray] = []
    while remaining:
        norms = [float(np.linalg.norm(r)) for r in remaining]
        pivot = int(np.argmax(norms))
        if norms[pivot] < GS_DROP_TOL:
            break
        q = remaining.pop(pivot) / norms[pivot]
        # re-orthogonalize survivors against the new direction
        remaining = [r - np.vdot(q, r) * q for r in remaining]
        ortho.append(q)
    if not ortho:
        raise ZeroSpanError("input vectors span only the zero vector")
    basis = tuple(StateVector(q) for q in ortho)
    return Projector(dim, basis)


def validate_observable(obs: Observable, tol: float = EPS_NORM) -> ObservableValidation:
    """Check pairwise orthogonality of event projectors and completeness.

    Report-style: always returns, never raises.  Violation magnitudes are the
    largest matrix entries of E_a E_b (a != b) and of sum_a E_a - 1.
    """
    mats = [proj.matrix() for _, proj in obs.events]
    max_orth = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            max_orth = max(max_orth, float(np.max(np.abs(mats[i] @ mats[j]))))
    total = sum(mats)
    max_comp = float(np.max(np.abs(total - np.eye(obs.dim))))
    eigenvalues = [ev for ev, _ in obs.events]
    distinct = len(set(eigenvalues)) == len(eigenvalues)
    return ObservableValidation(
        orthogonal=max_orth <= tol,
        complete=max_comp <= tol,
        eigenvalues_distinct=distinct,
        max_orthogonality_violation=max_orth,
        max_completeness_violation=max_comp,
        tolerance=tol,
    )


def trace_product(projectors) -> complex:
    """Trace of the ordered product of the given projectors.

    Invariant under cyclic rotation of the argument list.  A single argument
    returns its trace (the rank).
    """
    ps = list(projectors)
    if not ps:
        raise ValueError("trace_product needs at least one projector")
    dim = ps[0].dim
    for p in ps:
        if p.dim != dim:
            raise DimensionMismatch("trace_product requires equal dimensions")
    prod = ps[0].matrix()
    for p in ps[1:]:
        prod = prod @ p.matrix()
    return complex(np.trace(prod))
