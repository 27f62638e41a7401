"""Exception hierarchy shared by all prepost modules.

Every domain error carries a stable machine-readable ``code`` so the CLI
can emit it in error documents without string-matching messages.
"""

from __future__ import annotations


class PrePostError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"


class DimensionMismatch(PrePostError):
    """Operands live in Hilbert spaces of different dimension."""

    code = "dimension_mismatch"


class NormalizationError(PrePostError):
    """State amplitudes are too far from unit norm to be trusted."""

    code = "normalization_error"


class ZeroSpanError(PrePostError):
    """A projector was requested for a span containing only the zero vector."""

    code = "zero_span"


class InvalidObservable(PrePostError):
    """Observable fails orthogonality, completeness, or distinctness checks."""

    code = "invalid_observable"


class PostSelectionImpossible(PrePostError):
    """No outcome of the measured observable permits the post-selection."""

    code = "post_selection_impossible"


class CounterfactualInvalid(PrePostError):
    """Counterfactual query rejected: the merged history family is inconsistent.

    The probability requested by the caller does not exist.  Diagnostic
    attributes are attached so callers can inspect *why*:

    ``explanation``
        stable short code, currently always ``"merged_family_inconsistent"``.
    ``max_violation``
        largest interference term between branches of the merged family.
    ``diagnostic_conditional``
        the raw chain-conditional value one would be forced to use instead
        of the ABL value; reported for study only, never as a probability.
    ``consistency``
        the full ConsistencyReport of the merged family.
    """

    code = "counterfactual_invalid"

    def __init__(self, message, *, explanation, max_violation,
                 diagnostic_conditional, consistency):
        super().__init__(message)
        self.explanation = explanation
        self.max_violation = max_violation
        self.diagnostic_conditional = diagnostic_conditional
        self.consistency = consistency


class InconsistentFamily(PrePostError):
    """History-probability requested for a family that fails the consistency test."""

    code = "inconsistent_family"


class ConditioningOnNull(PrePostError):
    """Conditional probability requested but the conditioning weight vanishes."""

    code = "conditioning_on_null"


class ScenarioFormatError(PrePostError):
    """Scenario document is malformed; message names the offending field."""

    code = "scenario_format_error"


class UnknownObservable(PrePostError):
    """Named observable does not exist in the scenario."""

    code = "unknown_observable"
