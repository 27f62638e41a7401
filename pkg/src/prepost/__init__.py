"""Measurement statistics of pre- and post-selected quantum systems.

The package answers three kinds of question about a system prepared in one
state and post-selected on another:

* what is the probability of each outcome of the observable that was
  actually measured in between (:mod:`prepost.abl`);
* when is it legitimate to reason about an observable that was *not*
  measured, via the consistency calculus over history families
  (:mod:`prepost.histories`);
* what does a finite seeded ensemble of simulated runs actually show
  (:mod:`prepost.ensemble`).

Built-in scenarios live in :mod:`prepost.scenarios`; ``prepost reproduce``
on the command line replays every headline number.
"""

from .abl import (
    AblResult,
    TwoStateVector,
    Usage,
    abl_distribution,
    abl_probability,
    contextual_abl,
)
from .ensemble import (
    AuditReport,
    EnsembleStats,
    RunRecord,
    SimSeed,
    mutual_exclusivity_audit,
    simulate_ensemble,
    simulate_records,
    simulate_run,
)
from .errors import (
    ConditioningOnNull,
    CounterfactualInvalid,
    DimensionMismatch,
    InconsistentFamily,
    InvalidObservable,
    NormalizationError,
    PostSelectionImpossible,
    PrePostError,
    ScenarioFormatError,
    UnknownObservable,
    ZeroSpanError,
)
from .hilbert import (
    Observable,
    ObservableValidation,
    Projector,
    StateVector,
    apply_projector,
    inner_product,
    projector_from_basis,
    trace_product,
    validate_observable,
)
from .histories import (
    ConsistencyReport,
    EquivalenceReport,
    History,
    HistoryFamily,
    abl_ch_equivalence,
    ch_conditional_general,
    conditional_probability,
    consistency_check,
    family_from_two_state,
    history_probability,
    merge_families,
)
from .scenarios import (
    Scenario,
    builtin_scenario,
    load_scenario,
    n_plus_one_box,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    three_box,
)

__version__ = "0.1.0"

__all__ = [
    "AblResult",
    "AuditReport",
    "ConditioningOnNull",
    "ConsistencyReport",
    "CounterfactualInvalid",
    "DimensionMismatch",
    "EnsembleStats",
    "EquivalenceReport",
    "History",
    "HistoryFamily",
    "InconsistentFamily",
    "InvalidObservable",
    "NormalizationError",
    "Observable",
    "ObservableValidation",
    "PostSelectionImpossible",
    "PrePostError",
    "Projector",
    "RunRecord",
    "Scenario",
    "ScenarioFormatError",
    "SimSeed",
    "StateVector",
    "TwoStateVector",
    "UnknownObservable",
    "Usage",
    "ZeroSpanError",
    "abl_ch_equivalence",
    "abl_distribution",
    "abl_probability",
    "apply_projector",
    "builtin_scenario",
    "ch_conditional_general",
    "conditional_probability",
    "consistency_check",
    "contextual_abl",
    "family_from_two_state",
    "history_probability",
    "inner_product",
    "load_scenario",
    "merge_families",
    "mutual_exclusivity_audit",
    "n_plus_one_box",
    "projector_from_basis",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "simulate_ensemble",
    "simulate_records",
    "simulate_run",
    "three_box",
    "trace_product",
    "validate_observable",
]
