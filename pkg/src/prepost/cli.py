"""Command-line interface.

Subcommands:

* ``abl``          outcome probabilities of a measured observable
* ``contextual``   probability of a queried outcome given what was measured
* ``consistency``  consistency report for one observable or a merged set
* ``ch``           chain conditionals and their comparison against the ABL values
* ``simulate``     seeded ensemble simulation (json/table stats or csv records)
* ``scenario``     validate, display, or write a scenario document
* ``reproduce``    run the built-in battery of headline checks

Exit codes: 0 success, 2 usage or input-document errors, 3 domain errors
(impossible post-selection, invalid counterfactual query, inconsistent
family).  Domain errors still emit a machine-readable JSON document with a
stable ``error`` code on stdout.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

from .abl import abl_distribution, abl_probability, contextual_abl
from .ensemble import records_to_csv, simulate_ensemble, simulate_records
from .errors import (
    CounterfactualInvalid,
    PrePostError,
    ScenarioFormatError,
    UnknownObservable,
)
from .histories import (
    ch_conditional_general,
    consistency_check,
    family_from_two_state,
    merge_families,
)
from .reproduce import run_all
from .scenarios import (
    Scenario,
    builtin_scenario,
    load_scenario,
    scenario_to_dict,
)

USAGE_EXIT = 2
DOMAIN_EXIT = 3


class _CliUsageError(Exception):
    pass


def _float_repr(value) -> str:
    return repr(float(value))


def _key_value_table(pairs) -> str:
    rows = [(str(k), _float_repr(v) if isinstance(v, float) else str(v)) for k, v in pairs]
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _resolve_scenario(args) -> Scenario:
    if getattr(args, "scenario", None) and getattr(args, "scenario_file", None):
        raise _CliUsageError("pass exactly one of --scenario and --scenario-file")
    if getattr(args, "scenario_file", None):
        return load_scenario(args.scenario_file)
    if getattr(args, "scenario", None):
        try:
            return builtin_scenario(args.scenario)
        except ValueError as exc:
            raise _CliUsageError(str(exc)) from exc
    raise _CliUsageError("a scenario is required: --scenario NAME or --scenario-file PATH")


def _resolve_outcome(obs, outcome: str) -> int:
    """Outcome given as a label, or as an integer index as a fallback."""
    try:
        return obs.label_index(outcome)
    except KeyError:
        pass
    try:
        index = int(outcome)
    except ValueError:
        raise _CliUsageError(
            f"unknown outcome {outcome!r} for observable {obs.name!r}; "
            f"labels: {', '.join(obs.event_labels)}"
        ) from None
    if not 0 <= index < obs.n_outcomes:
        raise _CliUsageError(
            f"outcome index {index} out of range for observable {obs.name!r}"
        )
    return index


def _abl_result_doc(result, extra: dict | None = None) -> dict:
    doc = dict(extra or {})
    doc.update({
        "probability": result.probability,
        "usage": result.usage.value,
        "consistency_certified": result.consistency_certified,
        "numerator": result.numerator,
        "denominator": result.denominator,
    })
    return doc


def _cmd_abl(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    obs = scenario.observable(args.observable)
    tsv = scenario.two_state()
    if args.outcome is not None:
        index = _resolve_outcome(obs, args.outcome)
        result = abl_probability(tsv, obs, index)
        doc = _abl_result_doc(result, {"observable": obs.name,
                                       "outcome": obs.event_labels[index]})
        return doc, _key_value_table(doc.items())
    probabilities = abl_distribution(tsv, obs)
    doc = {label: probabilities[i] for i, label in enumerate(obs.event_labels)}
    return doc, _key_value_table(doc.items())


def _cmd_contextual(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    measured = scenario.observable(args.measured)
    queried = scenario.observable(args.queried)
    index = _resolve_outcome(queried, args.outcome)
    result = contextual_abl(scenario.two_state(), measured, queried, index)
    doc = _abl_result_doc(result, {
        "measured": measured.name,
        "queried": queried.name,
        "outcome": queried.event_labels[index],
    })
    return doc, _key_value_table(doc.items())


def _family_for(scenario: Scenario, names: list[str]):
    tsv = scenario.two_state()
    families = [family_from_two_state(tsv, scenario.observable(n)) for n in names]
    if len(families) == 1:
        return families[0], list(scenario.observable(names[0]).event_labels)
    merged = merge_families(families)
    labels = [
        f"{name}:{label}"
        for name in names
        for label in scenario.observable(name).event_labels
    ]
    return merged, labels


def _cmd_consistency(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    if args.merge:
        names = list(args.merge)
    elif args.observable:
        names = [args.observable]
    else:
        raise _CliUsageError("pass --observable NAME or --merge NAME [NAME ...]")
    family, labels = _family_for(scenario, names)
    report = consistency_check(family)
    doc = {
        "consistent": report.consistent,
        "max_violation": report.max_violation,
        "max_imag_violation": report.max_imag_violation,
        "tolerance": report.tolerance,
        "events": labels,
        "violations": [[float(x) for x in row] for row in report.violations],
    }
    pairs = [
        ("consistent", report.consistent),
        ("max_violation", report.max_violation),
        ("max_imag_violation", report.max_imag_violation),
        ("tolerance", report.tolerance),
    ]
    pairs += [
        (f"Re<{labels[a]}|{labels[b]}>", float(report.violations[a][b]))
        for a in range(len(labels))
        for b in range(a + 1, len(labels))
    ]
    return doc, _key_value_table(pairs)


def _cmd_ch(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    obs = scenario.observable(args.observable)
    tsv = scenario.two_state()
    report = consistency_check(family_from_two_state(tsv, obs))
    if args.outcome is not None:
        indices = [_resolve_outcome(obs, args.outcome)]
    else:
        indices = list(range(obs.n_outcomes))
    conditionals = {
        obs.event_labels[k]: ch_conditional_general(tsv, obs, k) for k in indices
    }
    doc = {
        "observable": obs.name,
        "conditionals": conditionals,
        "consistent": report.consistent,
        "max_violation": report.max_violation,
    }
    pairs = list(conditionals.items())
    if report.consistent:
        abl_values = abl_distribution(tsv, obs)
        deltas = {
            obs.event_labels[k]: abs(conditionals[obs.event_labels[k]] - abl_values[k])
            for k in indices
        }
        doc["abl_max_delta"] = max(deltas.values())
        pairs.append(("abl_max_delta", doc["abl_max_delta"]))
    else:
        doc["note"] = (
            "family is inconsistent: these conditionals are diagnostics, "
            "not probabilities, and need not match the ABL values"
        )
    pairs += [("consistent", report.consistent), ("max_violation", report.max_violation)]
    return doc, _key_value_table(pairs)


def _cmd_simulate(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    if args.runs < 1:
        raise _CliUsageError(f"--runs must be >= 1, got {args.runs}")
    if args.format == "csv":
        records = simulate_records(scenario, args.open, args.runs, args.seed)
        buffer = io.StringIO()
        records_to_csv(records, buffer)
        return {"__raw__": buffer.getvalue()}, buffer.getvalue()
    stats = simulate_ensemble(scenario, args.open, args.runs, args.seed)
    return stats.to_json_dict(), stats.to_table()


def _cmd_scenario(args) -> tuple[dict, str]:
    scenario = _resolve_scenario(args)
    doc = scenario_to_dict(scenario)
    lines = [
        f"name           {scenario.name}",
        f"dim            {scenario.dim}",
        f"basis_labels   {' '.join(scenario.basis_labels)}",
        f"observables    {' '.join(scenario.observable_names)}",
        "pre            " + "  ".join(
            f"{float(z.real)!r}{float(z.imag):+}j" for z in scenario.pre.amplitudes
        ),
        "post           " + "  ".join(
            f"{float(z.real)!r}{float(z.imag):+}j" for z in scenario.post.amplitudes
        ),
    ]
    return doc, "\n".join(lines)


def _cmd_reproduce(args) -> tuple[dict, str, int]:
    results = run_all()
    doc = {
        "checks": [
            {
                "id": r.check_id,
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
            }
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    width = max(len(r.name) for r in results)
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {r.check_id}. {r.name.ljust(width)}  {r.detail}"
        for r in results
    ]
    lines.append("all checks passed" if doc["all_passed"] else "SOME CHECKS FAILED")
    exit_code = 0 if doc["all_passed"] else DOMAIN_EXIT
    return doc, "\n".join(lines), exit_code


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="built-in scenario: three-box or n-box:<n>")
    parser.add_argument("--scenario-file", help="path to a scenario JSON document")


def _add_common_output_args(parser: argparse.ArgumentParser,
                            formats=("json", "table")) -> None:
    parser.add_argument("--format", choices=formats, default="json",
                        help="output format (default json)")
    parser.add_argument("--out", help="write output to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prepost",
        description=(
            "Measurement statistics of pre- and post-selected quantum systems: "
            "outcome probabilities, consistency of history families, and "
            "seeded ensemble simulation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("abl", help="outcome probabilities of a measured observable")
    _add_scenario_args(p)
    p.add_argument("--observable", required=True, help="name of the measured observable")
    p.add_argument("--outcome", help="single outcome label (default: full distribution)")
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_abl)

    p = sub.add_parser("contextual",
                       help="queried-outcome probability given the measured observable")
    _add_scenario_args(p)
    p.add_argument("--measured", required=True, help="observable actually measured")
    p.add_argument("--queried", required=True, help="observable being asked about")
    p.add_argument("--outcome", required=True, help="queried outcome label")
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_contextual)

    p = sub.add_parser("consistency",
                       help="consistency report for one observable or a merged event set")
    _add_scenario_args(p)
    p.add_argument("--observable", help="single observable to check")
    p.add_argument("--merge", nargs="+", metavar="NAME",
                   help="pool these observables' events into one family")
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_consistency)

    p = sub.add_parser("ch", help="chain conditionals and comparison with the ABL values")
    _add_scenario_args(p)
    p.add_argument("--observable", required=True)
    p.add_argument("--outcome", help="single outcome label (default: all outcomes)")
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_ch)

    p = sub.add_parser("simulate", help="seeded ensemble simulation")
    _add_scenario_args(p)
    p.add_argument("--open", required=True, metavar="NAME",
                   help="observable measured in every run")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_common_output_args(p, formats=("json", "table", "csv"))
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("scenario", help="validate, display, or write a scenario document")
    _add_scenario_args(p)
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_scenario)

    p = sub.add_parser("reproduce", help="run the built-in battery of headline checks")
    _add_common_output_args(p)
    p.set_defaults(handler=_cmd_reproduce)

    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _error_doc(exc: PrePostError) -> dict:
    doc = {"error": exc.code, "message": str(exc)}
    if isinstance(exc, CounterfactualInvalid):
        doc["explanation"] = exc.explanation
        doc["max_violation"] = exc.max_violation
        doc["diagnostic_conditional"] = exc.diagnostic_conditional
    return doc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outcome = args.handler(args)
    except _CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ScenarioFormatError, UnknownObservable) as exc:
        _emit(json.dumps({"error": exc.code, "message": str(exc)}, indent=2),
              getattr(args, "out", None))
        return USAGE_EXIT
    except PrePostError as exc:
        _emit(json.dumps(_error_doc(exc), indent=2), getattr(args, "out", None))
        return DOMAIN_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT

    if len(outcome) == 3:
        doc, table, exit_code = outcome
    else:
        doc, table = outcome
        exit_code = 0
    if args.format == "json":
        text = json.dumps(doc, indent=2)
    else:  # table or csv
        text = table
    _emit(text, getattr(args, "out", None))
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
