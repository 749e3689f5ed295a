"""
Rows, tables and CSV files for command output.

Tables are for people and print floats to 8 decimals.  CSV files are the
machine interface and print floats to 17 significant digits, so identical
inputs give byte-identical files.
"""
import csv

import attr
from tabulate import tabulate

TABLE_FLOAT = ".8f"
CSV_FLOAT = ".17g"


@attr.s
class OutcomeRow:
    """One heralded click pattern of a protocol run, with the parameters that
    produced it."""

    variant: str = attr.ib()
    lambda_l: float = attr.ib()
    lambda_r: float = attr.ib()
    theta: float = attr.ib()
    bs_t: float = attr.ib()
    pattern: str = attr.ib()
    probability: float = attr.ib()
    target: str = attr.ib()
    fidelity: float = attr.ib()


@attr.s
class TrialRow:
    trial: int = attr.ib()
    heralded: bool = attr.ib()
    pattern: str = attr.ib(default="")
    fidelity: float = attr.ib(default=None)
    false_herald: bool = attr.ib(default=False)


def _csv_value(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, CSV_FLOAT)
    if value is None:
        return ""
    return str(value)


def _write_csv(f, rows, headers):
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_csv_value(row[h]) for h in headers])


def _table(rows, headers):
    return tabulate(
        [[row[h] for h in headers] for row in rows],
        headers=headers,
        floatfmt=TABLE_FLOAT,
        missingval="-",
    )


def _summary(pairs):
    pairs = [
        (name, format(value, TABLE_FLOAT) if isinstance(value, float) else value)
        for name, value in pairs
    ]
    return tabulate(pairs, tablefmt="plain", disable_numparse=True)


def build_outcome_rows(report):
    coupling = report.params.coupling
    rows = []
    for outcome in report.outcomes:
        row = OutcomeRow(
            variant=report.variant.value,
            lambda_l=coupling.lambda_l,
            lambda_r=coupling.lambda_r,
            theta=coupling.theta,
            bs_t=report.params.bs_transmittance,
            pattern=outcome.pattern.label(),
            probability=outcome.probability,
            target=outcome.target.value,
            fidelity=outcome.fidelity,
        )
        rows.append(attr.asdict(row))
    return rows


OUTCOME_HEADERS = [a.name for a in attr.fields(OutcomeRow)]


def write_outcomes_csv(report, f):
    _write_csv(f, build_outcome_rows(report), OUTCOME_HEADERS)


def format_report(report):
    rows = [
        {
            "bank": outcome.bank,
            "pattern": outcome.pattern.label(),
            "probability": outcome.probability,
            "target": outcome.target.value,
            "fidelity": outcome.fidelity,
        }
        for outcome in report.outcomes
    ]
    parts = [
        _table(rows, ["bank", "pattern", "probability", "target", "fidelity"]),
        "",
        _summary(
            [("total probability", report.total_success_probability)]
            + [
                (f"yield {target.value}", probability)
                for target, probability in sorted(report.per_target_yield.items())
            ]
            + [
                (f"stage {name}", value)
                for name, value in report.stage_probabilities.items()
            ]
            + [
                ("ledger heralded", report.ledger.heralded),
                ("ledger discarded", report.ledger.discarded),
                ("ledger no-click", report.ledger.no_click),
            ]
        ),
    ]
    if report.notes:
        parts.extend(["", *report.notes])
    return "\n".join(parts) + "\n"


def build_sweep_rows(rows, parameter):
    return [
        {
            parameter: row.value,
            "total_probability": row.total_probability,
            "min_fidelity": row.min_fidelity,
            "max_fidelity": row.max_fidelity,
        }
        for row in rows
    ]


def _sweep_headers(parameter):
    return [parameter, "total_probability", "min_fidelity", "max_fidelity"]


def write_sweep_csv(rows, parameter, f):
    _write_csv(f, build_sweep_rows(rows, parameter), _sweep_headers(parameter))


def format_sweep(rows, parameter):
    return _table(build_sweep_rows(rows, parameter), _sweep_headers(parameter)) + "\n"


ESTIMATE_HEADERS = [
    "variant",
    "trials",
    "heralds",
    "yield",
    "mean_fidelity",
    "fidelity_ci95",
    "false_herald_rate",
]


def build_estimate_row(variant, estimate):
    return {
        "variant": variant.value,
        "trials": estimate.trials,
        "heralds": estimate.heralds,
        "yield": estimate.yield_,
        "mean_fidelity": estimate.mean_fidelity,
        "fidelity_ci95": estimate.fidelity_ci95,
        "false_herald_rate": estimate.false_herald_rate,
    }


def write_estimate_csv(variant, estimate, f):
    _write_csv(f, [build_estimate_row(variant, estimate)], ESTIMATE_HEADERS)


def format_estimate(variant, estimate):
    row = build_estimate_row(variant, estimate)
    pairs = [(name.replace("_", " "), row[name]) for name in ESTIMATE_HEADERS]
    return _summary(pairs) + "\n"


TRIAL_HEADERS = [a.name for a in attr.fields(TrialRow)]


def build_trial_rows(records):
    rows = []
    for record in records:
        row = TrialRow(trial=record.trial, heralded=record.heralded)
        if record.heralded:
            row.pattern = record.pattern.label()
            row.fidelity = record.fidelity
            row.false_herald = record.false_herald
        rows.append(attr.asdict(row))
    return rows


def write_trials_csv(records, f):
    _write_csv(f, build_trial_rows(records), TRIAL_HEADERS)


def format_verification(result):
    pairs = [
        ("variant", result.variant.value),
        ("elements checked", result.steps),
        ("max amplitude deviation", f"{result.max_amplitude_deviation:.3e}"),
        ("max probability deviation", f"{result.max_probability_deviation:.3e}"),
        ("dense total probability", result.dense_total_probability),
        ("sparse total probability", result.sparse_total_probability),
    ]
    pairs.extend(
        (f"dense {name}", value) for name, value in result.stage_probabilities.items()
    )
    pairs.append(("agreement", "pass" if result.passed else "FAIL"))
    parts = [_summary(pairs)]
    if result.notes:
        parts.extend(["", *result.notes])
    return "\n".join(parts) + "\n"


VERIFICATION_HEADERS = [
    "variant",
    "steps",
    "max_amplitude_deviation",
    "max_probability_deviation",
    "dense_total_probability",
    "sparse_total_probability",
    "passed",
]


def write_verification_csv(result, f):
    row = {name: getattr(result, name) for name in VERIFICATION_HEADERS}
    row["variant"] = result.variant.value
    _write_csv(f, [row], VERIFICATION_HEADERS)
