"""Artifact I/O: flat config files, per-round CSV, summary JSON, gnuplot scripts."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
from pathlib import Path

import numpy as np

from .harness import BoundCheck, RunConfig

OUTPUT_DIR_ENV = "COCO_OUTPUT_DIR"
BASE_COLUMNS = ("t", "cost", "violation", "Q", "eta", "G", "argmax_expert")
MAX_PROB_COLUMNS = 32


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def load_config(path):
    """Parse a flat ``key = value`` file (``#`` comments allowed) into a RunConfig."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def parse_config(text):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    parser.read_string("[run]\n" + text)
    values = {k: v.strip() for k, v in parser["run"].items()}
    for key in ("delta", "eta", "sample_seed", "output", "decision_set", "feasible_point"):
        if values.get(key, "").lower() in ("", "none"):
            values.pop(key, None)
    return RunConfig.from_dict(values)


def dump_config(config):
    lines = []
    for key, value in config.to_dict().items():
        if value is None:
            continue
        if isinstance(value, list):
            value = ",".join(_fmt(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def resolve_stem(output, default="run"):
    """Output path stem, with the directory replaced by ``$COCO_OUTPUT_DIR`` when set."""
    stem = Path(output) if output else Path(default)
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        stem = Path(override) / stem.name
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    return stem


def _write(path, text):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def record_csv(record):
    header = list(BASE_COLUMNS) + ["regret"]
    extra_cols = []
    if record.sampled_expert is not None:
        header.append("sampled_expert")
        extra_cols.append(record.sampled_expert[:, None])
    if record.probs is not None and record.probs.shape[1] <= MAX_PROB_COLUMNS:
        header += [f"p_{i}" for i in range(record.probs.shape[1])]
        extra_cols.append(record.probs)
    if record.points is not None:
        header += [f"x_{k}" for k in range(record.points.shape[1])]
        extra_cols.append(record.points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i in range(record.horizon):
        row = [record.t[i], record.cost[i], record.violation[i], record.q[i], record.eta[i],
               record.scale[i], record.argmax_expert[i], record.regret_path[i]]
        for block in extra_cols:
            row.extend(block[i].tolist())
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def record_summary(record):
    return {
        "policy": record.config.policy,
        "environment": record.config.environment,
        "seed": record.config.seed,
        "horizon": record.horizon,
        "regret": record.regret,
        "ccv": record.ccv,
        "comparator": record.comparator,
        "comparator_cost": record.comparator_cost,
        "checks": [c.to_dict() for c in record.checks],
        "all_passed": record.all_passed,
        "extra": record.extra,
        "config": record.config.to_dict(),
    }


def frequency_csv(record):
    freq = record.frequencies
    lines = ["expert,expected,sampled"]
    for i, (e, s) in enumerate(zip(freq["expected"], freq["sampled"])):
        lines.append(f"{i},{_fmt(e)},{_fmt(s)}")
    return "\n".join(lines) + "\n"


def run_gnuplot(csv_name):
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 't'\n"
        "set multiplot layout 1,2\n"
        f"plot '{csv_name}' using 't':'regret' with lines title 'regret'\n"
        f"plot '{csv_name}' using 't':'Q' with lines title 'CCV'\n"
        "unset multiplot\n"
    )


def emit(record, formats=("csv", "json"), stem=None):
    """Write the record's artifacts; returns ``{kind: path}``.

    ``stem`` defaults to the config's ``output`` (``run`` if unset). Files
    are ``<stem>.csv``, ``<stem>.json``, ``<stem>_freq.csv`` (expert runs)
    and ``<stem>.gp``.
    """
    stem = resolve_stem(stem or record.config.output)
    paths = {}
    for fmt in formats:
        if fmt == "csv":
            paths["csv"] = _write(stem.with_name(stem.name + ".csv"), record_csv(record))
            paths["gnuplot"] = _write(stem.with_name(stem.name + ".gp"), run_gnuplot(stem.name + ".csv"))
            if record.frequencies is not None:
                paths["freq"] = _write(stem.with_name(stem.name + "_freq.csv"), frequency_csv(record))
        elif fmt == "json":
            text = json.dumps(record_summary(record), sort_keys=True, indent=2) + "\n"
            paths["json"] = _write(stem.with_name(stem.name + ".json"), text)
        else:
            raise ValueError(f"unknown format {fmt!r}; choose csv or json")
    return paths


def emit_sweep(rows, summary, stem):
    stem = resolve_stem(stem, default="sweep")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["beta", "seed", "regret", "ccv", "passed"])
    for r in rows:
        writer.writerow([_fmt(r.beta), r.seed, _fmt(r.regret), _fmt(r.ccv), int(r.passed)])
    runs = _write(stem.with_name(stem.name + "_runs.csv"), buf.getvalue())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = ["beta", "regret", "regret_sd", "ccv", "ccv_sd", "n_seeds"]
    writer.writerow(keys)
    for s in summary:
        writer.writerow([_fmt(s[k]) for k in keys])
    name = stem.name + ".csv"
    table = _write(stem.with_name(name), buf.getvalue())
    script = (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'beta'\n"
        "set multiplot layout 1,2\n"
        f"plot '{name}' using 'beta':'regret':'regret_sd' with yerrorlines title 'regret'\n"
        f"plot '{name}' using 'beta':'ccv':'ccv_sd' with yerrorlines title 'CCV'\n"
        "unset multiplot\n"
    )
    gp = _write(stem.with_name(stem.name + ".gp"), script)
    return {"runs": runs, "table": table, "gnuplot": gp}


def cover_csv(cover):
    d = cover.centers.shape[1]
    lines = [",".join(f"x_{k}" for k in range(d))]
    lines += [",".join(_fmt(v) for v in c) for c in cover.centers]
    return "\n".join(lines) + "\n"


def _read_series(csv_path):
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in ("cost", "Q", "regret")} if rows else None


def check_record(path):
    """Re-verify a summary JSON (and its sibling CSV if present).

    Returns a list of :class:`BoundCheck`; stored verdicts are recomputed
    from the stored sides rather than trusted.
    """
    path = Path(path)
    try:
        summary = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read record {path}: {exc.strerror}") from exc
    checks = [BoundCheck(c["name"], c["lhs"], c["rhs"]) for c in summary.get("checks", [])]
    csv_path = path.with_suffix(".csv")
    if csv_path.exists():
        series = _read_series(csv_path)
        if series is not None:
            q = series["Q"]
            checks.append(BoundCheck("q_nondecreasing", float(np.max(q[:-1] - q[1:], initial=0.0)), 0.0))
            checks.append(BoundCheck("ccv_matches_final_q", abs(summary["ccv"] - q[-1]), 1e-9))
            accounted = float(series["cost"].sum()) - summary["comparator_cost"]
            checks.append(BoundCheck("regret_accounting", abs(summary["regret"] - accounted),
                                     1e-9 * max(1.0, abs(accounted))))
    return checks


__all__ = [
    "OUTPUT_DIR_ENV", "load_config", "parse_config", "dump_config", "emit", "emit_sweep",
    "record_csv", "record_summary", "cover_csv", "check_record", "resolve_stem",
]
