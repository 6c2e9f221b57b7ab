"""Batch command-line front end.

Subcommands: ``learn`` (CSV columns to weighted-atom program), ``query``
(success/conditioned probabilities), ``transform`` (hybrid to discrete),
``induce`` (rule learning), ``plotdata`` (density curve samples), ``stats``
(density summaries).  Exit codes: 0 ok, 1 usage, 2 input error,
3 enumeration refused by the choice-space cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import density as density_mod
from .discretize import Method, equal_frequency, equal_width
from .engine import DEFAULT_CHOICE_CAP, answer_queries
from .errors import ChoiceSpaceError, ContractError, ParseError, PplpError
from .program import Program, Struct, format_atom, format_number, parse, print_program
from .rulelearn import induce as induce_rules
from .rulelearn import score_hypothesis
from .transform import DiscretizedProgram, discretize_program, emit_learning_task, task_files


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.run(args)
    except ChoiceSpaceError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (PplpError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pplp",
        description="Learn piecewise-polynomial densities, embed them in "
        "logic programs, answer interval queries exactly, and induce rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="fit densities to CSV columns and emit a program")
    learn.add_argument("csv", type=Path)
    learn.add_argument("--columns", help="comma-separated column names (default: all numeric)")
    learn.add_argument("--max-size", type=int, default=40, help="largest bin count searched")
    learn.add_argument("--max-order", type=int, default=8, help="largest polynomial degree searched")
    learn.add_argument("--bins", type=int, help="fix the bin count instead of searching")
    learn.add_argument(
        "--method", choices=["auto", "ew", "ef", "distance"], default="auto",
        help="binning method; 'auto' searches equal-width and equal-frequency",
    )
    learn.add_argument("--label-column", help="class column for --method distance")
    learn.add_argument("--aliases", type=Path, help="JSON map renaming piece predicates")
    learn.add_argument("--out", type=Path, required=True, help="output directory")
    learn.add_argument("--seed", type=int, default=0, help="seed for randomized inputs")
    learn.set_defaults(run=_cmd_learn)

    query = sub.add_parser("query", help="answer the queries declared in a program")
    query.add_argument("program", type=Path)
    query.add_argument("--evidence", type=Path, help="extra statements merged before solving")
    query.add_argument("--choice-cap", type=int, default=DEFAULT_CHOICE_CAP)
    query.add_argument("--out", type=Path, help="directory for results.json")
    query.set_defaults(run=_cmd_query)

    transform = sub.add_parser("transform", help="integrate pieces into scalar facts")
    transform.add_argument("program", type=Path)
    transform.add_argument("--out", type=Path, required=True)
    transform.set_defaults(run=_cmd_transform)

    induce = sub.add_parser("induce", help="learn rules for a target predicate")
    induce.add_argument("program", type=Path)
    induce.add_argument("--target", required=True, help="target predicate, name or name/arity")
    induce.add_argument("--examples", type=Path, required=True, help="positive example facts")
    induce.add_argument("--precision", type=float, default=0.99)
    induce.add_argument("--max-body", type=int, default=4)
    induce.add_argument("--out", type=Path, required=True)
    induce.set_defaults(run=_cmd_induce)

    plotdata = sub.add_parser("plotdata", help="sample a density curve as CSV")
    plotdata.add_argument("program", type=Path)
    plotdata.add_argument("--attribute", required=True)
    plotdata.add_argument("--npoints", type=int, default=201)
    plotdata.add_argument("--out", type=Path, help="output file (default: stdout)")
    plotdata.set_defaults(run=_cmd_plotdata)

    stats = sub.add_parser("stats", help="summarise the densities in a program")
    stats.add_argument("program", type=Path)
    stats.set_defaults(run=_cmd_stats)
    return parser


# --- learn -------------------------------------------------------------------


def _read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("the CSV file needs a header row")
        rows = list(reader)
    return list(reader.fieldnames), rows


def _numeric_column(rows: list[dict[str, str]], name: str) -> tuple[list[float], int]:
    values: list[float] = []
    missing = 0
    for row in rows:
        cell = (row.get(name) or "").strip()
        if not cell:
            missing += 1
            continue
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseError(f"column {name!r} has a non-numeric cell {cell!r}") from None
    return values, missing


def _is_numeric(rows, name) -> bool:
    try:
        values, _ = _numeric_column(rows, name)
    except ParseError:
        return False
    return len(values) > 0


def sanitize_predicate(column: str) -> str:
    name = "".join(ch.lower() if ch.isalnum() else "_" for ch in column)
    if not name or not name[0].isalpha():
        name = "a_" + name
    return name


def _learn_one(values, labels, args) -> density_mod.DensityModel:
    xs = np.sort(np.asarray(values, dtype=float))
    if args.method == "distance":
        if labels is None:
            raise ParseError("--method distance needs --label-column")
        pairs = sorted(zip(values, labels), key=lambda p: p[0])
        return density_mod.fit_supervised(pairs, args.bins, args.max_order)
    if args.method == "auto" and args.bins is None:
        return density_mod.build_pp_structure(xs, args.max_size, args.max_order)
    sizes = [args.bins] if args.bins is not None else list(range(2, args.max_size + 1))
    methods = {
        "auto": (Method.EQUAL_WIDTH, Method.EQUAL_FREQUENCY),
        "ew": (Method.EQUAL_WIDTH,),
        "ef": (Method.EQUAL_FREQUENCY,),
    }[args.method]
    best = None
    for l in sizes:
        for method in methods:
            disc = (equal_width if method is Method.EQUAL_WIDTH else equal_frequency)(xs, l)
            for degree in range(1, args.max_order + 1):
                try:
                    model = density_mod._fit_config(disc, degree, xs)
                except ContractError:
                    continue
                if best is None or model.bic > best.bic:
                    best = model
    if best is None:
        raise ParseError("no representable configuration for the requested grid")
    return best


def density_block(attribute: str, model: density_mod.DensityModel,
                  aliases: dict[str, str] | None = None) -> str:
    """Program text for one learned attribute: weighted piece facts plus
    their interval guard clauses."""
    var = attribute[0].upper() if attribute[0].isalpha() else "X"
    pp = model.density
    lines = []
    for i, piece in enumerate(pp.pieces):
        name = f"{attribute}_{i + 1}"
        if aliases:
            name = aliases.get(name, name)
        weight = _piece_weight_text(piece.coefficients, var)
        lo = format_number(pp.cutpoints[i])
        hi = format_number(pp.cutpoints[i + 1])
        lines.append(f"{weight} :: {name}({var}).")
        lines.append(f"{name}({var}) :- {attribute}({var}), ininterval({var}, {lo}, {hi}).")
    return "\n".join(lines) + "\n"


def _piece_weight_text(coefficients, var: str) -> str:
    terms = []
    for j, c in enumerate(coefficients):
        if c == 0.0 and len(coefficients) > 1:
            continue
        mag = format_number(abs(c))
        body = mag if j == 0 else (f"{mag}*{var}" if j == 1 else f"{mag}*{var}^{j}")
        terms.append((body, c < 0.0))
    if not terms:
        return "(0)"
    if len(terms) == 1 and "*" not in terms[0][0]:
        # lone constant: parenthesise so it reads as a weight, not a probability
        sign = "-" if terms[0][1] else ""
        return f"({sign}{terms[0][0]})"
    out = []
    for i, (body, neg) in enumerate(terms):
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)


def _cmd_learn(args) -> int:
    header, rows = _read_csv(args.csv)
    if args.columns:
        columns = [c.strip() for c in args.columns.split(",") if c.strip()]
        unknown = [c for c in columns if c not in header]
        if unknown:
            raise ParseError(f"unknown columns: {', '.join(unknown)}")
    else:
        columns = [
            c for c in header
            if c != args.label_column and _is_numeric(rows, c)
        ]
        if not columns:
            raise ParseError("no numeric columns found")
    labels = None
    if args.label_column:
        if args.label_column not in header:
            raise ParseError(f"unknown label column {args.label_column!r}")
        labels = [(row.get(args.label_column) or "").strip() for row in rows]

    aliases = None
    if args.aliases:
        aliases = json.loads(args.aliases.read_text(encoding="utf-8"))

    args.out.mkdir(parents=True, exist_ok=True)
    blocks = []
    records = []
    for column in columns:
        values, missing = _numeric_column(rows, column)
        if not values:
            raise ParseError(f"column {column!r} is empty")
        column_labels = None
        if labels is not None:
            column_labels = [
                lab for row, lab in zip(rows, labels)
                if (row.get(column) or "").strip()
            ]
        model = _learn_one(values, column_labels, args)
        attribute = sanitize_predicate(column)
        blocks.append(density_block(attribute, model, aliases))
        records.append({
            "attribute": attribute,
            "l": model.discretization.bins,
            "method": model.discretization.method.value,
            "k": model.degree,
            "bic": model.bic,
            "logL": model.log_likelihood,
            "n": model.n,
            "pct_ef": model.pct_ef,
            "n_missing": missing,
        })
    program_text = "\n".join(blocks)
    parse(program_text)  # reject anything that would not reload
    (args.out / "learned.pl").write_text(program_text, encoding="utf-8")
    ef_share = [1.0 if r["method"] == "ef" else 0.0 for r in records]
    stats = {
        "attributes": records,
        "summary": {
            "n_continuous": len(records),
            "avg_bins": sum(r["l"] for r in records) / len(records),
            "pct_ef": 100.0 * sum(ef_share) / len(ef_share),
        },
    }
    _write_json(args.out / "stats.json", stats)
    return 0


# --- query -------------------------------------------------------------------


def _load_program(path: Path, evidence: Path | None = None) -> Program:
    text = path.read_text(encoding="utf-8")
    if evidence is not None:
        text += "\n" + evidence.read_text(encoding="utf-8")
    return parse(text)


def _cmd_query(args) -> int:
    program = _load_program(args.program, args.evidence)
    results = answer_queries(program, cap=args.choice_cap)
    rows = [
        {
            "query": format_atom(r.query),
            "probability": r.probability,
            "conditioned": r.conditioned,
            "cells": r.cells,
            "choices": r.choices,
        }
        for r in results
    ]
    for row in rows:
        tag = " | evidence" if row["conditioned"] else ""
        print(f"P({row['query']}{tag}) = {row['probability']:.12g}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_json(args.out / "results.json", rows)
    return 0


# --- transform / induce ------------------------------------------------------


def _cmd_transform(args) -> int:
    program = _load_program(args.program)
    dp = discretize_program(program)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "discrete.pl").write_text(print_program(dp.program), encoding="utf-8")
    (args.out / "mapping.json").write_text(dp.mapping_json(), encoding="utf-8")
    return 0


def _parse_examples(path: Path) -> list[Struct]:
    program = parse(path.read_text(encoding="utf-8"))
    facts = [c.head for c in program.clauses if not c.body]
    facts += [f.atom for f in program.prob_facts if f.probability >= 1.0]
    if not facts:
        raise ParseError(f"{path} contains no example facts")
    return facts


def _cmd_induce(args) -> int:
    program = _load_program(args.program)
    if program.densities:
        dp = discretize_program(program)
    else:
        dp = DiscretizedProgram(program, ())
    examples = _parse_examples(args.examples)
    if "/" in args.target:
        name, arity_text = args.target.split("/", 1)
        target = (name, int(arity_text))
    else:
        target = (args.target, len(examples[0].args))
    examples = [e for e in examples if e.key == target]
    task = emit_learning_task(dp, target, examples)
    hypothesis = induce_rules(task, args.precision, args.max_body)
    stats = score_hypothesis(hypothesis, task)

    args.out.mkdir(parents=True, exist_ok=True)
    for fname, text in task_files(task).items():
        (args.out / fname).write_text(text, encoding="utf-8")
    (args.out / "hypothesis.pl").write_text(hypothesis.program_text(), encoding="utf-8")
    _write_json(args.out / "rule_stats.json", {
        **stats,
        "residual_positives": [format_atom(a) for a in hypothesis.residual_positives],
    })
    print(hypothesis.program_text(), end="")
    return 0


# --- plotdata / stats --------------------------------------------------------


def _cmd_plotdata(args) -> int:
    program = _load_program(args.program)
    density = program.densities.get(args.attribute)
    if density is None or density.pp is None:
        raise ParseError(f"no univariate density for attribute {args.attribute!r}")
    if args.npoints < 1:
        raise ParseError("--npoints must be at least 1")
    lo, hi = density.pp.support
    xs = np.linspace(lo, hi, args.npoints) if args.npoints > 1 else np.array([lo])
    ys = density.pp.values(xs)
    lines = ["x,density"] + [f"{repr(float(x))},{repr(float(y))}" for x, y in zip(xs, ys)]
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_stats(args) -> int:
    program = _load_program(args.program)
    rows = []
    for name in sorted(program.densities):
        density = program.densities[name]
        rows.append({
            "attribute": name,
            "dimension": density.dimension,
            "support": [list(b) for b in density.support.bounds],
            "pieces": [
                {
                    "predicate": format_atom(p.predicate),
                    "box": [list(b) for b in p.box.bounds],
                    "mass": p.mass,
                }
                for p in density.pieces
            ],
        })
    sys.stdout.write(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return 0


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
