"""Command-line entry point.

Exit codes: 0 success, 1 domain violation, 2 I/O or usage error.
Paths starting with ``@`` name bundled inputs, e.g. ``--tree @sustainability
--values @table4``. The default seed is read from ``PROBMIVES_SEED``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .ahp import AHPError, flatten, group_weights, read_ratings
from .hierarchy import (
    DEFAULT_PROFILE,
    TreeError,
    parse_tree,
    has_pending_weights,
    validate_tree,
    with_requirement_weights,
    load_tree,
)
from .reporting import ChartError, ReportBundle, default_requests, emit_charts, emit_comparison, emit_summary
from .resources import resolve
from .sampler import SamplerConfig, SamplingError, build_weight_matrix, default_seed, write_weight_matrix
from .simulation import SimulationError, dumps_result, result_from_dict, run_simulation
from .stats import rank_table_csv, statistics_json
from .value_functions import ValueFunctionError, load_value_table

DOMAIN_ERRORS = (TreeError, AHPError, ValueFunctionError, SamplingError, SimulationError, ChartError, ValueError)


class UsageError(Exception):
    pass


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _existing(spec: str) -> Path:
    path = resolve(spec)
    if not path.is_file():
        raise UsageError(f"no such file: {spec}")
    return path


def _write_manifest(path: Path, argv: Sequence[str], inputs: Sequence[Path], outputs: Sequence[Path], **extra) -> Path:
    doc = {
        "command": ["probmives", *argv],
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": {str(p): _digest(p) for p in outputs},
        **extra,
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def cmd_validate(args: argparse.Namespace) -> int:
    path = _existing(args.tree)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        tree = parse_tree(doc, None)
    except json.JSONDecodeError as exc:
        print(f"malformed tree document: {exc}", file=sys.stderr)
        return 1
    problems = validate_tree(tree)
    if has_pending_weights(tree):
        print("note: some criterion weights are marked derive-from-ratings")
    for p in problems:
        print(f"violation: {p}")
    if problems:
        return 1
    print(f"ok: {len(tree.requirements)} requirements, {len(tree.criteria)} criteria, {len(tree.indicators)} indicators")
    return 0


def cmd_ahp(args: argparse.Namespace) -> int:
    tree = load_tree(_existing(args.tree))
    table = read_ratings(_existing(args.ratings))
    wanted = [c.id for c in tree.criteria if c.id not in table.criteria]
    if wanted:
        print(f"error: criterion {', '.join(wanted)} missing from ratings", file=sys.stderr)
        return 1
    if args.group:
        if args.group != DEFAULT_PROFILE and args.group not in table.groups:
            print(f"error: unknown group {args.group!r}; available: {', '.join(table.groups)}", file=sys.stderr)
            return 1
        groups = [args.group]
    else:
        groups = [*table.groups, DEFAULT_PROFILE]

    out = {}
    for g in groups:
        gw = group_weights(table, tree, g)
        out[g] = {
            "weights": flatten(gw),
            "consistency_ratio": {rid: w.consistency_ratio for rid, w in gw.items()},
        }
        print(f"[{g}]")
        for rid, w in gw.items():
            cells = "  ".join(f"{cid}={v:.5f}" for cid, v in w.weights.items())
            print(f"  {rid}: {cells}  CR={w.consistency_ratio:.2e}")
    if args.out:
        doc = {
            "paradigm": tree.paradigm.value,
            "criteria": {c.id: c.name for c in tree.criteria},
            "profiles": {g: v["weights"] for g, v in out.items()},
            "consistency_ratio": {g: v["consistency_ratio"] for g, v in out.items()},
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return 0


def _parse_weights(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--req-weights must be comma-separated numbers, got {text!r}") from None


def cmd_simulate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    tree_path = _existing(args.tree)
    values_path = _existing(args.values)
    tree = load_tree(tree_path)
    if args.req_weights:
        tree = with_requirement_weights(tree, _parse_weights(args.req_weights))
    table = load_value_table(values_path)
    config = SamplerConfig(
        n_runs=args.runs,
        seed=args.seed if args.seed is not None else default_seed(),
        min_weight=args.min_weight,
        constraint_mode=args.mode,
    )
    weights = build_weight_matrix(tree, config, workers=args.workers)
    result = run_simulation(tree, table, weights)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps_result(result), encoding="utf-8")
    outputs = [out]
    if args.weights_csv:
        write_weight_matrix(weights, args.weights_csv)
        outputs.append(Path(args.weights_csv))
    manifest = out.with_name(out.name + ".manifest.json")
    _write_manifest(
        manifest, argv, [tree_path, values_path], outputs,
        seed=config.seed, paradigms=[tree.paradigm.value],
    )
    print(f"wrote {out} ({config.n_runs} runs x {len(table.scenarios)} scenarios)")
    return 0


def cmd_report(args: argparse.Namespace, argv: Sequence[str]) -> int:
    results = []
    inputs = []
    for spec in args.results:
        path = _existing(spec)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            print(f"error: {path}: corrupt results file at line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
            return 1
        try:
            results.append(result_from_dict(doc))
        except (SimulationError, TreeError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 1
        inputs.append(path)

    bundle = ReportBundle.from_results(results, n_bins=args.bins)
    out = Path(args.charts)
    out.mkdir(parents=True, exist_ok=True)
    produced = emit_charts(bundle, default_requests(bundle, out))
    if len(bundle.statistics) > 1:
        produced.append(emit_comparison(bundle, out / "comparison_means.svg"))
    for par, stats in bundle.statistics.items():
        p = out / f"{par}_statistics.json"
        p.write_text(statistics_json(stats), encoding="utf-8")
        q = out / f"{par}_rank_probabilities.csv"
        q.write_text(rank_table_csv(stats), encoding="utf-8")
        produced += [p, q]
    summary = emit_summary(bundle, out / "summary.json", charts=[p.name for p in produced if p.suffix == ".svg"])
    produced.append(summary)
    _write_manifest(
        out / "manifest.json", argv, inputs, produced,
        seed={k: r.config.get("seed") for k, r in bundle.results.items()},
        paradigms=list(bundle.results),
    )
    print(f"wrote {len(produced)} files to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="probmives", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a tree document")
    v.add_argument("--tree", required=True)

    a = sub.add_parser("ahp", help="criteria weights from a ratings CSV")
    a.add_argument("--ratings", required=True)
    a.add_argument("--tree", required=True)
    a.add_argument("--group", help="stakeholder group, or General to pool all respondents")
    a.add_argument("--out", help="write weight tables as JSON")

    s = sub.add_parser("simulate", help="run the Monte Carlo weight simulation")
    s.add_argument("--tree", required=True)
    s.add_argument("--values", required=True)
    s.add_argument("--runs", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--mode", choices=["literal", "reject", "reject-resample"], default="literal")
    s.add_argument("--min-weight", type=float, default=0.1)
    s.add_argument("--req-weights", help="comma-separated requirement weights in tree order")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--weights-csv", help="also dump the sampled weight matrix")
    s.add_argument("--out", required=True)

    r = sub.add_parser("report", help="charts and summary from one or two results files")
    r.add_argument("--results", nargs="+", required=True)
    r.add_argument("--charts", required=True, help="output directory")
    r.add_argument("--bins", type=int, default=30)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "ahp":
            return cmd_ahp(args)
        if args.command == "simulate":
            return cmd_simulate(args, argv)
        return cmd_report(args, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
