"""Command-line front end.

Subcommands: exact, solve, pipeline, verify, convert-dimacs, gaussian-test.
Exit codes: 0 success, 1 verification or rounding failure, 2 usage/I-O error.
SEPKIT_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .concave import ConcaveOptions, solve_concave
from .embeddings import Embedding, embedding_from_gram, gram_from_z, objective
from .graphs import (
    CapExceededError,
    GraphParseError,
    InfeasibleBalanceError,
    dump_graph,
    exact_balanced_separator,
    load_dimacs,
    load_graph,
)
from .records import batch_rows_to_csv, experiment_record, record_to_json
from .rounding import (
    PipelineOptions,
    RoundingParams,
    gaussian_projection_test,
    pipeline,
)
from .sdp import SdpOptions, solve_sdp
from .solver_core import NonconvergedError
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _default_seed():
    return int(os.environ.get("SEPKIT_SEED", "0"))


def _read_graph(path):
    return load_graph(Path(path).read_text())


def _emit(record, out_path):
    text = record_to_json(record)
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_exact(args):
    g = _read_graph(args.graph)
    cut, value = exact_balanced_separator(g, args.c, cap=args.cap)
    record = experiment_record(
        "exact",
        {"graph": args.graph, "c": args.c, "cap": args.cap},
        {"n": g.n, "m": g.m, "value": value, "cut_members": list(cut.sorted_members())},
    )
    _emit(record, args.out)
    return EXIT_OK


def cmd_solve(args):
    if not (0.0 < args.p <= 2.0):
        raise ValueError(f"p must lie in (0, 2], got {args.p}")
    g = _read_graph(args.graph)
    if args.p == 2.0:
        opts = SdpOptions(
            tol=args.tol, max_iter=args.max_iter, seed=args.seed, warm_start=args.warm_start
        )
        x, report = solve_sdp(g, args.c, opts)
        matrix_doc = x.to_json()
        matrix_kind = "gram"
        emb = embedding_from_gram(x)
    else:
        opts = ConcaveOptions(
            starts=args.starts, inner_tol=args.inner_tol, max_outer=args.max_outer,
            seed=args.seed,
        )
        z, report = solve_concave(g, args.c, args.p, opts)
        matrix_doc = z.to_json()
        matrix_kind = "z"
        emb = embedding_from_gram(gram_from_z(z))
    if args.out_matrix:
        Path(args.out_matrix).write_text(matrix_doc + "\n")
    if args.out_embedding:
        Path(args.out_embedding).write_text(emb.to_json() + "\n")
    record = experiment_record(
        "solve",
        {
            "graph": args.graph,
            "p": args.p,
            "c": args.c,
            "seed": args.seed,
            "tol": args.tol,
            "starts": args.starts,
        },
        {
            "n": g.n,
            "m": g.m,
            "matrix_kind": matrix_kind,
            "relaxation_value": report.value,
            "iterations": report.iterations,
            "feasible": report.residuals.feasible,
            "max_unit_violation": report.residuals.max_unit_violation,
            "max_triangle_violation": report.residuals.max_triangle_violation,
            "spread_slack": report.residuals.spread_slack,
        },
    )
    _emit(record, args.out)
    return EXIT_OK


def _pipeline_options(args):
    rounding = RoundingParams(
        delta=None if args.delta_auto or args.delta is None else args.delta,
        sigma=args.sigma,
        c_prime=args.c_prime,
        b_const=args.b_const,
        seed=args.seed,
    )
    return PipelineOptions(
        rounding=rounding, retries=args.retries, seed=args.seed, starts=args.starts
    )


def _run_single_pipeline(g, name, args):
    emb = None
    value = None
    if args.embedding:
        emb = Embedding.from_json(Path(args.embedding).read_text())
        value = args.relaxation_value
        if value is None:
            value = objective(g, emb, args.p)
    report = pipeline(g, args.c, args.p, _pipeline_options(args), emb, value)
    results = report.to_dict()
    results["graph"] = name
    results["n"] = g.n
    results["m"] = g.m
    return report, results


def cmd_pipeline(args):
    if not (0.0 < args.p <= 2.0):
        raise ValueError(f"p must lie in (0, 2], got {args.p}")
    if args.batch:
        paths = sorted(Path(args.batch).glob("*.txt"))
        if not paths:
            raise FileNotFoundError(f"no *.txt graphs under {args.batch}")

        def run(item):
            idx, path = item
            g = _read_graph(path)
            sub_args = argparse.Namespace(**vars(args))
            sub_args.seed = args.seed + idx
            sub_args.embedding = None
            _, results = _run_single_pipeline(g, path.name, sub_args)
            return results

        with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
            rows = list(pool.map(run, enumerate(paths)))
        if args.records_dir:
            rec_dir = Path(args.records_dir)
            rec_dir.mkdir(parents=True, exist_ok=True)
            for row in rows:
                record = experiment_record(
                    "pipeline",
                    {"graph": row["graph"], "p": args.p, "c": args.c, "seed": row["seed"]},
                    row,
                )
                name = Path(row["graph"]).stem
                (rec_dir / f"{name}.record.json").write_text(record_to_json(record))
        csv_text = batch_rows_to_csv(rows)
        if args.out_csv:
            Path(args.out_csv).write_text(csv_text)
        else:
            sys.stdout.write(csv_text)
        failures = [r for r in rows if not r["succeeded"]]
        return EXIT_FAILURE if failures else EXIT_OK

    g = _read_graph(args.graph)
    report, results = _run_single_pipeline(g, Path(args.graph).name, args)
    record = experiment_record(
        "pipeline",
        {
            "graph": args.graph,
            "p": args.p,
            "c": args.c,
            "seed": args.seed,
            "sigma": args.sigma,
            "c_prime": args.c_prime,
            "b_const": args.b_const,
            "retries": args.retries,
            "delta": args.delta,
        },
        results,
    )
    _emit(record, args.out)
    return EXIT_OK if report.succeeded else EXIT_FAILURE


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, seed=args.seed)
    all_ok = True
    for suite in results:
        for line in suite.lines:
            print(f"[{suite.name}] {line}")
        print(f"suite {suite.name}: {'PASS' if suite.passed else 'FAIL'}")
        all_ok = all_ok and suite.passed
    return EXIT_OK if all_ok else EXIT_FAILURE


def cmd_convert_dimacs(args):
    g = load_dimacs(Path(args.input).read_text())
    text = dump_graph(g)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gaussian_test(args):
    result = gaussian_projection_test(args.d, args.l, args.x, args.samples, args.seed)
    record = experiment_record(
        "gaussian-test",
        {"d": args.d, "l": args.l, "x": args.x, "samples": args.samples, "seed": args.seed},
        {
            "empirical_low": result.empirical_low,
            "empirical_high": result.empirical_high,
            "bound_low": result.bound_low,
            "bound_high": result.bound_high,
        },
    )
    _emit(record, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sepkit",
        description="balanced-separator relaxation lab: exact oracle, solvers, rounding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(sp):
        sp.add_argument("--seed", type=int, default=_default_seed())

    sp = sub.add_parser("exact", help="brute-force minimum c-balanced cut")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--cap", type=int, default=20)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("solve", help="solve the exponent-p relaxation")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-iter", type=int, default=50000)
    sp.add_argument("--warm-start", choices=["cut", "orthonormal"], default="cut")
    sp.add_argument("--starts", type=int, default=8)
    sp.add_argument("--inner-tol", type=float, default=1e-5)
    sp.add_argument("--max-outer", type=int, default=30)
    sp.add_argument("--out-matrix")
    sp.add_argument("--out-embedding")
    sp.add_argument("--out")
    add_seed(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("pipeline", help="solve, round, and report a cut")
    sp.add_argument("--graph")
    sp.add_argument("--batch", help="directory of *.txt graphs; emits aggregate CSV")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--delta-auto", action="store_true")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--c-prime", type=float, default=None)
    sp.add_argument("--b-const", type=float, default=1.0)
    sp.add_argument("--retries", type=int, default=64)
    sp.add_argument("--starts", type=int, default=4)
    sp.add_argument("--embedding", help="embedding JSON to round (skips the solve)")
    sp.add_argument("--relaxation-value", type=float)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--out-csv")
    sp.add_argument("--records-dir", help="batch mode: write one record JSON per graph")
    add_seed(sp)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("verify", help="run property suites")
    sp.add_argument("--suite", choices=sorted(SUITES) + ["all"], required=True)
    add_seed(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("convert-dimacs", help="DIMACS to edge-list conversion")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_convert_dimacs)

    sp = sub.add_parser("gaussian-test", help="projection-lemma Monte Carlo")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--l", type=float, default=1.0)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--out")
    add_seed(sp)
    sp.set_defaults(func=cmd_gaussian_test)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "pipeline" and not args.graph and not args.batch:
        parser.error("pipeline needs --graph or --batch")
    try:
        return args.func(args)
    except (
        GraphParseError,
        CapExceededError,
        InfeasibleBalanceError,
        FileNotFoundError,
        OSError,
        ValueError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonconvergedError as exc:
        print(f"solver failed to converge: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
