"""Command-line entry point: ``permmap <subcommand> ...``.

Exit status: 0 on success, 1 when a check fails or a search gives up,
2 on usage or data errors.
"""
from __future__ import annotations

import argparse
import contextlib
import sys

from . import pa as pa_mod
from .compose import CompositionError
from .recursion import INCREASE as R_INCREASE, IneligibleError, certify_base, extend_to
from .registry import resolve_mapping
from .search import FOUND, SearchProblem, search
from .tables import (BUILTIN_TABLES, ConstraintSet, TableError, builtin_constraints, builtin_table,
                     check_constraints, dump_table)
from .verify import (DEFAULT_MAX_PAIRS, MODE_ALIASES, Exhaustive, InfeasibleJobError, Sampled,
                     Stratified, VerificationJob, verify, verify_pa)


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _index_list(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_tables(args) -> int:
    if args.action == "list":
        for name in BUILTIN_TABLES:
            t = builtin_table(name)
            print(f"{name}\tn={t.n}\tk={t.k}\trows={len(t)}")
        return 0
    names = [args.name] if args.name else list(BUILTIN_TABLES)
    if args.action == "show":
        if not args.name:
            raise UsageError("tables show needs --name")
        with _output(args.output) as fh:
            dump_table(builtin_table(args.name), fh)
        return 0
    ok = True
    for name in names:
        t = builtin_table(name)
        if name == "F":
            print(f"F: loaded, {len(t)} rows")
            continue
        report = check_constraints(t, builtin_constraints(name))
        print(report)
        ok &= report.passed
    return 0 if ok else 1


def cmd_verify(args) -> int:
    mapping = resolve_mapping(args.mapping)
    if args.strategy == "exhaustive":
        strategy = Exhaustive()
    elif args.strategy == "sampled":
        strategy = Sampled(args.samples, args.seed)
    else:
        strategy = Stratified.even(args.samples, mapping.n, args.seed)
    job = VerificationJob(mapping, MODE_ALIASES[args.mode], strategy,
                          projection=_index_list(args.project) or None, max_pairs=args.max_pairs)
    report = verify(job, workers=args.workers)
    with _output(args.output) as fh:
        fh.write(report.to_text(timing=args.timing))
    print(f"wall_ms: {report.wall_ms:.1f}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_extend(args) -> int:
    base = resolve_mapping(args.base)
    if args.certify:
        cert = certify_base(base, MODE_ALIASES[args.certify])
        print(f"certified: m={cert.m} k={cert.k} mode={cert.mode} "
              f"excluded last symbols {sorted(cert.excluded_last_symbols)}", file=sys.stderr)
    g = extend_to(base, args.target_n)
    with _output(args.output) as fh:
        dump_table(g, fh)
    return 0


def cmd_compose(args) -> int:
    mapping = resolve_mapping(args.which)
    with _output(args.output) as fh:
        dump_table(mapping, fh)
    return 0


def cmd_search(args) -> int:
    if args.builtin:
        constraints = builtin_constraints(args.builtin)
    elif args.constraints:
        constraints = ConstraintSet.load(args.constraints)
    else:
        raise UsageError("search needs --builtin or --constraints")
    problem = SearchProblem(constraints.n, constraints.k, constraints, order=args.order,
                            candidate_order=args.candidate_order, budget=args.budget, seed=args.seed)
    result = search(problem)
    s = result.stats
    print(f"status: {result.status}; expansions {s.expansions}, backtracks {s.backtracks}, "
          f"deepest row {s.deepest_row}, {s.wall_time:.2f}s {result.note}".rstrip(), file=sys.stderr)
    if result.status != FOUND:
        return 1
    with _output(args.output) as fh:
        dump_table(result.table, fh)
    return 0


def cmd_pa(args) -> int:
    code = pa_mod.build_code(args.code)
    mapping = resolve_mapping(args.mapping)
    array = pa_mod.build_pa(code, mapping)
    target = args.distance
    if target is None:
        target = code.designed_distance + (1 if MODE_ALIASES[args.mode] == R_INCREASE else 0)
    report = verify_pa(array, target, workers=args.workers)
    array._min_distance = report.min_distance
    with _output(args.output) as fh:
        array.dump(fh)
    print(f"{len(array)} permutations in S_{array.n}; minimum distance {report.min_distance}; "
          f"required {target}: {report.verdict}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_bound(args) -> int:
    table = pa_mod.A3Table() if args.no_builtin else pa_mod.A3Table.builtin()
    for path in args.a3 or []:
        table.update(pa_mod.A3Table.load(path))
    result = pa_mod.bound(args.n, args.d, table)
    if not result.derivable:
        print(result)
        return 1
    print(result.value)
    print(f"clause {result.clause}): A_3({result.code_n},{result.code_d}) >= {result.value} "
          f"[{result.provenance}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="list, show or check the shipped tables")
    p.add_argument("action", choices=["list", "show", "check"])
    p.add_argument("--name")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("verify", help="check the distance property of a mapping")
    p.add_argument("--mapping", required=True)
    p.add_argument("--mode", choices=sorted(MODE_ALIASES), default="dpm")
    p.add_argument("--strategy", choices=["exhaustive", "sampled", "stratified"], default="exhaustive")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--project", help="comma-separated output positions removed before comparing")
    p.add_argument("--max-pairs", type=int, default=DEFAULT_MAX_PAIRS)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="embed wall time in the report")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extend", help="extend a mapping to a longer domain")
    p.add_argument("--base", required=True)
    p.add_argument("--target-n", type=int, required=True)
    p.add_argument("--certify", choices=sorted(MODE_ALIASES))
    p.add_argument("--output")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("compose", help="emit a composite mapping as a table")
    p.add_argument("--which", choices=["p91", "u", "v", "p130"], required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("search", help="backtracking search for a constrained table")
    p.add_argument("--builtin", help="use the built-in constraints of G, H, R, S, T, U or V")
    p.add_argument("--constraints", help="JSON constraint file")
    p.add_argument("--order", choices=["lex", "random", "dynamic"], default="dynamic")
    p.add_argument("--candidate-order", choices=["lex", "random"], default="lex")
    p.add_argument("--budget", type=int, default=10**8)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("pa", help="build and check a permutation array from a code")
    p.add_argument("--code", required=True, help="repetition:<n>, hamming:<r>, golay11 or file:<path>")
    p.add_argument("--mapping", required=True)
    p.add_argument("--mode", choices=sorted(MODE_ALIASES), default="dpm")
    p.add_argument("--distance", type=int)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=cmd_pa)

    p = sub.add_parser("bound", help="lower bound on P(n, d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a3", action="append", help="CSV of n,d,bound,provenance (repeatable)")
    p.add_argument("--no-builtin", action="store_true")
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleJobError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except IneligibleError as exc:
        print(f"ineligible: {exc}", file=sys.stderr)
        return 1
    except (UsageError, TableError, CompositionError, pa_mod.CodeError, ValueError, KeyError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
