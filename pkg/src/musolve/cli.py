"""Command-line interface: step-by-step solving and single explanations.

Subcommands:

* ``solve``    -- produce a full explained trace (auto mode), drive a
                  manual-choice REPL, or run the benchmark suite.
* ``explain``  -- explain (or refute the deducibility of) one literal.
* ``serve``    -- run the HTTP API service.

Exit codes: 0 success, 1 usage/model errors, 2 argparse errors,
3 instance has no unique solution.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dsl, zoo
from . import encode as enc
from . import pipeline
from .mus import SearchConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NON_UNIQUE = 3


def _add_common(p):
    p.add_argument("--puzzle", help="bundled puzzle id (see `serve` catalog)")
    p.add_argument("--spec", help="path to a puzzle description file")
    p.add_argument("--instance",
                   help="bundled instance id (or bundled:N) with --puzzle; "
                        "path to an instance file with --spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positive-only", choices=["on", "off", "auto"],
                   default="auto",
                   help="explain assignments instead of eliminations "
                        "(auto = per-puzzle default)")
    p.add_argument("--max-mus-size", type=int, default=None,
                   help="stop deepening past this MUS size")
    p.add_argument("--attempts", type=int, default=10,
                   help="search tries per literal per size round")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--algorithm", choices=["chop", "basic"], default="chop")
    p.add_argument("--dump-gcnf", metavar="FILE",
                   help="write the grouped clause database and exit")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="musolve",
        description="Solve pen-and-paper puzzles with explained deductions")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="produce a full explained trace")
    _add_common(ps)
    ps.add_argument("--mode", choices=["auto", "manual", "force"],
                    default="auto")
    ps.add_argument("--force", metavar="CELL=VALUE",
                    help="with --mode force: deduction to explain")
    ps.add_argument("--out", help="write the trace JSON here (default stdout)")
    ps.add_argument("--bench", action="store_true",
                    help="run the benchmark suite and emit CSV")

    pe = sub.add_parser("explain", help="explain a single deduction")
    _add_common(pe)
    pe.add_argument("--force", required=True, metavar="CELL=VALUE",
                    help="deduction to explain, e.g. r4c7=5 or grid[4,7]=5")
    pe.add_argument("--out", help="write the step JSON here (default stdout)")

    pv = sub.add_parser("serve", help="run the HTTP API")
    pv.add_argument("--host", default="127.0.0.1")
    pv.add_argument("--port", type=int, default=8000)
    pv.add_argument("--workers", type=int, default=1,
                    help="search workers per job")
    return ap


def load_puzzle(args):
    """(puzzle, positive_only) from --puzzle/--spec/--instance flags."""
    if bool(args.puzzle) == bool(args.spec):
        raise SystemExit("exactly one of --puzzle or --spec is required")
    positive = args.positive_only
    if args.puzzle:
        entry = zoo.get_entry(args.puzzle)
        inst = args.instance or entry.instances[0].id
        if inst.startswith("bundled:"):
            inst = entry.instances[int(inst.split(":", 1)[1]) - 1].id
        puzzle = zoo.build(args.puzzle, inst)
        if positive == "auto":
            positive = "on" if entry.positive_only else "off"
    else:
        spec = dsl.parse_spec(open(args.spec).read())
        if not args.instance:
            raise SystemExit("--spec requires --instance FILE")
        inst = dsl.parse_instance(open(args.instance).read(), spec)
        puzzle = enc.encode(dsl.ground(spec, inst), verify=True)
        if positive == "auto":
            positive = "off"
    return puzzle, positive == "on"


def make_config(args):
    return SearchConfig(seed=args.seed, attempts=args.attempts,
                        max_size=args.max_mus_size, workers=args.workers,
                        algorithm=args.algorithm)


def dump_gcnf(puzzle, path):
    """Group-oriented DIMACS: every clause is tagged with the id of the
    constraint that produced it (0 = structural / always-on)."""
    acts = set(puzzle.activation_ids())
    lines = []
    groups = 0
    for clause in puzzle.clauses:
        guard = [(-lit) for lit in clause if -lit in acts]
        group = guard[0] if guard else 0
        groups = max(groups, group)
        body = [lit for lit in clause if -lit not in acts]
        lines.append("{%d} %s 0" % (group, " ".join(map(str, body))))
    with open(path, "w") as f:
        f.write("p gcnf %d %d %d\n" % (puzzle.num_vars, len(lines), groups))
        f.write("\n".join(lines) + "\n")


def _write(text, out):
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _interactive_chooser(options):
    print(f"\n{len(options)} tied explanations "
          "(smallest constraint count):", file=sys.stderr)
    for i, opt in enumerate(options, 1):
        deds = ", ".join(f"{d['var']} {'is' if d['kind'] == 'assign' else 'is not'} "
                         f"{d['value']}" for d in opt["deductions"])
        print(f"  [{i}] {deds}", file=sys.stderr)
        for line in opt["mus"]:
            print(f"      - {line}", file=sys.stderr)
    while True:
        sys.stderr.write("choice> ")
        sys.stderr.flush()
        raw = sys.stdin.readline()
        if not raw:
            return 0
        raw = raw.strip()
        if raw.isdigit() and 1 <= int(raw) <= len(options):
            return int(raw) - 1
        print(f"enter a number 1..{len(options)}", file=sys.stderr)


def cmd_solve(args):
    if args.bench:
        from . import bench
        sys.stdout.write(bench.run_benchmark_csv(make_config(args)))
        return EXIT_OK
    if args.mode == "force":
        if not args.force:
            raise SystemExit("--mode force requires --force CELL=VALUE")
        return cmd_explain(args)
    puzzle, positive = load_puzzle(args)
    if args.dump_gcnf:
        dump_gcnf(puzzle, args.dump_gcnf)
        return EXIT_OK
    config = make_config(args)
    chooser = _interactive_chooser if args.mode == "manual" else None
    trace = solve_with_chooser(puzzle, config, positive, chooser)
    _write(pipeline.trace_json(trace), args.out)
    return EXIT_OK


def solve_with_chooser(puzzle, config, positive_only, chooser=None,
                       on_step=None):
    """solve_puzzle with an optional manual-mode choice callback."""
    search = pipeline.make_search(puzzle, config)
    state = pipeline.SolveState(puzzle)
    steps = []
    try:
        while not state.solved():
            targets = pipeline.candidate_literals(state, positive_only)
            if not targets:
                break
            dictionary = search.find_global_mus(
                list(state.assumptions), list(targets))
            if not dictionary.muses:
                break   # nothing under the size cap: partial trace
            step = pipeline.build_step(search, state, dictionary, targets,
                                       chooser=chooser)
            for d in step.deductions:
                state.apply(d)
            steps.append(step)
            if on_step is not None:
                on_step(step, state)
    finally:
        search.close()
    return pipeline.make_trace(puzzle, config, positive_only, steps, state)


def parse_force(text, puzzle):
    """CELL=VALUE -> ((name, index), value).  Accepts r4c7=5 shorthand
    for single-grid puzzles and the explicit grid[4,7]=5 form."""
    cell_text, _, value_text = text.partition("=")
    if not value_text:
        raise SystemExit(f"--force wants CELL=VALUE, got {text!r}")
    value = int(value_text)
    cell_text = cell_text.strip()
    if "[" in cell_text:
        cell = pipeline.parse_cell_name(cell_text)
    else:
        import re
        m = re.fullmatch(r"r(\d+)c(\d+)", cell_text)
        if not m:
            raise SystemExit(f"unrecognized cell name {cell_text!r}")
        names = {c[0] for c in puzzle.var_cells()}
        if len(names) != 1:
            raise SystemExit("rNcM shorthand needs a single-grid puzzle; "
                             "use name[i,j]=v")
        cell = (names.pop(), (int(m.group(1)), int(m.group(2))))
    if cell not in set(puzzle.var_cells()):
        raise SystemExit(f"unknown cell {cell_text!r}")
    return cell, value


def cmd_explain(args):
    puzzle, positive = load_puzzle(args)
    if args.dump_gcnf:
        dump_gcnf(puzzle, args.dump_gcnf)
        return EXIT_OK
    cell, value = parse_force(args.force, puzzle)
    config = make_config(args)
    search = pipeline.make_search(puzzle, config)
    try:
        state = pipeline.SolveState(puzzle)
        step = pipeline.force_explain(search, state, cell, value,
                                      positive_only=positive)
    finally:
        search.close()
    if step is None:
        print(f"{args.force}: not deducible at this state "
              "(true or already-settled literals cannot be refuted)")
        return EXIT_OK
    payload = pipeline.make_trace(puzzle, config, positive, [step],
                                  pipeline.SolveState(puzzle))
    _write(json.dumps(payload["steps"][0], indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_serve(args):
    import uvicorn
    from .server import create_app
    uvicorn.run(create_app(search_workers=args.workers),
                host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "explain":
            return cmd_explain(args)
        return cmd_serve(args)
    except enc.NonUniqueError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_NON_UNIQUE
    except (dsl.DslError, KeyError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
