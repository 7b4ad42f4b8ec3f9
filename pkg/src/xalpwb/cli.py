"""Command-line surface binding all modules for batch use and CI.

Exit codes are a stable contract: 0 success/agreement, 1 verification
disagreement, 2 usage or parse error, 3 oracle resource cap.  The default
oracle cap can be overridden with the XALPWB_CAP environment variable or
per-run flags.
"""

from __future__ import annotations

import argparse
import sys

from . import oracles, verify
from .corpus import CORPUS_BUDGET, load_corpus
from .formats import parse_instance, serialize_instance
from .instances import CapExceeded, ResourceBudget, XalpwbError
from .machines import EVALUATORS, run_with_tree_shape
from .reductions import REDUCTION_NAMES, REDUCTIONS, reduce_atm_to_tcmc

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_USAGE = 2
EXIT_CAP = 3

_SOLVE_FORMATS = {
    "tcmc": "tcmc",
    "tcmis": "tcmc",
    "cnf": "cnf",
    "listcol": "listcol",
    "is": "logtw",
    "vc": "logtw",
    "ds": "logtw",
    "rbds": "logtw",
}

# instance format consumed by each reduction's -i file
_REDUCE_INPUT = {
    "atm-tcmc": "machine",
    "tcmc-tcmis": "tcmc",
    "tcmis-listcol": "tcmc",
    "listcol-precol": "listcol",
    "tcmis-negcnf": "tcmc",
    "negcnf-poscnf": "cnf",
    "part-gencnf": "cnf",
    "poscnf-logtwis": "cnf",
    "is-vc": "logtw",
    "vc-rbds": "logtw",
    "rbds-ds": "logtw",
}


class UsageError(XalpwbError):
    pass


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def cmd_reduce(args) -> int:
    if args.name not in REDUCTION_NAMES:
        raise UsageError(f"unknown reduction {args.name!r}")
    text = _read(args.input)
    if args.name == "atm-tcmc":
        if args.blocks is None or args.beta is None or args.shape is None:
            raise UsageError("atm-tcmc needs --blocks, --beta and --shape")
        machine = parse_instance("machine", text)
        shape = parse_instance("tree", _read(args.shape))
        x = args.input_string or ""
        artifact = reduce_atm_to_tcmc(machine, x, shape, args.blocks, args.beta)
    else:
        instance = parse_instance(_REDUCE_INPUT[args.name], text)
        artifact = REDUCTIONS[args.name](instance)
    _write(args.output, serialize_instance(artifact.target))
    if args.lift:
        _write(args.lift, artifact.lift.serialize())
    if args.witness:
        if artifact.witness is None:
            raise UsageError(f"{args.name} emits no decomposition witness")
        _write(args.witness, serialize_instance(artifact.witness))
    print(f"k={artifact.parameter_in} k'={artifact.parameter_out} "
          f"bound={artifact.growth_bound}")
    return EXIT_OK


def _solution_lines(problem, solution) -> str:
    if isinstance(solution, dict):
        items = [f"{k}={v}" for k, v in sorted(solution.items())]
    else:
        items = [str(v) for v in sorted(solution)]
    return "sol " + " ".join(items) + "\n"


def cmd_solve(args) -> int:
    if args.problem not in _SOLVE_FORMATS:
        raise UsageError(f"unknown problem family {args.problem!r}")
    instance = parse_instance(_SOLVE_FORMATS[args.problem], _read(args.input))
    cap = args.cap
    if args.problem in ("tcmc", "tcmis"):
        mode = "independent-set" if (args.mode == "is" or args.problem == "tcmis") \
            else "clique"
        if args.solver == "traversal":
            ok = oracles.solve_tcmc_traversal(instance, mode, cap=cap)
            sol = None
        else:
            ok, sol = oracles.solve_tcmc_bruteforce(instance, mode, cap=cap)
    elif args.problem == "cnf":
        ok, sol = oracles.solve_cnf_bruteforce(instance, cap=cap)
    elif args.problem == "listcol":
        ok, sol = oracles.solve_listcoloring(instance, cap=cap)
    else:
        threshold = args.threshold
        if threshold is None:
            threshold = instance.target_weight
        if args.problem == "is" and args.solver == "treedp":
            ok, _best = oracles.solve_is_treedp(instance, cap=cap)
            sol = None
        elif args.problem == "ds" and args.solver == "treedp":
            ok, _best = oracles.solve_ds_treedp(instance, cap=cap)
            sol = None
        else:
            ok, sol = oracles.solve_is_ds_vc(instance.graph, args.problem,
                                             threshold, cap=cap)
    print("YES" if ok else "NO")
    if ok and sol is not None and args.output:
        _write(args.output, _solution_lines(args.problem, sol))
    return EXIT_OK


def cmd_verify(args) -> int:
    chosen = [bool(args.reduction), bool(args.chain), bool(args.machines)]
    if sum(chosen) != 1:
        raise UsageError("pick exactly one of --reduction, --chain, --machines")
    if not args.machines and args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.reduction:
        report = verify.verify_reduction(args.reduction, args.trials, args.seed,
                                         cap=args.cap)
    elif args.chain:
        chain = [nm.strip() for nm in args.chain.split(",") if nm.strip()]
        report = verify.verify_chain(chain, args.trials, args.seed, cap=args.cap)
    else:
        corpus = load_corpus(args.machines)
        budget = ResourceBudget(time_steps=args.budget_steps,
                                tree_size=args.budget_tree)
        report = verify.verify_machine_equivalences(corpus, budget,
                                                    max_len=args.max_input_len)
    text = report.serialize()
    if args.report:
        _write(args.report, text)
        for idx, (i, cex) in enumerate(report.disagreements):
            _write(f"{args.report}.cex{i}.txt", cex)
    else:
        sys.stdout.write(text)
    print(f"agreements={report.agreements} disagreements={len(report.disagreements)} "
          f"skips={len(report.skips)}")
    return EXIT_OK if report.ok else EXIT_DISAGREE


def cmd_machine(args) -> int:
    if args.action != "eval":
        raise UsageError("machine supports the 'eval' action")
    machine = parse_instance("machine", _read(args.machine))
    x = args.input_string or ""
    budget = ResourceBudget(time_steps=args.budget_steps,
                            tree_size=args.budget_tree,
                            stack_height_cap=args.budget_stack)
    if args.semantics == "shaped":
        if not args.shape:
            raise UsageError("shaped semantics needs --shape")
        shape = parse_instance("tree", _read(args.shape))
        accepted = run_with_tree_shape(machine, x, shape)
        print("ACCEPT" if accepted else "REJECT")
        return EXIT_OK
    if args.semantics not in EVALUATORS:
        raise UsageError(f"unknown semantics {args.semantics!r}")
    stats = EVALUATORS[args.semantics](machine, x, budget)
    verdict = "ACCEPT" if stats.accepted else "REJECT"
    print(f"{verdict} treeNodes={stats.tree_nodes} "
          f"coNondet={stats.max_co_nondet_on_path} "
          f"stack={stats.peak_stack_height} steps={stats.steps_used}"
          + (" exhausted" if stats.exhausted else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xalpwb",
        description="Workbench for tree-chained reductions and "
                    "resource-bounded machine semantics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="apply a registered reduction")
    p.add_argument("--name", required=True, choices=REDUCTION_NAMES)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lift")
    p.add_argument("--witness")
    p.add_argument("--beta", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--shape")
    p.add_argument("-x", "--input-string", default="")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="run an exact oracle")
    p.add_argument("--problem", required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--mode", choices=("clique", "is"), default="clique")
    p.add_argument("--threshold", type=int)
    p.add_argument("--solver", choices=("brute", "treedp", "traversal"),
                   default="brute")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="cross-validate reductions or machines")
    p.add_argument("--reduction")
    p.add_argument("--chain")
    p.add_argument("--machines")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int)
    p.add_argument("--report")
    p.add_argument("--budget-steps", type=int, default=CORPUS_BUDGET.time_steps)
    p.add_argument("--budget-tree", type=int, default=CORPUS_BUDGET.tree_size)
    p.add_argument("--max-input-len", type=int, default=6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("machine", help="evaluate a machine")
    p.add_argument("action", choices=("eval",))
    p.add_argument("--semantics", required=True,
                   choices=("stack", "alt", "balanced", "altstack",
                            "stackalt", "shaped"))
    p.add_argument("-m", "--machine", required=True)
    p.add_argument("-x", "--input-string", default="")
    p.add_argument("--shape")
    p.add_argument("--budget-steps", type=int, default=CORPUS_BUDGET.time_steps)
    p.add_argument("--budget-tree", type=int, default=CORPUS_BUDGET.tree_size)
    p.add_argument("--budget-stack", type=int)
    p.set_defaults(func=cmd_machine)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"oracle cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (XalpwbError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
