"""Randomized small-instance generators and the cross-validation harness
certifying every reduction and evaluator-equivalence claim.

Trials are deterministic in (name, profile, seed); disagreements carry a
replayable serialized counterexample, skips (oracle cap exhaustion) are
reported separately and a report only passes when skips stay at or below
20% of the trials.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import oracles
from .formats import parse_instance, serialize_instance
from .instances import (
    CapExceeded,
    Graph,
    InvariantViolation,
    ListColoringInstance,
    LogTwGraphInstance,
    OrderedTree,
    TcmcInstance,
    TreeChainedCnf,
    TreeDecomposition,
    ceil_log2,
    normalize_edge,
)
from .machines import (
    Action,
    MachineSpec,
    eval_alternating,
    eval_alternating_as_stack,
    eval_balanced,
    eval_stack,
    eval_stack_via_alternation,
    run_with_tree_shape,
    shaped_run,
)
from .reductions import (
    REDUCTION_NAMES,
    REDUCTIONS,
    ReductionArtifact,
    reduce_vc_to_rbds,
)

# (source family, target family) per reduction; chain composition checks
# adjacency on these
REDUCTION_TYPES = {
    "atm-tcmc": ("atm", "tcmc"),
    "tcmc-tcmis": ("tcmc", "tcmis"),
    "tcmis-listcol": ("tcmis", "listcol"),
    "listcol-precol": ("listcol", "listcol"),
    "tcmis-negcnf": ("tcmis", "negcnf"),
    "negcnf-poscnf": ("negcnf", "poscnf"),
    "part-gencnf": ("poscnf", "gencnf"),
    "poscnf-logtwis": ("poscnf", "logtw-is"),
    "is-vc": ("logtw-is", "logtw-vc"),
    "vc-rbds": ("logtw-vc", "logtw-rbds"),
    "rbds-ds": ("logtw-rbds", "logtw-ds"),
}

assert set(REDUCTION_TYPES) == set(REDUCTION_NAMES)

_PART_GENCNF_SOURCES = ("poscnf", "negcnf")

SKIP_BUDGET = 0.2  # reports fail past this fraction of skipped trials


@dataclass
class VerificationReport:
    """Aggregate outcome of a verification run; trials split into
    agreements, disagreements (with replayable counterexamples) and skips."""

    name: str
    seed: int
    trials: int
    agreements: int = 0
    disagreements: list[tuple[int, str]] = field(default_factory=list)
    skips: list[int] = field(default_factory=list)
    resource_notes: list[str] = field(default_factory=list)

    def finish(self):
        total = self.agreements + len(self.disagreements) + len(self.skips)
        if total != self.trials:
            raise InvariantViolation(
                f"report books do not balance: {total} outcomes for {self.trials} trials")
        return self

    @property
    def ok(self) -> bool:
        if self.disagreements:
            return False
        return len(self.skips) <= SKIP_BUDGET * max(self.trials, 1)

    def serialize(self) -> str:
        lines = [f"report {self.name} seed {self.seed} trials {self.trials}"]
        bad = {i for i, _ in self.disagreements}
        for i in range(self.trials):
            if i in bad:
                lines.append(f"trial {i} disagree counterexample-{i}")
            elif i in self.skips:
                lines.append(f"trial {i} skip")
            else:
                lines.append(f"trial {i} agree")
        for note in self.resource_notes:
            lines.append(f"note {note}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------- generators

_DEFAULT_PROFILES = {
    "graph": {"n": 6, "edge_prob": 0.35},
    "tcmc": {"tree_nodes": 3, "k": 2, "max_class": 2, "max_edges": 12},
    "tcmis": {"tree_nodes": 3, "k": 2, "max_class": 2, "max_edges": 12},
    "listcol": {"n": 5, "palette": 4, "edge_prob": 0.4},
    "negcnf": {"tree_nodes": 3, "k": 2, "max_cell": 2, "clauses": 5},
    "poscnf": {"tree_nodes": 2, "k": 2, "max_cell": 2, "clauses": 4},
    "logtw-is": {"tree_nodes": 3, "n": 7, "max_bag": 4},
    "logtw-vc": {"tree_nodes": 3, "n": 7, "max_bag": 4},
    "logtw-rbds": {"tree_nodes": 2, "n": 5, "max_bag": 3},
    "atm": {"states": 3, "shape_nodes": 4, "min_shape_nodes": 1,
            "input_len": 2, "blocks": 2, "beta": 1},
}


def _rng_for(family: str, profile: dict, seed: int) -> random.Random:
    key = f"{family}|{seed}|" + ",".join(f"{k}={profile[k]}" for k in sorted(profile))
    return random.Random(key)


def _random_binary_tree(rng: random.Random, nodes: int) -> OrderedTree:
    children: dict[int, list[int]] = {}
    open_slots = [1]
    for node in range(2, nodes + 1):
        parent = rng.choice(sorted(open_slots))
        children.setdefault(parent, []).append(node)
        if len(children[parent]) == 2:
            open_slots.remove(parent)
        open_slots.append(node)
    return OrderedTree(n=nodes, children={p: tuple(cs) for p, cs in children.items()})


def _generate_tcmc(rng: random.Random, profile: dict) -> TcmcInstance:
    nodes = rng.randint(1, profile["tree_nodes"])
    tree = _random_binary_tree(rng, nodes)
    k = profile["k"]
    boundary = rng.random()
    classes = {}
    nxt = 1
    for i in range(1, nodes + 1):
        for j in range(1, k + 1):
            size = 1 if boundary < 0.15 else rng.randint(1, profile["max_class"])
            classes[(i, j)] = frozenset(range(nxt, nxt + size))
            nxt += size
    n = nxt - 1
    skeleton = TcmcInstance(tree=tree, k=k, classes=classes, graph=Graph(n=n))
    pairs = []
    for a, b in skeleton.constrained_pairs():
        for u in sorted(classes[a]):
            for v in sorted(classes[b]):
                pairs.append((u, v))
    edges: set[tuple[int, int]] = set()
    if boundary < 0.3:
        prob = 0.0 if boundary < 0.22 else 1.0  # empty / saturated extremes
    else:
        prob = rng.uniform(0.15, 0.5)
    for u, v in pairs:
        if len(edges) >= profile["max_edges"]:
            break
        if rng.random() < prob:
            edges.add(normalize_edge(u, v))
    return TcmcInstance(tree=tree, k=k, classes=classes,
                        graph=Graph(n=n, edges=frozenset(edges)))


def _generate_listcol(rng: random.Random, profile: dict) -> ListColoringInstance:
    n = rng.randint(1, profile["n"])
    palette = frozenset(range(1, profile["palette"] + 1))
    edges = set()
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < profile["edge_prob"]:
                edges.add((u, v))
    lists = {}
    for v in range(1, n + 1):
        size = rng.randint(1, len(palette))
        lists[v] = frozenset(rng.sample(sorted(palette), size))
    return ListColoringInstance(graph=Graph(n=n, edges=frozenset(edges)),
                                palette=palette, lists=lists)


def _generate_cnf(rng: random.Random, profile: dict, variant: str) -> TreeChainedCnf:
    nodes = rng.randint(1, profile["tree_nodes"])
    tree = _random_binary_tree(rng, nodes)
    k = profile["k"]
    partition = {}
    variable_sets: dict[int, set[int]] = {i: set() for i in range(1, nodes + 1)}
    nxt = 1
    for i in range(1, nodes + 1):
        for j in range(1, k + 1):
            size = rng.randint(1, profile["max_cell"])
            cell = frozenset(range(nxt, nxt + size))
            partition[(i, j)] = cell
            variable_sets[i] |= cell
            nxt += size
    scopes = [(i, i) for i in range(1, nodes + 1)]
    scopes += [(p, c) for p, c in tree.edge_list()]
    clauses = []
    n_clauses = rng.randint(0, profile["clauses"])
    sign = -1 if variant == "negative-partitioned" else 1
    for _ in range(n_clauses):
        a, b = scopes[rng.randrange(len(scopes))]
        pool = sorted(variable_sets[a] | variable_sets[b])
        width = rng.randint(1, min(3, len(pool)))
        lits = tuple(sign * v for v in rng.sample(pool, width))
        clauses.append(lits)
    return TreeChainedCnf(
        tree=tree,
        variable_sets={i: frozenset(vs) for i, vs in variable_sets.items()},
        clauses=tuple(clauses), variant=variant, k=k, partition=partition)


def _generate_logtw(rng: random.Random, profile: dict, problem: str) -> LogTwGraphInstance:
    nodes = rng.randint(1, profile["tree_nodes"])
    tree = _random_binary_tree(rng, nodes)
    n = rng.randint(2, profile["n"])
    bags: dict[int, set[int]] = {i: set() for i in range(1, nodes + 1)}
    for v in range(1, n + 1):
        start = rng.randint(1, nodes)
        bags[start].add(v)
        frontier = [start]
        while frontier:
            i = frontier.pop()
            for c in tree.child_list(i):
                if len(bags[c]) < profile["max_bag"] and rng.random() < 0.4:
                    bags[c].add(v)
                    frontier.append(c)
    dec = TreeDecomposition(tree=tree,
                            bags={i: frozenset(b) for i, b in bags.items()})
    edges = set()
    for b in bags.values():
        for u in sorted(b):
            for v in sorted(b):
                if u < v and rng.random() < 0.45:
                    edges.add((u, v))
    graph = Graph(n=n, edges=frozenset(edges))
    width = max(dec.width(), 1)
    k = max(-(-width // ceil_log2(n)), 1)
    target = rng.randint(0, n)
    return LogTwGraphInstance(graph=graph, decomposition=dec,
                              target_weight=target, k=k, problem=problem)


def _generate_atm(rng: random.Random, profile: dict):
    """A small stack-free machine plus shape tree, input, and block layout.

    Half of the shapes are taken from an actual accepting computation tree
    of the machine (when one small enough exists), so accepting and
    rejecting shaped runs both occur regularly."""
    blocks, beta = profile["blocks"], profile["beta"]
    cells = blocks * beta
    n_exist = rng.randint(1, 2)
    states = [f"e{i}" for i in range(n_exist)] + ["u0", "acc"]
    mode = {f"e{i}": "exist" for i in range(n_exist)}
    mode["u0"] = "univ"
    mode["acc"] = "det"
    accepting = frozenset({"acc"})
    non_acc = [q for q in states if q != "acc"]
    in_syms = ["#", "0", "1"]
    work_syms = ["0", "1"]
    transitions: dict[tuple[str, str, str], tuple[Action, ...]] = {}
    for q in non_acc:
        for a in in_syms:
            for w in work_syms:
                if rng.random() < 0.35:
                    continue  # leave some read tuples stuck
                fanout = 2 if mode[q] == "univ" else rng.randint(1, 2)
                acts = []
                for _ in range(fanout):
                    # bias toward acceptance so shaped runs of both outcomes
                    # show up regularly
                    target = "acc" if rng.random() < 0.4 else rng.choice(states)
                    acts.append(Action(
                        state=target,
                        write=rng.choice(work_syms),
                        dw=rng.choice((-1, 0, 1)),
                        di=rng.choice((-1, 0, 1)),
                        stack_op=None))
                transitions[(q, a, w)] = tuple(acts)
    machine = MachineSpec(
        states=tuple(states), initial=states[0], accepting=accepting,
        mode=mode, work_cells=cells, work_alphabet=("0", "1"),
        transitions=transitions)
    x = "".join(rng.choice("01") for _ in range(rng.randint(0, profile["input_len"])))
    low = profile["min_shape_nodes"]
    shape = None
    if rng.random() < 0.5:
        shape = _accepting_run_shape(machine, x, profile["shape_nodes"])
        if shape is not None and shape.n < low:
            shape = None
    if shape is None:
        shape = _random_binary_tree(rng, rng.randint(low, profile["shape_nodes"]))
    return machine, x, shape, blocks, beta


def _accepting_run_shape(machine: MachineSpec, x: str, max_nodes: int):
    """Shape of the machine's smallest accepting computation tree, if it
    fits max_nodes."""
    from .machines import _build_min_tree, _explore_alternation, _min_tree_costs, initial_part

    try:
        succ, parents = _explore_alternation(machine, x)
    except CapExceeded:
        return None
    cost = _min_tree_costs(succ, parents)
    init = initial_part(machine, x)
    best = cost.get(init)
    if best is None or best > max_nodes:
        return None
    tree = _build_min_tree(succ, cost, init)
    children: dict[int, list[int]] = {}
    order = []
    queue = [(tree, None)]
    while queue:
        node, parent = queue.pop(0)
        order.append(node)
        idx = len(order)
        if parent is not None:
            children.setdefault(parent, []).append(idx)
        for kid in node.kids:
            queue.append((kid, idx))
    # renumber by BFS order; parent index recorded before children are seen
    return OrderedTree(n=len(order),
                       children={p: tuple(cs) for p, cs in children.items()})


def generate_instance(family: str, size_profile: dict | None = None, seed: int = 0):
    """Deterministic random instance of the family; profiles are merged over
    per-family defaults and biased toward boundary structures."""
    if family not in _DEFAULT_PROFILES:
        raise InvariantViolation(f"unknown generator family {family!r}")
    profile = dict(_DEFAULT_PROFILES[family])
    profile.update(size_profile or {})
    rng = _rng_for(family, profile, seed)
    if family == "graph":
        n = rng.randint(1, profile["n"])
        edges = {(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                 if rng.random() < profile["edge_prob"]}
        return Graph(n=n, edges=frozenset(edges))
    if family in ("tcmc", "tcmis"):
        return _generate_tcmc(rng, profile)
    if family == "listcol":
        return _generate_listcol(rng, profile)
    if family == "negcnf":
        return _generate_cnf(rng, profile, "negative-partitioned")
    if family == "poscnf":
        return _generate_cnf(rng, profile, "positive-partitioned")
    if family == "logtw-is":
        return _generate_logtw(rng, profile, "is")
    if family == "logtw-vc":
        return _generate_logtw(rng, profile, "vc")
    if family == "logtw-rbds":
        vc = _generate_logtw(rng, profile, "vc")
        return reduce_vc_to_rbds(vc).target
    if family == "atm":
        return _generate_atm(rng, profile)
    raise AssertionError(family)


# ------------------------------------------------------- family solvers


def _solve_family(family: str, instance, cap) -> bool:
    if family == "tcmc":
        return oracles.solve_tcmc_bruteforce(instance, "clique", cap=cap)[0]
    if family == "tcmis":
        return oracles.solve_tcmc_bruteforce(instance, "independent-set", cap=cap)[0]
    if family in ("negcnf", "poscnf", "gencnf"):
        return oracles.solve_cnf_bruteforce(instance, cap=cap)[0]
    if family == "listcol":
        return oracles.solve_listcoloring(instance, cap=cap)[0]
    if family == "logtw-is":
        return oracles.solve_is_treedp(instance, cap=cap)[0]
    if family in ("logtw-vc", "logtw-rbds", "logtw-ds"):
        problem = family.split("-")[1]
        try:
            return oracles.solve_is_ds_vc(instance.graph, problem,
                                          instance.target_weight, cap=cap)[0]
        except CapExceeded:
            # the decomposition-driven solvers scale past subset enumeration
            if problem == "ds":
                return oracles.solve_ds_treedp(instance, cap=cap)[0]
            if problem == "vc":
                _, best_is = oracles.solve_is_treedp(instance, cap=cap)
                return instance.graph.n - best_is <= instance.target_weight
            raise
    raise InvariantViolation(f"no oracle for family {family!r}")


def _family_solution(family: str, instance, cap):
    """(solvable, solution) for families whose lift maps get exercised."""
    if family == "tcmc":
        return oracles.solve_tcmc_bruteforce(instance, "clique", cap=cap)
    if family == "tcmis":
        return oracles.solve_tcmc_bruteforce(instance, "independent-set", cap=cap)
    if family in ("negcnf", "poscnf", "gencnf"):
        return oracles.solve_cnf_bruteforce(instance, cap=cap)
    if family == "listcol":
        return oracles.solve_listcoloring(instance, cap=cap)
    if family in ("logtw-is", "logtw-vc", "logtw-rbds", "logtw-ds"):
        problem = family.split("-")[1]
        return oracles.solve_is_ds_vc(instance.graph, problem,
                                      instance.target_weight, cap=cap)
    raise InvariantViolation(f"no oracle for family {family!r}")


def _check_family_solution(family: str, instance, solution) -> bool:
    if family == "tcmc":
        return oracles.check_tcmc_solution(instance, "clique", solution)
    if family == "tcmis":
        return oracles.check_tcmc_solution(instance, "independent-set", solution)
    if family in ("negcnf", "poscnf", "gencnf"):
        return oracles.check_cnf_solution(instance, frozenset(solution))
    if family == "listcol":
        return oracles.check_coloring(instance, solution)
    if family in ("logtw-is", "logtw-vc", "logtw-rbds", "logtw-ds"):
        problem = family.split("-")[1]
        s = frozenset(solution)
        if not oracles.check_subset_solution(instance.graph, problem, s):
            return False
        if problem == "is":
            return len(s) >= instance.target_weight
        return len(s) <= instance.target_weight
    raise InvariantViolation(f"no checker for family {family!r}")


# -------------------------------------------------------- counterexamples


_FORMAT_OF_FAMILY = {
    "tcmc": "tcmc",
    "tcmis": "tcmc",
    "listcol": "listcol",
    "negcnf": "cnf",
    "poscnf": "cnf",
    "gencnf": "cnf",
    "logtw-is": "logtw",
    "logtw-vc": "logtw",
    "logtw-rbds": "logtw",
    "logtw-ds": "logtw",
}


def serialize_counterexample(name: str, source) -> str:
    """Self-contained replayable record: the failing reduction (or chain)
    plus its serialized source instance."""
    lines = ["xalpwb 1", f"counterexample {name}"]
    first = name.split(",")[0].removeprefix("chain:")
    if first == "atm-tcmc":
        machine, x, shape, blocks, beta = source
        lines.append(f"atmparams {blocks} {beta} {x if x else '-'}")
        lines.append("section machine")
        lines.extend(serialize_instance(machine).splitlines()[1:])
        lines.append("section shape")
        lines.extend(serialize_instance(shape).splitlines()[1:])
    else:
        src_family = REDUCTION_TYPES[first][0]
        tag = _FORMAT_OF_FAMILY[src_family]
        lines.append(f"section instance {tag}")
        lines.extend(serialize_instance(source).splitlines()[1:])
    return "\n".join(lines) + "\n"


def parse_counterexample(text: str):
    """Returns (name, source object) parsed from a serialized
    counterexample; name is a reduction name or "chain:a,b,c"."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "xalpwb 1":
        raise InvariantViolation("counterexample must start with the header")
    head = lines[1].split()
    if len(head) != 2 or head[0] != "counterexample":
        raise InvariantViolation("missing 'counterexample <name>' record")
    name = head[1]
    first = name.split(",")[0].removeprefix("chain:")
    if first == "atm-tcmc":
        params = lines[2].split()
        blocks, beta = int(params[1]), int(params[2])
        x = "" if params[3] == "-" else params[3]
        m_start = lines.index("section machine") + 1
        s_start = lines.index("section shape")
        machine = parse_instance(
            "machine", "xalpwb 1\n" + "\n".join(lines[m_start:s_start]))
        shape = parse_instance(
            "tree", "xalpwb 1\n" + "\n".join(lines[s_start + 1:]))
        return name, (machine, x, shape, blocks, beta)
    section = lines[2].split()
    tag = section[2]
    instance = parse_instance(tag, "xalpwb 1\n" + "\n".join(lines[3:]))
    return name, instance


def replay_counterexample(text: str, cap: int | None = None) -> bool:
    """Re-run a serialized counterexample; True when the disagreement (or
    resource violation) reproduces."""
    name, source = parse_counterexample(text)
    if name.startswith("chain:"):
        chain = name.removeprefix("chain:").split(",")
        return run_chain_trial(chain, source, cap=cap).status == "disagree"
    return run_trial(name, source, cap=cap).status == "disagree"


# ------------------------------------------------------------- the trials


@dataclass
class TrialOutcome:
    status: str  # agree | disagree | skip
    detail: str = ""
    notes: list[str] = field(default_factory=list)


def _lookup_reduction(name: str):
    if name in REDUCTIONS:
        return name, REDUCTIONS[name]
    if name in FIXTURES:
        return name, FIXTURES[name]
    raise InvariantViolation(f"unknown reduction {name!r}")


def _apply(name: str, source) -> ReductionArtifact:
    base, fn = _lookup_reduction(name)
    if base == "atm-tcmc":
        machine, x, shape, blocks, beta = source
        return fn(machine, x, shape, blocks, beta)
    return fn(source)


def run_trial(name: str, source, cap: int | None = None) -> TrialOutcome:
    """One verification step on a given source: reduce, solve both sides
    with the oracles, compare, and check lifts, witnesses, and parameter
    growth."""
    base, _ = _lookup_reduction(name)
    src_family, tgt_family = REDUCTION_TYPES[base]
    notes: list[str] = []
    try:
        art = _apply(name, source)
        if base == "atm-tcmc":
            machine, x, shape, blocks, beta = source
            src_ok = run_with_tree_shape(machine, x, shape)
            try:
                tgt_ok, tgt_sol = oracles.solve_tcmc_bruteforce(
                    art.target, "clique", cap=cap)
            except CapExceeded:
                tgt_ok = oracles.solve_tcmc_traversal(art.target, "clique", cap=cap)
                tgt_sol = None
        else:
            src_ok = _solve_family(src_family, source, cap)
            tgt_ok = _solve_family(tgt_family, art.target, cap)
            tgt_sol = None
    except CapExceeded:
        return TrialOutcome("skip")
    if src_ok != tgt_ok:
        return TrialOutcome("disagree",
                            detail=f"source {src_ok} target {tgt_ok}")
    problems = _resource_checks(base, source, art, notes)
    if not problems and src_ok:
        problems = _lift_checks(base, source, art, tgt_sol, cap, notes)
    if problems:
        return TrialOutcome("disagree", detail="; ".join(problems), notes=notes)
    return TrialOutcome("agree", notes=notes)


def _resource_checks(base: str, source, art: ReductionArtifact,
                     notes: list[str]) -> list[str]:
    problems = []
    if art.witness is not None:
        graph = art.target.graph if hasattr(art.target, "graph") else None
        if graph is not None:
            check = oracles.validate_decomposition(graph, art.witness)
            if not check.ok:
                problems.append(f"witness invalid: {check.violation}")
            else:
                notes.append(f"witness-width {check.width}")
    if base == "tcmis-listcol":
        bound = 2 * art.parameter_in - 1
        width = art.witness.width()
        if width > bound:
            problems.append(f"witness width {width} > 2k-1 = {bound}")
        notes.append(f"listcol-width {width} bound {bound}")
    if base in ("vc-rbds", "rbds-ds"):
        before = source.decomposition.width()
        after = art.witness.width()
        if after > max(before, 2) + 1:
            problems.append(f"witness width {after} grew past {before}+1")
    if base == "poscnf-logtwis":
        n = art.target.graph.n
        width = art.witness.width()
        expect_k = -(-width // ceil_log2(n))
        if art.parameter_out != expect_k or art.target.k != expect_k:
            problems.append("declared k does not match recomputed width ratio")
        expect_w = _expected_logtw_weight(source)
        if art.target.target_weight != expect_w:
            problems.append(
                f"size target {art.target.target_weight} != {expect_w}")
    if base in ("tcmc-tcmis", "tcmis-negcnf", "negcnf-poscnf",
                "part-gencnf", "is-vc", "atm-tcmc"):
        if art.parameter_out != art.parameter_in:
            problems.append("parameter changed under a k'=k reduction")
    return problems


def _expected_logtw_weight(source: TreeChainedCnf) -> int:
    assert source.partition is not None
    total = 0
    lengths = []
    for key in sorted(source.partition):
        size = len(source.partition[key])
        total += max(size - 1, 0).bit_length()
        lengths.append(size + (size % 2))
    for clause in source.clauses:
        ell = len(clause)
        lengths.append(ell + (ell % 2))
    return total + sum(2 + ell for ell in lengths)


def _lift_checks(base: str, source, art: ReductionArtifact, tgt_sol,
                 cap, notes: list[str]) -> list[str]:
    problems = []
    src_family, tgt_family = REDUCTION_TYPES[base]
    try:
        if base == "atm-tcmc":
            machine, x, shape, blocks, beta = source
            run = shaped_run(machine, x, shape)
            forwarded = art.lift.forward(run)
            if not oracles.check_tcmc_solution(art.target, "clique", forwarded):
                problems.append("lifted run is not a tree-chained clique")
            if tgt_sol is not None:
                back = art.lift.backward(tgt_sol)
                again = art.lift.forward(back)
                if not oracles.check_tcmc_solution(art.target, "clique", again):
                    problems.append("decoded run does not re-encode validly")
            return problems
        src_ok, src_sol = _family_solution(src_family, source, cap)
        assert src_ok
        forwarded = art.lift.forward(src_sol)
        if not _check_family_solution(tgt_family, art.target, forwarded):
            problems.append("forward-lifted solution invalid on target")
        tgt_ok, tgt_sol2 = _family_solution(tgt_family, art.target, cap)
        assert tgt_ok
        back = art.lift.backward(tgt_sol2)
        if not _check_family_solution(src_family, source, back):
            problems.append("backward-lifted solution invalid on source")
    except CapExceeded:
        notes.append("lift check skipped (cap)")
    return problems


def verify_reduction(name: str, trials: int, seed: int,
                     cap: int | None = None,
                     profile: dict | None = None) -> VerificationReport:
    """Seeded trials of one registered reduction (or fault fixture): for
    each trial generate, reduce, solve both sides, compare, and check lift
    round-trips, witness bounds, and parameter growth."""
    base, _ = _lookup_reduction(name)
    src_family = REDUCTION_TYPES[base][0]
    report = VerificationReport(name=name, seed=seed, trials=trials)
    for t in range(trials):
        source = generate_instance(src_family, profile, seed=seed * 100003 + t)
        outcome = run_trial(name, source, cap=cap)
        if outcome.status == "agree":
            report.agreements += 1
        elif outcome.status == "skip":
            report.skips.append(t)
        else:
            cex = serialize_counterexample(name, source)
            report.disagreements.append((t, cex))
        report.resource_notes.extend(f"trial {t} {n}" for n in outcome.notes)
    return report.finish()


def check_chain(chain: list[str]) -> tuple[str, str]:
    """Validate adjacent type compatibility; returns the endpoint families."""
    if not chain:
        raise InvariantViolation("empty chain")
    for nm in chain:
        _lookup_reduction(nm)
    for left, right in zip(chain, chain[1:]):
        out_family = REDUCTION_TYPES[left][1]
        in_family = REDUCTION_TYPES[right][0]
        compatible = (out_family == in_family
                      or (right == "part-gencnf" and out_family in _PART_GENCNF_SOURCES))
        if not compatible:
            raise InvariantViolation(
                f"chain breaks between {left} ({out_family}) and {right} ({in_family})")
    return REDUCTION_TYPES[chain[0]][0], REDUCTION_TYPES[chain[-1]][1]


def run_chain_trial(chain: list[str], source, cap: int | None = None) -> TrialOutcome:
    src_family, end_family = check_chain(chain)
    try:
        current = source
        for nm in chain:
            try:
                current = _apply(nm, current).target
            except InvariantViolation as exc:
                # the intermediate instance left this stage's domain (e.g. an
                # unsolvable empty class reaching a partition-based stage)
                return TrialOutcome("skip", detail=str(exc))
        if chain[0] == "atm-tcmc":
            machine, x, shape, blocks, beta = source
            src_ok = run_with_tree_shape(machine, x, shape)
        else:
            src_ok = _solve_family(src_family, source, cap)
        tgt_ok = _solve_family(end_family, current, cap)
    except CapExceeded:
        return TrialOutcome("skip")
    if src_ok != tgt_ok:
        return TrialOutcome("disagree", detail=f"source {src_ok} end {tgt_ok}")
    return TrialOutcome("agree")


def verify_chain(chain: list[str], trials: int, seed: int,
                 cap: int | None = None,
                 profile: dict | None = None) -> VerificationReport:
    """End-to-end solvability preservation across a composed chain, checked
    at the two endpoints per trial."""
    src_family, _ = check_chain(chain)
    name = "chain:" + ",".join(chain)
    report = VerificationReport(name=name, seed=seed, trials=trials)
    for t in range(trials):
        source = generate_instance(src_family, profile, seed=seed * 100003 + t)
        outcome = run_chain_trial(chain, source, cap=cap)
        if outcome.status == "agree":
            report.agreements += 1
        elif outcome.status == "skip":
            report.skips.append(t)
        else:
            report.disagreements.append((t, serialize_counterexample(name, source)))
    return report.finish()


def verify_machine_equivalences(corpus: dict[str, MachineSpec],
                                budget, max_len: int = 6,
                                ratio_c: int = 8) -> VerificationReport:
    """Acceptance agreement of all applicable evaluators per corpus machine
    and input, plus the tree-size ratio and co-nondeterministic depth
    assertions."""
    from .corpus import corpus_inputs

    report = VerificationReport(name="machine-equivalences", seed=0, trials=0)
    co_bound = 2 * math.log2(budget.tree_size) + 4
    for name in sorted(corpus):
        m = corpus[name]
        has_univ = any(m.mode[q] == "univ" for q in m.states)
        for x in corpus_inputs(m, max_len):
            report.trials += 1
            verdicts = {}
            problems = []
            if not has_univ:
                st = eval_stack(m, x, budget)
                via = eval_stack_via_alternation(m, x, budget)
                verdicts["stack"] = st.accepted
                verdicts["stackalt"] = via.accepted
                if st.accepted and via.tree_nodes > ratio_c * st.steps_used + ratio_c:
                    problems.append(
                        f"tree size {via.tree_nodes} > {ratio_c}*steps+{ratio_c}")
            if not m.uses_stack:
                alt = eval_alternating(m, x, budget)
                bal = eval_balanced(m, x, budget)
                als = eval_alternating_as_stack(m, x, budget)
                verdicts["alt"] = alt.accepted
                verdicts["balanced"] = bal.accepted
                verdicts["altstack"] = als.accepted
                if bal.accepted and bal.max_co_nondet_on_path > co_bound:
                    problems.append(
                        f"co-nondet {bal.max_co_nondet_on_path} > {co_bound:.2f}")
            if len(set(verdicts.values())) > 1:
                problems.append(f"evaluators disagree: {verdicts}")
            if problems:
                report.disagreements.append(
                    (report.trials - 1, f"# machine {name} input {x!r}\n" + "\n".join(problems)))
            else:
                report.agreements += 1
    return report.finish()


# ------------------------------------------------------- fault injection


def _faulty_negcnf_poscnf(instance: TreeChainedCnf) -> ReductionArtifact:
    """Deliberately broken variant of negcnf-poscnf for harness validation:
    the replacement disjunction wrongly keeps the replaced variable, so
    every transformed clause becomes satisfiable under exactly-one."""
    from .reductions import LiftMap

    if instance.variant != "negative-partitioned":
        raise InvariantViolation("fixture needs a negative-partitioned instance")
    assert instance.partition is not None
    cell_of = {}
    for key, cell in instance.partition.items():
        for v in cell:
            cell_of[v] = key
    clauses = []
    for clause in instance.clauses:
        out = []
        for lit in clause:
            out.extend(sorted(instance.partition[cell_of[-lit]]))
        clauses.append(tuple(out))
    target = TreeChainedCnf(
        tree=instance.tree, variable_sets=dict(instance.variable_sets),
        clauses=tuple(clauses), variant="positive-partitioned", k=instance.k,
        partition=dict(instance.partition), var_names=dict(instance.var_names))
    identity = lambda sol: frozenset(sol)
    return ReductionArtifact(
        name="negcnf-poscnf!faulty", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=(), forward=identity, backward=identity))


FIXTURES = {
    "negcnf-poscnf!faulty": _faulty_negcnf_poscnf,
}

REDUCTION_TYPES["negcnf-poscnf!faulty"] = REDUCTION_TYPES["negcnf-poscnf"]
