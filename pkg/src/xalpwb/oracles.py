"""Ground-truth solvers: exhaustive deciders for every problem family plus
the tree-traversal and tree-DP membership-style solvers used to cross-check
them.

Every solver enforces its size cap before doing any work and raises
CapExceeded past it.  Solutions returned always satisfy the instance's own
constraints; callers can re-validate with the check_* helpers.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from .instances import (
    CapExceeded,
    Graph,
    InvariantViolation,
    ListColoringInstance,
    LogTwGraphInstance,
    TcmcInstance,
    TreeChainedCnf,
    TreeDecomposition,
    validate_decomposition,
)

DEFAULT_CAP = 1 << 20

TCMC_MODES = ("clique", "independent-set")


def resolve_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("XALPWB_CAP")
    if env:
        return int(env)
    return DEFAULT_CAP


def _guard(size: int, cap: int | None, what: str):
    cap = resolve_cap(cap)
    if size > cap:
        raise CapExceeded(f"instance too large for oracle: {what} {size} > cap {cap}")


# ------------------------------------------------------------------ tcmc


def _pair_ok(graph: Graph, u: int, v: int, mode: str) -> bool:
    adjacent = graph.has_edge(u, v)
    return adjacent if mode == "clique" else not adjacent


def check_tcmc_solution(instance: TcmcInstance, mode: str,
                        choice: dict[tuple[int, int], int]) -> bool:
    """choice maps every (node, color) class to its picked vertex."""
    if set(choice) != set(instance.classes):
        return False
    for key, v in choice.items():
        if v not in instance.classes[key]:
            return False
    for a, b in instance.constrained_pairs():
        if not _pair_ok(instance.graph, choice[a], choice[b], mode):
            return False
    return True


def solve_tcmc_bruteforce(instance: TcmcInstance, mode: str = "clique",
                          cap: int | None = None):
    """Exact decision by enumerating one vertex per class; backtracks over
    classes in tree order so constraints prune early.  Returns
    (solvable, choice or None)."""
    if mode not in TCMC_MODES:
        raise InvariantViolation(f"unknown tcmc mode {mode!r}")
    keys = [(i, j) for i in instance.tree.preorder()
            for j in range(1, instance.k + 1)]
    space = 1
    for key in keys:
        space *= max(len(instance.classes[key]), 1)
    _guard(space, cap, "class choice space")
    if any(not instance.classes[key] for key in keys):
        return False, None
    index = {key: pos for pos, key in enumerate(keys)}
    earlier: dict[tuple[int, int], list[tuple[int, int]]] = {key: [] for key in keys}
    for a, b in instance.constrained_pairs():
        if index[a] > index[b]:
            a, b = b, a
        earlier[b].append(a)
    choice: dict[tuple[int, int], int] = {}

    def backtrack(pos: int) -> bool:
        if pos == len(keys):
            return True
        key = keys[pos]
        for v in sorted(instance.classes[key]):
            if all(_pair_ok(instance.graph, choice[a], v, mode) for a in earlier[key]):
                choice[key] = v
                if backtrack(pos + 1):
                    return True
                del choice[key]
        return False

    if backtrack(0):
        return True, dict(choice)
    return False, None


def solve_tcmc_traversal(instance: TcmcInstance, mode: str = "clique",
                         cap: int | None = None) -> bool:
    """Exact decision by depth-first traversal of the structure tree keeping
    only the parent's selection, the deterministic realization of the
    membership traversal."""
    if mode not in TCMC_MODES:
        raise InvariantViolation(f"unknown tcmc mode {mode!r}")
    ks = range(1, instance.k + 1)
    per_node = {}
    for i in instance.tree.nodes():
        space = 1
        for j in ks:
            space *= max(len(instance.classes[(i, j)]), 1)
        per_node[i] = space
        _guard(space, cap, f"per-node choice space at {i}")

    def selections(i: int):
        pools = [sorted(instance.classes[(i, j)]) for j in ks]
        for combo in itertools.product(*pools):
            good = True
            for j1 in range(instance.k):
                for j2 in range(j1 + 1, instance.k):
                    if not _pair_ok(instance.graph, combo[j1], combo[j2], mode):
                        good = False
                        break
                if not good:
                    break
            if good:
                yield combo

    memo: dict[tuple[int, tuple[int, ...] | None], bool] = {}

    def down(i: int, parent_sel: tuple[int, ...] | None) -> bool:
        key = (i, parent_sel)
        if key in memo:
            return memo[key]
        res = False
        for sel in selections(i):
            if parent_sel is not None:
                good = all(
                    _pair_ok(instance.graph, pv, cv, mode)
                    for pv in parent_sel for cv in sel)
                if not good:
                    continue
            if all(down(c, sel) for c in instance.tree.child_list(i)):
                res = True
                break
        memo[key] = res
        return res

    return down(instance.tree.root, None)


# ------------------------------------------------------------------- cnf


def clause_satisfied(clause: tuple[int, ...], true_vars: frozenset[int]) -> bool:
    return any((lit > 0 and lit in true_vars) or (lit < 0 and -lit not in true_vars)
               for lit in clause)


def check_cnf_solution(instance: TreeChainedCnf, true_vars: frozenset[int]) -> bool:
    if instance.variant == "general":
        for i in instance.tree.nodes():
            if len(true_vars & instance.variable_sets[i]) > instance.k:
                return False
    else:
        assert instance.partition is not None
        for cell in instance.partition.values():
            if len(true_vars & cell) != 1:
                return False
    return all(clause_satisfied(c, true_vars) for c in instance.clauses)


def solve_cnf_bruteforce(instance: TreeChainedCnf, cap: int | None = None):
    """Exact decision honoring the variant's cardinality constraint.
    Returns (satisfiable, frozenset of true variables or None)."""
    if instance.variant == "general":
        groups = []
        space = 1
        for i in sorted(instance.variable_sets):
            xs = sorted(instance.variable_sets[i])
            opts = []
            for r in range(0, min(instance.k, len(xs)) + 1):
                opts.extend(itertools.combinations(xs, r))
            groups.append(opts)
            space *= max(len(opts), 1)
        _guard(space, cap, "assignment space")
        for combo in itertools.product(*groups):
            true_vars = frozenset(v for part in combo for v in part)
            if all(clause_satisfied(c, true_vars) for c in instance.clauses):
                return True, true_vars
        return False, None
    assert instance.partition is not None
    cells = sorted(instance.partition)
    space = 1
    for cell in cells:
        space *= max(len(instance.partition[cell]), 1)
    _guard(space, cap, "assignment space")
    pools = [sorted(instance.partition[cell]) for cell in cells]
    for combo in itertools.product(*pools):
        true_vars = frozenset(combo)
        if all(clause_satisfied(c, true_vars) for c in instance.clauses):
            return True, true_vars
    return False, None


# --------------------------------------------------------------- listcol


def check_coloring(instance: ListColoringInstance, coloring: dict[int, int]) -> bool:
    if set(coloring) != set(instance.graph.vertices()):
        return False
    for v, c in coloring.items():
        if c not in instance.effective_list(v):
            return False
    return all(coloring[u] != coloring[v] for u, v in instance.graph.edges)


def solve_listcoloring(instance: ListColoringInstance, cap: int | None = None):
    """Exact backtracking decision; honors precolorings.
    Returns (colorable, coloring or None).

    Precolored vertices are assigned first (they never branch), so the cap
    is the product over free vertices of the colors that survive their
    precolored neighborhood."""
    adj = instance.graph.adjacency()
    forced = sorted(instance.precolored)
    free = sorted(v for v in instance.graph.vertices() if v not in instance.precolored)
    options: dict[int, list[int]] = {}
    space = 1
    for v in free:
        avail = sorted(
            c for c in instance.effective_list(v)
            if all(instance.precolored.get(u) != c for u in adj[v]))
        options[v] = avail
        space *= max(len(avail), 1)
    _guard(space, cap, "coloring space")
    coloring: dict[int, int] = {v: instance.precolored[v] for v in forced}
    for u, w in instance.graph.edges:
        if u in coloring and w in coloring and coloring[u] == coloring[w]:
            return False, None

    def backtrack(pos: int) -> bool:
        if pos == len(free):
            return True
        v = free[pos]
        for c in options[v]:
            if all(coloring.get(u) != c for u in adj[v]):
                coloring[v] = c
                if backtrack(pos + 1):
                    return True
                del coloring[v]
        return False

    if backtrack(0):
        return True, dict(coloring)
    return False, None


# ------------------------------------------------- subset-style problems


def _dominates(adj: dict[int, set[int]], chosen: frozenset[int], v: int) -> bool:
    return v in chosen or bool(adj[v] & chosen)


def is_independent_set(graph: Graph, s: frozenset[int]) -> bool:
    return all(not graph.has_edge(u, v) for u in s for v in s if u < v)


def is_vertex_cover(graph: Graph, s: frozenset[int]) -> bool:
    return all(u in s or v in s for u, v in graph.edges)


def check_subset_solution(graph: Graph, problem: str, s: frozenset[int]) -> bool:
    adj = graph.adjacency()
    if problem == "is":
        return is_independent_set(graph, s)
    if problem == "vc":
        return is_vertex_cover(graph, s)
    if problem == "ds":
        return all(_dominates(adj, s, v) for v in graph.vertices())
    if problem == "rbds":
        blue = {v for v in graph.vertices() if graph.labels.get(v) == "blue"}
        red = {v for v in graph.vertices() if graph.labels.get(v) == "red"}
        return s <= frozenset(blue) and all(_dominates(adj, s, v) for v in red)
    raise InvariantViolation(f"unknown subset problem {problem!r}")


def solve_is_ds_vc(graph: Graph, problem: str, threshold: int,
                   cap: int | None = None):
    """Exact threshold decision by subset enumeration.  For "is" the
    threshold is a lower bound on the size, for the covering problems an
    upper bound.  Returns (decision, witness set or None)."""
    best_size, best = optimum_subset(graph, problem, cap=cap)
    if problem == "is":
        ok = best_size >= threshold
    else:
        ok = best_size <= threshold
    return (ok, best if ok else None)


def optimum_subset(graph: Graph, problem: str, cap: int | None = None):
    """Optimal size and one witness: max IS, min VC, min DS, or min RBDS.

    For rbds only blue subsets are enumerated; min DS / min RBDS are
    infinity (None witness) when no feasible set exists.
    """
    if problem == "rbds":
        ground = sorted(v for v in graph.vertices()
                        if graph.labels.get(v) == "blue")
    else:
        ground = sorted(graph.vertices())
    _guard(1 << len(ground), cap, "subset space")
    adj = graph.adjacency()
    best = None
    best_size = None
    for mask in range(1 << len(ground)):
        s = frozenset(ground[i] for i in range(len(ground)) if mask >> i & 1)
        if not check_subset_solution(graph, problem, s):
            continue
        if problem == "is":
            better = best_size is None or len(s) > best_size
        else:
            better = best_size is None or len(s) < best_size
        if better:
            best_size = len(s)
            best = s
    if best_size is None:
        # max IS always exists (the empty set is independent); the covering
        # problems may be infeasible only through labels, report as infinity
        best_size = float("inf")
    return best_size, best


# ------------------------------------------------------- tree-DP solver


@dataclass(frozen=True)
class _NiceNode:
    kind: str  # "leaf" | "introduce" | "forget" | "join"
    bag: frozenset[int]
    vertex: int | None = None
    kids: tuple = ()


def _nice_decomposition(dec: TreeDecomposition) -> _NiceNode:
    """Convert a decomposition into leaf/introduce/forget/join form with the
    same width; the returned root has an empty bag."""

    def chain(lower: frozenset[int], upper: frozenset[int], node: _NiceNode) -> _NiceNode:
        # forget what the lower bag has extra, then introduce what is missing
        cur = node
        bag = lower
        for v in sorted(lower - upper):
            bag = bag - {v}
            cur = _NiceNode("forget", bag, vertex=v, kids=(cur,))
        for v in sorted(upper - bag):
            bag = bag | {v}
            cur = _NiceNode("introduce", bag, vertex=v, kids=(cur,))
        return cur

    def build(i: int) -> _NiceNode:
        bag = dec.bags[i]
        kids = dec.tree.child_list(i)
        if not kids:
            cur: _NiceNode | None = None
        else:
            branches = [chain(dec.bags[c], bag, build(c)) for c in kids]
            cur = branches[0]
            for nxt in branches[1:]:
                cur = _NiceNode("join", bag, kids=(cur, nxt))
        if cur is None:
            base = _NiceNode("leaf", frozenset())
            return chain(frozenset(), bag, base)
        return cur

    root = build(dec.tree.root)
    return chain(dec.bags[dec.tree.root], frozenset(), root)


def solve_is_treedp(instance: LogTwGraphInstance, cap: int | None = None):
    """Maximum independent set by dynamic programming over the instance's
    own decomposition (converted internally to introduce/forget/join form).
    Returns (decision vs target_weight, optimum size)."""
    check = validate_decomposition(instance.graph, instance.decomposition)
    if not check.ok:
        raise InvariantViolation(f"invalid decomposition: {check.violation}")
    max_bag = max(len(b) for b in instance.decomposition.bags.values())
    _guard(1 << max_bag, cap, "bag mask space")
    graph = instance.graph

    def table(node: _NiceNode) -> dict[frozenset[int], int]:
        if node.kind == "leaf":
            return {frozenset(): 0}
        if node.kind == "introduce":
            sub = table(node.kids[0])
            v = node.vertex
            out: dict[frozenset[int], int] = {}
            for mask, val in sub.items():
                out[mask] = max(out.get(mask, -1), val)
                if all(not graph.has_edge(v, u) for u in mask):
                    grown = mask | {v}
                    out[grown] = max(out.get(grown, -1), val + 1)
            return out
        if node.kind == "forget":
            sub = table(node.kids[0])
            v = node.vertex
            out = {}
            for mask, val in sub.items():
                kept = mask - {v}
                out[kept] = max(out.get(kept, -1), val)
            return out
        left = table(node.kids[0])
        right = table(node.kids[1])
        out = {}
        for mask, lval in left.items():
            rval = right.get(mask)
            if rval is not None:
                out[mask] = lval + rval - len(mask)
        return out

    root = _nice_decomposition(instance.decomposition)
    best = table(root)[frozenset()]
    return best >= instance.target_weight, best


def solve_ds_treedp(instance: LogTwGraphInstance, cap: int | None = None):
    """Minimum dominating set by the standard 3-state dynamic program over
    the instance's decomposition: each bag vertex is in the set, dominated,
    or not yet dominated.  Returns (decision vs target_weight, optimum).

    A vertex may only be forgotten once it is in the set or dominated; join
    nodes merge tables bucketed by their in-set so the combination stays
    polynomial in the table sizes."""
    check = validate_decomposition(instance.graph, instance.decomposition)
    if not check.ok:
        raise InvariantViolation(f"invalid decomposition: {check.violation}")
    max_bag = max(len(b) for b in instance.decomposition.bags.values())
    _guard(3 ** max_bag, cap, "bag state space")
    graph = instance.graph
    IN, DOM, UNDOM = 0, 1, 2
    INF = float("inf")

    def table(node: _NiceNode) -> dict[tuple, int]:
        # keys are tuples of (vertex, state) sorted by vertex
        if node.kind == "leaf":
            return {(): 0}
        if node.kind == "introduce":
            sub = table(node.kids[0])
            v = node.vertex
            nbrs = {u for u in node.bag if u != v and graph.has_edge(u, v)}
            out: dict[tuple, int] = {}

            def put(key, val):
                if val < out.get(key, INF):
                    out[key] = val

            for key, val in sub.items():
                states = dict(key)
                # v joins the set: undominated bag neighbors become dominated
                relabeled = {u: (DOM if u in nbrs and s == UNDOM else s)
                             for u, s in states.items()}
                put(tuple(sorted({**relabeled, v: IN}.items())), val + 1)
                # v dominated now: needs an in-set bag neighbor
                if any(states[u] == IN for u in nbrs):
                    put(tuple(sorted({**states, v: DOM}.items())), val)
                put(tuple(sorted({**states, v: UNDOM}.items())), val)
            return out
        if node.kind == "forget":
            sub = table(node.kids[0])
            v = node.vertex
            out = {}
            for key, val in sub.items():
                states = dict(key)
                if states[v] == UNDOM:
                    continue  # all neighbors are processed: v stays undominated
                del states[v]
                kept = tuple(sorted(states.items()))
                if val < out.get(kept, INF):
                    out[kept] = val
            return out
        left = table(node.kids[0])
        right = table(node.kids[1])
        buckets: dict[frozenset[int], list[tuple[tuple, int]]] = {}
        for key, val in right.items():
            in_set = frozenset(u for u, s in key if s == IN)
            buckets.setdefault(in_set, []).append((key, val))
        out = {}
        for key1, val1 in left.items():
            states1 = dict(key1)
            in_set = frozenset(u for u, s in states1.items() if s == IN)
            for key2, val2 in buckets.get(in_set, ()):
                states2 = dict(key2)
                merged = {}
                for u, s1 in states1.items():
                    s2 = states2[u]
                    if s1 == IN:
                        merged[u] = IN
                    else:
                        merged[u] = DOM if DOM in (s1, s2) else UNDOM
                key = tuple(sorted(merged.items()))
                val = val1 + val2 - len(in_set)
                if val < out.get(key, INF):
                    out[key] = val
        return out

    root = _nice_decomposition(instance.decomposition)
    final = table(root)
    best = final.get((), INF)
    return best <= instance.target_weight, best
