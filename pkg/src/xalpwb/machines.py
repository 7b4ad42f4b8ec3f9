"""Resource-annotated machine descriptions and the four acceptance semantics.

A machine reads a fixed input tape (positions 0..len+1, with the boundary
marker '#' at both ends, head starting at position 1) and a bounded work
tape (cells 1..work_cells, initially blank, head starting at cell 1).
Stack-free machines may alternate (existential and universal states);
machines that use the stack are nondeterministic only, and acceptance for
them means reaching an accepting state with an empty stack, which halts the
run.  For stack-free machines reaching an accepting state halts the branch.

The four evaluators decide acceptance of the same machines through the four
equivalent resource-bounded views: direct stack search, minimal computation
tree, advice-rebalanced computation tree, and depth-first stack replay.
All evaluators are pure and deterministic: guessing is realized by
exhaustive enumeration in a fixed order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import NamedTuple

from .instances import (
    CapExceeded,
    InvariantViolation,
    OrderedTree,
    ResourceBudget,
    XalpwbError,
)

BOUNDARY = "#"

MODES = ("det", "exist", "univ")

# hard guard on exhaustive exploration of a machine's configuration space
MAX_CONFIGS = 1 << 17


class SemanticsMismatch(XalpwbError):
    """The requested evaluator does not apply to this machine."""


class Action(NamedTuple):
    state: str
    write: str
    dw: int
    di: int
    stack_op: tuple[str, str] | None  # ("push"|"pop", symbol) or None


@dataclass(frozen=True)
class Configuration:
    """One machine snapshot; stack contents are deliberately excluded, only
    the height is carried."""

    state: str
    input_head: int
    work_tape: tuple[str, ...]
    work_head: int
    steps_remaining: int | None = None
    stack_height: int = 0

    def __post_init__(self):
        if self.input_head < 0:
            raise InvariantViolation("input head out of range")
        if not 1 <= self.work_head <= len(self.work_tape):
            raise InvariantViolation("work head out of range")
        if self.steps_remaining is not None and self.steps_remaining < 0:
            raise InvariantViolation("negative step counter")
        if self.stack_height < 0:
            raise InvariantViolation("negative stack height")


# bare machine part used as search key: (state, input_head, work_tape, work_head)
Part = tuple[str, int, tuple[str, ...], int]


@dataclass(frozen=True)
class MachineSpec:
    """States, modes, work tape and guarded transition table of a machine."""

    states: tuple[str, ...]
    initial: str
    accepting: frozenset[str]
    mode: dict[str, str]
    work_cells: int
    work_alphabet: tuple[str, ...]  # first symbol is the blank
    transitions: dict[tuple[str, str, str], tuple[Action, ...]]

    def __post_init__(self):
        if len(set(self.states)) != len(self.states) or not self.states:
            raise InvariantViolation("states must be nonempty and distinct")
        known = set(self.states)
        if self.initial not in known:
            raise InvariantViolation(f"unknown initial state {self.initial!r}")
        if not frozenset(self.accepting) <= known:
            raise InvariantViolation("accepting set contains unknown states")
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        for q in self.states:
            if self.mode.get(q) not in MODES:
                raise InvariantViolation(f"state {q!r} needs a mode in {MODES}")
        if self.work_cells < 1:
            raise InvariantViolation("work tape needs at least one cell")
        if not self.work_alphabet or len(set(self.work_alphabet)) != len(self.work_alphabet):
            raise InvariantViolation("work alphabet must be nonempty and distinct")
        work = set(self.work_alphabet)
        any_stack = False
        for key, acts in self.transitions.items():
            q, a, w = key
            if q not in known:
                raise InvariantViolation(f"transition from unknown state {q!r}")
            if w not in work:
                raise InvariantViolation(f"transition reads unknown work symbol {w!r}")
            if len(a) != 1:
                raise InvariantViolation(f"input symbol {a!r} must be one character")
            if not acts:
                raise InvariantViolation(f"empty action set for {key}")
            if self.mode[q] == "det" and len(acts) != 1:
                raise InvariantViolation(
                    f"deterministic state {q!r} has {len(acts)} actions for {key}")
            if self.mode[q] == "univ" and len(acts) != 2:
                raise InvariantViolation(
                    f"universal state {q!r} must branch binarily, has {len(acts)} for {key}")
            for act in acts:
                if act.state not in known:
                    raise InvariantViolation(f"transition to unknown state {act.state!r}")
                if act.write not in work:
                    raise InvariantViolation(f"transition writes unknown symbol {act.write!r}")
                if act.dw not in (-1, 0, 1) or act.di not in (-1, 0, 1):
                    raise InvariantViolation("head moves must be in {-1,0,+1}")
                if act.stack_op is not None:
                    any_stack = True
                    kind, sym = act.stack_op
                    if kind not in ("push", "pop"):
                        raise InvariantViolation(f"unknown stack op {kind!r}")
                    if kind == "pop" and self.mode[q] != "det":
                        raise InvariantViolation(
                            f"pop in non-deterministic state {q!r}: pops must be deterministic steps")
        if any_stack:
            for q in self.states:
                if self.mode[q] == "univ":
                    raise InvariantViolation(
                        "stack machines are nondeterministic: no universal states allowed")
        object.__setattr__(self, "_uses_stack", any_stack)

    @property
    def uses_stack(self) -> bool:
        return self._uses_stack  # type: ignore[attr-defined]

    @property
    def blank(self) -> str:
        return self.work_alphabet[0]

    def input_alphabet(self) -> list[str]:
        return sorted({key[1] for key in self.transitions} - {BOUNDARY})


@dataclass(frozen=True)
class RunStats:
    """Outcome and exact resource meters of one evaluation."""

    accepted: bool
    tree_nodes: int = 0
    max_co_nondet_on_path: int = 0
    peak_stack_height: int = 0
    steps_used: int = 0
    exhausted: bool = False

    def __post_init__(self):
        for name in ("tree_nodes", "max_co_nondet_on_path",
                     "peak_stack_height", "steps_used"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"negative meter {name}")


def input_symbol(x: str, pos: int) -> str:
    if pos == 0 or pos == len(x) + 1:
        return BOUNDARY
    return x[pos - 1]


def initial_part(m: MachineSpec, x: str) -> Part:
    return (m.initial, 1, (m.blank,) * m.work_cells, 1)


def initial_configuration(m: MachineSpec, x: str,
                          steps_remaining: int | None = None) -> Configuration:
    state, input_head, tape, work_head = initial_part(m, x)
    return Configuration(state=state, input_head=input_head, work_tape=tape,
                         work_head=work_head, steps_remaining=steps_remaining)


def _applicable(m: MachineSpec, part: Part, x: str) -> tuple[Action, ...]:
    """Actions whose head moves stay on both tapes, in table order."""
    q, ip, tape, wp = part
    key = (q, input_symbol(x, ip), tape[wp - 1])
    acts = m.transitions.get(key, ())
    out = []
    for act in acts:
        nip = ip + act.di
        nwp = wp + act.dw
        if 0 <= nip <= len(x) + 1 and 1 <= nwp <= m.work_cells:
            out.append(act)
    return tuple(out)


def _apply(part: Part, act: Action) -> Part:
    q, ip, tape, wp = part
    new_tape = tape[:wp - 1] + (act.write,) + tape[wp:]
    return (act.state, ip + act.di, new_tape, wp + act.dw)


def _require_budget(budget: ResourceBudget, name: str):
    if getattr(budget, name) is None:
        raise InvariantViolation(f"budget field {name} must be finite here")


def _require_stack_free(m: MachineSpec, what: str):
    if m.uses_stack:
        raise SemanticsMismatch(f"{what} requires a stack-free machine")


def _require_no_universal(m: MachineSpec, what: str):
    if any(m.mode[q] == "univ" for q in m.states):
        raise SemanticsMismatch(f"{what} requires a machine without universal states")


# ------------------------------------------------------------------ stack


def _stack_search(m: MachineSpec, x: str, budget: ResourceBudget):
    """Layered search over (part, stack) states.

    Returns (path or None, exhausted); the path is the minimal-step accepting
    run as a list of (part, stack) states.
    """
    _require_budget(budget, "time_steps")
    limit = budget.time_steps
    cap = budget.stack_height_cap
    start = (initial_part(m, x), ())

    def halted_accepting(state) -> bool:
        part, stk = state
        return part[0] in m.accepting and not stk

    parents: dict = {start: None}

    def path_to(state):
        out = []
        while state is not None:
            out.append(state)
            state = parents[state]
        return list(reversed(out))

    if halted_accepting(start):
        return path_to(start), False
    frontier = [start]
    for _ in range(limit):
        nxt = []
        for state in frontier:
            part, stk = state
            if halted_accepting(state):
                continue
            for act in _applicable(m, part, x):
                if act.stack_op is None:
                    new = (_apply(part, act), stk)
                elif act.stack_op[0] == "push":
                    if cap is not None and len(stk) >= cap:
                        continue
                    new = (_apply(part, act), stk + (act.stack_op[1],))
                else:  # pop, guarded on the popped symbol
                    if not stk or stk[-1] != act.stack_op[1]:
                        continue
                    new = (_apply(part, act), stk[:-1])
                if new in parents:
                    continue
                parents[new] = state
                if halted_accepting(new):
                    return path_to(new), False
                nxt.append(new)
        if not nxt:
            return None, False
        frontier = nxt
    return None, True


def eval_stack(m: MachineSpec, x: str, budget: ResourceBudget) -> RunStats:
    """Nondeterministic stack semantics: accepted iff some run within the
    step budget reaches an accepting state with an empty stack."""
    _require_no_universal(m, "eval_stack")
    path, exhausted = _stack_search(m, x, budget)
    if path is None:
        return RunStats(accepted=False, exhausted=exhausted)
    steps = len(path) - 1
    peak = max(len(stk) for _, stk in path)
    return RunStats(accepted=True, tree_nodes=steps + 1,
                    peak_stack_height=peak, steps_used=steps)


# ------------------------------------------------------- alternating core


def _explore_alternation(m: MachineSpec, x: str):
    """Forward closure of the stack-free configuration space.

    Returns (succ, parents) where succ maps each part to one of
    ("leaf",), ("dead",), ("or", children) or ("and", (c1, c2)).
    """
    init = initial_part(m, x)
    succ: dict[Part, tuple] = {}
    parents: dict[Part, list[Part]] = {}
    stack = [init]
    while stack:
        part = stack.pop()
        if part in succ:
            continue
        if part[0] in m.accepting:
            succ[part] = ("leaf",)
            continue
        acts = _applicable(m, part, x)
        mode = m.mode[part[0]]
        if mode == "univ":
            if len(acts) != 2:
                succ[part] = ("dead",)
                continue
            kids = tuple(_apply(part, a) for a in acts)
            succ[part] = ("and", kids)
        elif acts:
            kids = tuple(_apply(part, a) for a in acts)
            succ[part] = ("or", kids)
        else:
            succ[part] = ("dead",)
            continue
        for kid in kids:
            parents.setdefault(kid, []).append(part)
            if kid not in succ:
                stack.append(kid)
        if len(succ) > MAX_CONFIGS:
            raise CapExceeded("machine configuration space too large")
    return succ, parents


def _min_tree_costs(succ, parents) -> dict[Part, int]:
    """Minimal accepting computation-tree size per configuration, by
    Dijkstra-style finalization (min over 1+child; 1+sum for universal)."""
    cost: dict[Part, int] = {}
    heap: list[tuple[int, Part]] = []
    for part, desc in succ.items():
        if desc[0] == "leaf":
            heapq.heappush(heap, (1, part))
    while heap:
        c, part = heapq.heappop(heap)
        if part in cost:
            continue
        cost[part] = c
        for par in parents.get(part, ()):
            if par in cost:
                continue
            kind, kids = succ[par][0], succ[par][1] if len(succ[par]) > 1 else ()
            if kind == "or":
                heapq.heappush(heap, (c + 1, par))
            elif kind == "and":
                a, b = kids
                if a in cost and b in cost:
                    heapq.heappush(heap, (1 + cost[a] + cost[b], par))
    return cost


def _pick_child(succ, cost, part) -> Part:
    """Deterministic choice at an existential node of the minimal tree."""
    for kid in succ[part][1]:
        if kid in cost and cost[kid] == cost[part] - 1:
            return kid
    raise AssertionError("cost table inconsistent")


def _tree_depth_and_co(succ, cost, root) -> tuple[int, int]:
    """Depth and max universal steps per path of the recovered minimal tree."""
    memo: dict[Part, tuple[int, int]] = {}

    def rec(part: Part) -> tuple[int, int]:
        if part in memo:
            return memo[part]
        kind = succ[part][0]
        if kind == "leaf":
            res = (0, 0)
        elif kind == "or":
            d, co = rec(_pick_child(succ, cost, part))
            res = (d + 1, co)
        else:
            (d1, co1) = rec(succ[part][1][0])
            (d2, co2) = rec(succ[part][1][1])
            res = (1 + max(d1, d2), 1 + max(co1, co2))
        memo[part] = res
        return res

    return rec(root)


def eval_alternating(m: MachineSpec, x: str, budget: ResourceBudget) -> RunStats:
    """Alternating semantics: accepted iff an accepting computation tree with
    at most budget.tree_size nodes exists; reports the smallest such tree."""
    _require_stack_free(m, "eval_alternating")
    _require_budget(budget, "tree_size")
    succ, parents = _explore_alternation(m, x)
    cost = _min_tree_costs(succ, parents)
    init = initial_part(m, x)
    best = cost.get(init)
    if best is None or best > budget.tree_size:
        return RunStats(accepted=False, exhausted=best is not None)
    depth, co = _tree_depth_and_co(succ, cost, init)
    return RunStats(accepted=True, tree_nodes=best,
                    max_co_nondet_on_path=co, steps_used=depth)


# ------------------------------------------------------------ shaped runs


def shaped_run(m: MachineSpec, x: str, shape: OrderedTree) -> dict[int, Part] | None:
    """An accepting run whose computation tree is exactly the shape tree,
    as a map from shape node to configuration, or None.

    Universal steps happen exactly at 2-child nodes, accepting states exactly
    at leaves, and the first/second universal transition goes to the
    first/second child.
    """
    _require_stack_free(m, "run_with_tree_shape")
    shape.validate_binary()
    memo: dict[tuple[Part, int], bool] = {}

    def ok(part: Part, node: int) -> bool:
        key = (part, node)
        if key in memo:
            return memo[key]
        kids = shape.child_list(node)
        accepting = part[0] in m.accepting
        if not kids:
            res = accepting
        elif accepting:
            res = False
        else:
            acts = _applicable(m, part, x)
            mode = m.mode[part[0]]
            if len(kids) == 1:
                res = mode != "univ" and any(
                    ok(_apply(part, a), kids[0]) for a in acts)
            else:
                res = (mode == "univ" and len(acts) == 2
                       and ok(_apply(part, acts[0]), kids[0])
                       and ok(_apply(part, acts[1]), kids[1]))
        memo[key] = res
        return res

    init = initial_part(m, x)
    if not ok(init, shape.root):
        return None
    run: dict[int, Part] = {}

    def build(part: Part, node: int):
        run[node] = part
        kids = shape.child_list(node)
        if not kids:
            return
        acts = _applicable(m, part, x)
        if len(kids) == 1:
            for a in acts:
                if ok(_apply(part, a), kids[0]):
                    build(_apply(part, a), kids[0])
                    return
            raise AssertionError("shaped run vanished")
        build(_apply(part, acts[0]), kids[0])
        build(_apply(part, acts[1]), kids[1])

    build(init, shape.root)
    return run


def run_with_tree_shape(m: MachineSpec, x: str, shape: OrderedTree) -> bool:
    return shaped_run(m, x, shape) is not None


# ------------------------------------------------- stack via alternation


def _overapprox_parts(m: MachineSpec, x: str) -> list[Part]:
    """Machine parts reachable when stack guards are ignored; a superset of
    the parts reachable in any stack-respecting run."""
    init = initial_part(m, x)
    seen = {init}
    stack = [init]
    while stack:
        part = stack.pop()
        for act in _applicable(m, part, x):
            nxt = _apply(part, act)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
        if len(seen) > MAX_CONFIGS:
            raise CapExceeded("machine configuration space too large")
    return sorted(seen)


def _pop_action(m: MachineSpec, part: Part, x: str):
    """The unique applicable pop action of a deterministic part, if any."""
    if m.mode[part[0]] != "det":
        return None
    acts = _applicable(m, part, x)
    if len(acts) == 1 and acts[0].stack_op is not None and acts[0].stack_op[0] == "pop":
        return acts[0]
    return None


def eval_stack_via_alternation(m: MachineSpec, x: str, budget: ResourceBudget) -> RunStats:
    """Stack acceptance decided by the alternation construction: guess the
    accepting end configuration, then check segments A(c1,c2) that never pop
    below their entry level; every push guesses its matching pop
    configuration and splits co-nondeterministically into the enclosed
    segment and the continuation after the pop.

    Guessing is exhaustive enumeration over the finite configuration space
    with remaining-step counters, in a fixed order, so results are
    deterministic.  tree_nodes meters the simulating alternating machine's
    accepting tree (one node per simulated step, three per push split, one
    per segment end, plus the initial guess).
    """
    _require_no_universal(m, "eval_stack_via_alternation")
    _require_budget(budget, "time_steps")
    total = budget.time_steps
    parts = _overapprox_parts(m, x)
    pop_of = {}
    for part in parts:
        act = _pop_action(m, part, x)
        if act is not None:
            pop_of[part] = act
    init = initial_part(m, x)
    acc_parts = [p for p in parts if p[0] in m.accepting]
    memo: dict = {}

    def segment(c1: Part, r1: int, c2: Part, r2: int, h: int):
        """Nodes/co-nondet of the accepting subtree for segment c1->c2, or
        None; both ends sit at stack level h and the segment never drops
        below it."""
        key = (c1, r1, c2, r2, h)
        if key in memo:
            return memo[key]
        res = None
        if c1 == c2 and r1 == r2:
            res = (1, 0)
        elif r1 > r2 and not (c1[0] in m.accepting and h == 0):
            # an accepting part at level 0 halts, so only the base case above
            # may end there
            for act in _applicable(m, c1, x):
                if act.stack_op is None:
                    sub = segment(_apply(c1, act), r1 - 1, c2, r2, h)
                    if sub is not None:
                        res = (1 + sub[0], sub[1])
                        break
                elif act.stack_op[0] == "push":
                    sym = act.stack_op[1]
                    pushed = _apply(c1, act)
                    res = _split_push(pushed, r1 - 1, sym, c2, r2, h)
                    if res is not None:
                        break
                # a pop here would pop below level h: not allowed inside a segment
        memo[key] = res
        return res

    def _split_push(pushed: Part, r_push: int, sym: str, c2: Part, r2: int, h: int):
        for rp in range(r_push, r2, -1):
            for cp in parts:
                act = pop_of.get(cp)
                if act is None or act.stack_op[1] != sym:
                    continue
                after = _apply(cp, act)
                inner = segment(pushed, r_push, cp, rp, h + 1)
                if inner is None:
                    continue
                outer = segment(after, rp - 1, c2, r2, h)
                if outer is None:
                    continue
                return (3 + inner[0] + outer[0], 1 + max(inner[1], outer[1]))
        return None

    for used in range(total + 1):
        ra = total - used
        for ca in acc_parts:
            got = segment(init, total, ca, ra, 0)
            if got is not None:
                nodes, co = got
                return RunStats(accepted=True, tree_nodes=nodes + 1,
                                max_co_nondet_on_path=co, steps_used=used)
    _, exhausted = _stack_search(m, x, budget)
    return RunStats(accepted=False, exhausted=exhausted)


# ------------------------------------------------- alternation as stack


def eval_alternating_as_stack(m: MachineSpec, x: str, budget: ResourceBudget) -> RunStats:
    """Depth-first replay of an alternating machine with an explicit stack of
    pending universal branches: at a universal step the second branch is
    pushed, at an accepting leaf a pending branch is popped and resumed."""
    _require_stack_free(m, "eval_alternating_as_stack")
    _require_budget(budget, "tree_size")
    exhausted = False
    memo: dict = {}

    def search(part: Part, pending: tuple[Part, ...], left: int):
        nonlocal exhausted
        key = (part, pending, left)
        if key in memo:
            return memo[key]
        res = None
        if left <= 0:
            exhausted = True
        elif part[0] in m.accepting:
            if not pending:
                res = (1, 0)
            else:
                sub = search(pending[-1], pending[:-1], left - 1)
                if sub is not None:
                    res = (1 + sub[0], max(len(pending), sub[1]))
        else:
            acts = _applicable(m, part, x)
            mode = m.mode[part[0]]
            if mode == "univ":
                if len(acts) == 2:
                    grown = pending + (_apply(part, acts[1]),)
                    sub = search(_apply(part, acts[0]), grown, left - 1)
                    if sub is not None:
                        res = (1 + sub[0], max(len(grown), sub[1]))
            else:
                for act in acts:
                    sub = search(_apply(part, act), pending, left - 1)
                    if sub is not None:
                        res = (1 + sub[0], max(len(pending), sub[1]))
                        break
        memo[key] = res
        return res

    got = search(initial_part(m, x), (), budget.tree_size)
    if got is None:
        return RunStats(accepted=False, exhausted=exhausted)
    nodes, peak = got
    return RunStats(accepted=True, tree_nodes=nodes, peak_stack_height=peak,
                    steps_used=nodes - 1)


# ------------------------------------------------ advice-rebalanced runs


@dataclass
class _TreeNode:
    part: Part
    kids: list = field(default_factory=list)
    parent: object = None
    size: int = 1


def _build_min_tree(succ, cost, root_part: Part) -> _TreeNode:
    root = _TreeNode(root_part)
    stack = [root]
    while stack:
        node = stack.pop()
        kind = succ[node.part][0]
        if kind == "leaf":
            continue
        if kind == "or":
            kids = (_pick_child(succ, cost, node.part),)
        else:
            kids = succ[node.part][1]
        for kp in kids:
            kid = _TreeNode(kp, parent=node)
            node.kids.append(kid)
            stack.append(kid)

    def fill(node: _TreeNode) -> int:
        node.size = 1 + sum(fill(k) for k in node.kids)
        return node.size

    fill(root)
    return root


def _in_subtree(node: _TreeNode, top: _TreeNode) -> bool:
    while node is not None:
        if node is top:
            return True
        node = node.parent
    return False


def _balanced_co_meter(root: _TreeNode, accepting: frozenset[str]) -> int:
    """Max co-nondeterministic steps per path of the advice-rebalanced
    verification of the given accepting tree.

    Regions are (top, hole): the subtree at top with the subtree at the
    stored advice configuration (hole) removed; a branch reaching the advice
    ends there and the advice's own subtree is discharged by a sibling
    branch.  Large regions are cut either on the top-to-advice path (the
    ancestor case) or, when no balanced path cut exists, at the universal
    node whose off-path subtree absorbs the weight (the least-common-ancestor
    case, realized as two binary splits around that node's universal step).
    """

    def region_size(top: _TreeNode, hole: _TreeNode | None) -> int:
        return top.size - (hole.size if hole is not None else 0)

    def route(node: _TreeNode, hole: _TreeNode | None):
        """Pass the advice to whichever child subtree contains it."""
        return [hole if hole is not None and _in_subtree(hole, kid) else None
                for kid in node.kids]

    def walk(top: _TreeNode, hole: _TreeNode | None) -> int:
        if top is hole:
            return 0  # current configuration equals the advice: accept
        if not top.kids:
            assert top.part[0] in accepting, "leaf of an accepting tree must accept"
            return 0
        if len(top.kids) == 1:
            return walk(top.kids[0], hole)
        sides = route(top, hole)
        return 1 + max(walk(k, s) for k, s in zip(top.kids, sides))

    def hole_path(top: _TreeNode, hole: _TreeNode) -> list[_TreeNode]:
        out = []
        node = hole.parent
        while node is not top:
            out.append(node)
            node = node.parent
        out.append(top)
        return list(reversed(out))  # top first, parent of the hole last

    def step_through(node: _TreeNode, hole: _TreeNode | None) -> int:
        """Meter node's own step; its universal split separates the advice
        side from the fully checked side."""
        if node is hole or not node.kids:
            return 0
        if len(node.kids) == 1:
            return meter(node.kids[0], hole)
        return 1 + max(meter(k, s) for k, s in zip(node.kids, route(node, hole)))

    def meter(top: _TreeNode, hole: _TreeNode | None) -> int:
        size = region_size(top, hole)
        if size <= 3:
            return walk(top, hole)
        if hole is None:
            # fresh advice: guess a separator configuration; one branch checks
            # the region up to the advice, the other continues at the advice
            cur = top
            pick = None
            while True:
                big = None
                for kid in cur.kids:
                    if big is None or kid.size > big.size:
                        big = kid
                if big is None:
                    break
                pick = big
                if big.size <= (2 * size) // 3:
                    break
                cur = big
            assert pick is not None
            return 1 + max(meter(top, pick), meter(pick, None))
        path = hole_path(top, hole)
        # ancestor case: a balanced cut on the path to the stored advice
        best = None
        for w in path[1:]:
            upper = top.size - w.size
            lower = w.size - hole.size
            score = max(upper, lower)
            if best is None or score < best[0]:
                best = (score, w)
        if best is not None and best[0] <= (2 * size) // 3 + 1:
            w = best[1]
            return 1 + max(meter(top, w), meter(w, hole))
        # LCA case: the weight sits in an off-path subtree of a node J on the
        # path (necessarily universal); cut at J, then J's own universal step
        # separates the full off-path subtree from the advice side
        j = top
        for w in path[1:]:
            if top.size - w.size <= size // 2:
                j = w
            else:
                break
        co_at_j = step_through(j, hole)
        if j is top:
            return co_at_j
        return 1 + max(meter(top, j), co_at_j)

    return meter(root, None)


def eval_balanced(m: MachineSpec, x: str, budget: ResourceBudget) -> RunStats:
    """Alternating semantics re-derived through the advice-rebalancing
    construction: the smallest accepting tree is verified by recursively
    splitting budgeted regions around stored advice configurations, so the
    number of co-nondeterministic steps per path stays logarithmic in the
    tree-size budget.

    tree_nodes reports the underlying minimal accepting tree;
    max_co_nondet_on_path meters the rebalanced verification.
    """
    _require_stack_free(m, "eval_balanced")
    _require_budget(budget, "tree_size")
    succ, parents = _explore_alternation(m, x)
    cost = _min_tree_costs(succ, parents)
    init = initial_part(m, x)
    best = cost.get(init)
    if best is None or best > budget.tree_size:
        return RunStats(accepted=False, exhausted=best is not None)
    tree = _build_min_tree(succ, cost, init)
    assert tree.size == best
    co = _balanced_co_meter(tree, m.accepting)
    depth, _ = _tree_depth_and_co(succ, cost, init)
    return RunStats(accepted=True, tree_nodes=best,
                    max_co_nondet_on_path=co, steps_used=depth)


EVALUATORS = {
    "stack": eval_stack,
    "alt": eval_alternating,
    "balanced": eval_balanced,
    "altstack": eval_alternating_as_stack,
    "stackalt": eval_stack_via_alternation,
}
