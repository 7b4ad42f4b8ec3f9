"""Problem-instance types and their structural validators.

Every type here is immutable after construction and checks its invariants
eagerly: building an invalid instance raises InvariantViolation naming the
violated condition.  Identifiers (vertices, tree nodes, variables, colors)
are 1-based dense integers; display labels are optional decoration.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class XalpwbError(Exception):
    """Base class for all workbench errors."""


class InvariantViolation(XalpwbError):
    """A constructed instance violates one of its structural invariants."""


class FormatError(XalpwbError):
    """Instance text does not match the expected line format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapExceeded(XalpwbError):
    """An oracle refused an instance that is too large for exhaustive search."""


def ceil_log2(n: int) -> int:
    """ceil(log2(n)) with the convention ceil_log2(1) = 1 so that k*log(n)
    width checks never degenerate to zero on tiny instances."""
    if n < 1:
        raise InvariantViolation(f"ceil_log2 undefined for n={n}")
    if n == 1:
        return 1
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices 1..n without loops or parallel edges."""

    n: int
    edges: frozenset[tuple[int, int]] = frozenset()
    labels: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise InvariantViolation("vertex count must be nonnegative")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for e in self.edges:
            if len(e) != 2:
                raise InvariantViolation(f"malformed edge {e!r}")
            u, v = e
            if u == v:
                raise InvariantViolation(f"self-loop at vertex {u}")
            if not (1 <= u < v <= self.n):
                raise InvariantViolation(
                    f"edge ({u},{v}) out of range or not normalized u<v")
        for v in self.labels:
            if not 1 <= v <= self.n:
                raise InvariantViolation(f"label on unknown vertex {v}")

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices()}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


def normalize_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class OrderedTree:
    """Rooted tree on nodes 1..n with an explicit order on children.

    Used both as the structure tree of chained instances (where it must be
    binary) and as the shape of a tree decomposition (where nodes may have
    any number of children).
    """

    n: int
    children: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InvariantViolation("tree needs at least one node")
        nodes = set(range(1, self.n + 1))
        child_of: dict[int, int] = {}
        for p, cs in self.children.items():
            if p not in nodes:
                raise InvariantViolation(f"unknown tree node {p}")
            for c in cs:
                if c not in nodes:
                    raise InvariantViolation(f"unknown tree node {c}")
                if c in child_of:
                    raise InvariantViolation(f"node {c} has two parents")
                child_of[c] = p
        roots = nodes - set(child_of)
        if len(roots) != 1:
            raise InvariantViolation(
                f"tree must have exactly one root, found {sorted(roots)}")
        # reachability from the root rules out cycles among the child links
        root = next(iter(roots))
        seen = {root}
        stack = [root]
        while stack:
            for c in self.children.get(stack.pop(), ()):
                if c in seen:
                    raise InvariantViolation(f"cycle through node {c}")
                seen.add(c)
                stack.append(c)
        if seen != nodes:
            raise InvariantViolation("tree is not connected")
        object.__setattr__(self, "_root", root)
        object.__setattr__(self, "_parent", child_of)

    @property
    def root(self) -> int:
        return self._root  # type: ignore[attr-defined]

    def parent(self, node: int) -> int | None:
        return self._parent.get(node)  # type: ignore[attr-defined]

    def child_list(self, node: int) -> tuple[int, ...]:
        return self.children.get(node, ())

    def nodes(self) -> range:
        return range(1, self.n + 1)

    def edge_list(self) -> list[tuple[int, int]]:
        return [(p, c) for p in sorted(self.children) for c in self.children[p]]

    def is_tree_edge(self, a: int, b: int) -> bool:
        return self.parent(a) == b or self.parent(b) == a

    def validate_binary(self) -> None:
        for p, cs in self.children.items():
            if len(cs) > 2:
                raise InvariantViolation(
                    f"structure tree node {p} has {len(cs)} children (max 2)")

    def preorder(self) -> list[int]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(self.child_list(node)))
        return out


@dataclass(frozen=True)
class TreeDecomposition:
    """Bag-labelled tree over the vertices of some graph."""

    tree: OrderedTree
    bags: dict[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        bags = {i: frozenset(b) for i, b in self.bags.items()}
        object.__setattr__(self, "bags", bags)
        for i in self.tree.nodes():
            if i not in bags:
                raise InvariantViolation(f"tree node {i} has no bag")
        for i in bags:
            if not 1 <= i <= self.tree.n:
                raise InvariantViolation(f"bag on unknown tree node {i}")

    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1


@dataclass(frozen=True)
class DecompositionCheck:
    """Outcome of validate_decomposition; violations are in-band results."""

    ok: bool
    width: int | None = None
    violation: str | None = None
    witness: object = None


def validate_decomposition(graph: Graph, dec: TreeDecomposition) -> DecompositionCheck:
    """Check the three tree-decomposition conditions against graph.

    Returns the width when all conditions hold, otherwise the first violated
    condition (vertex coverage, edge coverage, occurrence connectivity) with
    a witness.
    """
    occ: dict[int, set[int]] = {v: set() for v in graph.vertices()}
    for i, bag in dec.bags.items():
        for v in bag:
            if v not in occ:
                return DecompositionCheck(
                    False, violation=f"bag vertex out of range: {v}", witness=v)
            occ[v].add(i)
    for v in graph.vertices():
        if not occ[v]:
            return DecompositionCheck(
                False, violation=f"vertex uncovered: {v}", witness=v)
    for u, v in sorted(graph.edges):
        if not any(u in bag and v in bag for bag in dec.bags.values()):
            return DecompositionCheck(
                False, violation=f"edge uncovered: {{{u},{v}}}", witness=(u, v))
    for v in graph.vertices():
        nodes = occ[v]
        start = next(iter(nodes))
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            around = list(dec.tree.child_list(i))
            p = dec.tree.parent(i)
            if p is not None:
                around.append(p)
            for j in around:
                if j in nodes and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if seen != nodes:
            return DecompositionCheck(
                False, violation=f"occurrences disconnected: {v}", witness=v)
    return DecompositionCheck(True, width=dec.width())


@dataclass(frozen=True)
class TcmcInstance:
    """Tree-chained multicolor instance: one class of vertices per
    (tree node, color) pair; a solution picks one vertex per class.

    Whether adjacency (clique) or non-adjacency (independent set) is required
    between constrained pairs is the solver's mode, not part of the instance.
    """

    tree: OrderedTree
    k: int
    classes: dict[tuple[int, int], frozenset[int]]
    graph: Graph

    def __post_init__(self):
        self.tree.validate_binary()
        if self.k < 1:
            raise InvariantViolation("color count k must be >= 1")
        classes = {key: frozenset(vs) for key, vs in self.classes.items()}
        object.__setattr__(self, "classes", classes)
        expected = {(i, j) for i in self.tree.nodes() for j in range(1, self.k + 1)}
        if set(classes) != expected:
            missing = sorted(expected - set(classes))
            extra = sorted(set(classes) - expected)
            raise InvariantViolation(
                f"class map must cover every (node,color): missing {missing}, extra {extra}")
        owner: dict[int, tuple[int, int]] = {}
        for key in sorted(classes):
            for v in classes[key]:
                if v in owner:
                    raise InvariantViolation(
                        f"vertex {v} in classes {owner[v]} and {key}")
                owner[v] = key
        if set(owner) != set(self.graph.vertices()):
            raise InvariantViolation(
                "union of classes must equal the graph's vertex set")
        object.__setattr__(self, "_owner", owner)
        for u, v in sorted(self.graph.edges):
            iu, ju = owner[u]
            iv, jv = owner[v]
            if (iu, ju) == (iv, jv):
                raise InvariantViolation(
                    f"edge joins non-incident classes: ({u},{v}) inside class {(iu, ju)}")
            if iu != iv and not self.tree.is_tree_edge(iu, iv):
                raise InvariantViolation(
                    f"edge joins non-incident classes: ({u},{v}) between nodes {iu},{iv}")

    def class_of(self, v: int) -> tuple[int, int]:
        return self._owner[v]  # type: ignore[attr-defined]

    def constrained_pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """All class pairs whose chosen vertices are constrained: same tree
        node or endpoints of a tree edge, excluding the identical class."""
        pairs = []
        ks = range(1, self.k + 1)
        for i in self.tree.nodes():
            for j1 in ks:
                for j2 in ks:
                    if j1 < j2:
                        pairs.append(((i, j1), (i, j2)))
        for p, c in self.tree.edge_list():
            for j1 in ks:
                for j2 in ks:
                    pairs.append(((p, j1), (c, j2)))
        return pairs


CNF_VARIANTS = ("general", "positive-partitioned", "negative-partitioned")


@dataclass(frozen=True)
class TreeChainedCnf:
    """CNF whose clauses are local to a structure-tree node or one of its
    tree edges, in one of three variants.

    Clause literals are signed variable ids; variables are grouped per node
    and, for the partitioned variants, split into k cells per node.
    """

    tree: OrderedTree
    variable_sets: dict[int, frozenset[int]]
    clauses: tuple[tuple[int, ...], ...]
    variant: str
    k: int
    partition: dict[tuple[int, int], frozenset[int]] | None = None
    var_names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.tree.validate_binary()
        if self.variant not in CNF_VARIANTS:
            raise InvariantViolation(f"unknown cnf variant {self.variant!r}")
        if self.k < 1:
            raise InvariantViolation("parameter k must be >= 1")
        vsets = {i: frozenset(vs) for i, vs in self.variable_sets.items()}
        object.__setattr__(self, "variable_sets", vsets)
        if set(vsets) != set(self.tree.nodes()):
            raise InvariantViolation("variable_sets must cover every tree node")
        node_of: dict[int, int] = {}
        for i in sorted(vsets):
            for x in vsets[i]:
                if x in node_of:
                    raise InvariantViolation(f"variable {x} in two node sets")
                node_of[x] = i
        allvars = set(node_of)
        if allvars and set(range(1, max(allvars) + 1)) != allvars:
            raise InvariantViolation("variable ids must be dense 1..n")
        object.__setattr__(self, "_node_of", node_of)
        names = dict(self.var_names)
        for x in allvars:
            names.setdefault(x, f"x{x}")
        if len(set(names.values())) != len(names):
            raise InvariantViolation("variable names must be unique")
        object.__setattr__(self, "var_names", names)
        object.__setattr__(
            self, "clauses", tuple(tuple(c) for c in self.clauses))
        for idx, clause in enumerate(self.clauses):
            scope_nodes = set()
            for lit in clause:
                x = abs(lit)
                if x not in node_of:
                    raise InvariantViolation(
                        f"clause {idx + 1} uses unknown variable {x}")
                scope_nodes.add(node_of[x])
            if len(scope_nodes) > 2:
                raise InvariantViolation(
                    f"clause {idx + 1} spans nodes {sorted(scope_nodes)}")
            if len(scope_nodes) == 2:
                a, b = sorted(scope_nodes)
                if not self.tree.is_tree_edge(a, b):
                    raise InvariantViolation(
                        f"clause {idx + 1} spans non-adjacent nodes {a},{b}")
        if self.variant == "positive-partitioned":
            if any(lit < 0 for c in self.clauses for lit in c):
                raise InvariantViolation("positive-partitioned clause has a negative literal")
            self._check_partition()
        elif self.variant == "negative-partitioned":
            if any(lit > 0 for c in self.clauses for lit in c):
                raise InvariantViolation("negative-partitioned clause has a positive literal")
            self._check_partition()

    def _check_partition(self):
        if self.partition is None:
            raise InvariantViolation(f"{self.variant} instance needs a partition")
        cells = {key: frozenset(vs) for key, vs in self.partition.items()}
        object.__setattr__(self, "partition", cells)
        expected = {(i, j) for i in self.tree.nodes() for j in range(1, self.k + 1)}
        if set(cells) != expected:
            raise InvariantViolation(
                "partition must have cells (node, 1..k) for every node")
        for i in self.tree.nodes():
            union: set[int] = set()
            for j in range(1, self.k + 1):
                cell = cells[(i, j)]
                if not cell:
                    raise InvariantViolation(f"partition cell {(i, j)} is empty")
                if union & cell:
                    raise InvariantViolation(f"partition cells overlap at node {i}")
                union |= cell
            if union != self.variable_sets[i]:
                raise InvariantViolation(
                    f"partition of node {i} does not cover its variable set")

    def node_of_var(self, x: int) -> int:
        return self._node_of[x]  # type: ignore[attr-defined]

    def cell_of_var(self, x: int) -> tuple[int, int]:
        assert self.partition is not None
        for key in sorted(self.partition):
            if x in self.partition[key]:
                return key
        raise KeyError(x)

    def all_variables(self) -> list[int]:
        return sorted(v for vs in self.variable_sets.values() for v in vs)


@dataclass(frozen=True)
class ListColoringInstance:
    """List coloring over a global palette; precolored vertices act as if
    their list were the singleton of the assigned color."""

    graph: Graph
    palette: frozenset[int]
    lists: dict[int, frozenset[int]]
    precolored: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        palette = frozenset(self.palette)
        object.__setattr__(self, "palette", palette)
        lists = {v: frozenset(cs) for v, cs in self.lists.items()}
        object.__setattr__(self, "lists", lists)
        if set(lists) != set(self.graph.vertices()):
            raise InvariantViolation("every vertex needs a color list")
        for v in sorted(lists):
            if not lists[v]:
                raise InvariantViolation(f"empty list at vertex {v}")
            if not lists[v] <= palette:
                raise InvariantViolation(f"list of vertex {v} leaves the palette")
        for v, c in sorted(self.precolored.items()):
            if v not in lists:
                raise InvariantViolation(f"precoloring of unknown vertex {v}")
            if c not in lists[v]:
                raise InvariantViolation(
                    f"precolored vertex {v} with color {c} outside its list")

    def effective_list(self, v: int) -> frozenset[int]:
        if v in self.precolored:
            return frozenset({self.precolored[v]})
        return self.lists[v]


LOGTW_PROBLEMS = ("is", "vc", "rbds", "ds")


@dataclass(frozen=True)
class LogTwGraphInstance:
    """Graph problem instance carrying its own decomposition witness and a
    declared logarithmic-treewidth parameter k: width <= k * ceil(log2 n)."""

    graph: Graph
    decomposition: TreeDecomposition
    target_weight: int
    k: int
    problem: str = "is"

    def __post_init__(self):
        if self.problem not in LOGTW_PROBLEMS:
            raise InvariantViolation(f"unknown problem tag {self.problem!r}")
        if self.graph.n < 1:
            raise InvariantViolation("log-treewidth instance needs >= 1 vertex")
        check = validate_decomposition(self.graph, self.decomposition)
        if not check.ok:
            raise InvariantViolation(f"invalid decomposition: {check.violation}")
        bound = self.k * ceil_log2(self.graph.n)
        if check.width > bound:
            raise InvariantViolation(
                f"width {check.width} exceeds k*ceil(log2 n) = {bound}")
        if self.k < 1:
            raise InvariantViolation("parameter k must be >= 1")
        if self.problem == "rbds":
            for v in self.graph.vertices():
                if self.graph.labels.get(v) not in ("red", "blue"):
                    raise InvariantViolation(
                        f"rbds instance needs red/blue label on vertex {v}")

    def red_vertices(self) -> list[int]:
        return [v for v in self.graph.vertices() if self.graph.labels.get(v) == "red"]

    def blue_vertices(self) -> list[int]:
        return [v for v in self.graph.vertices() if self.graph.labels.get(v) == "blue"]


UNBOUNDED = None


@dataclass(frozen=True)
class ResourceBudget:
    """Resource limits for machine evaluation; None means unbounded."""

    time_steps: int | None = None
    tree_size: int | None = None
    work_cells: int | None = None
    co_nondet_per_path: int | None = None
    stack_height_cap: int | None = None

    def __post_init__(self):
        for name in ("time_steps", "tree_size", "work_cells",
                     "co_nondet_per_path", "stack_height_cap"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise InvariantViolation(f"budget field {name} must be nonnegative")


def equal_size_classes(instance: TcmcInstance) -> TcmcInstance:
    """Optional normalization: pad every class with isolated vertices until
    all classes have the same size.  Isolated vertices can never join a
    multicolor clique (in instances with more than one class), so clique
    solvability is preserved; complement first if independent-set semantics
    are wanted.  Provided as an optional transform, not a format constraint."""
    if not instance.classes:
        return instance
    target = max(len(vs) for vs in instance.classes.values())
    next_v = instance.graph.n + 1
    classes = {}
    for key in sorted(instance.classes):
        vs = set(instance.classes[key])
        while len(vs) < target:
            vs.add(next_v)
            next_v += 1
        classes[key] = frozenset(vs)
    graph = Graph(n=next_v - 1, edges=instance.graph.edges,
                  labels=dict(instance.graph.labels))
    return TcmcInstance(tree=instance.tree, k=instance.k,
                        classes=classes, graph=graph)
