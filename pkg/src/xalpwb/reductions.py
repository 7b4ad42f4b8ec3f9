"""Instance-to-instance reductions with parameter accounting, solution
lifting and, where claimed, tree-decomposition witnesses.

Each reduction is addressable by a stable name (REDUCTION_NAMES) and emits a
ReductionArtifact.  Lift maps carry solutions across the reduction in both
directions as callables plus desk-scale record tables that serialize as
"lift <source-item> <target-items...>" lines.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from .instances import (
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
from .machines import MachineSpec, input_symbol

BEFORE = "before"
AFTER = "after"


@dataclass
class LiftMap:
    """Invertible solution correspondence: forward maps source solutions to
    target solutions, backward the reverse; records are the serializable
    desk-scale table."""

    records: tuple[tuple[str, tuple[str, ...]], ...]
    forward: Callable
    backward: Callable

    def serialize(self) -> str:
        lines = []
        for src, targets in self.records:
            lines.append("lift " + " ".join([src, *targets]))
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class ReductionArtifact:
    name: str
    source: object
    target: object
    parameter_in: int
    parameter_out: int
    growth_bound: str
    lift: LiftMap
    witness: TreeDecomposition | None = None


REDUCTION_NAMES = (
    "atm-tcmc",
    "tcmc-tcmis",
    "tcmis-listcol",
    "listcol-precol",
    "tcmis-negcnf",
    "negcnf-poscnf",
    "part-gencnf",
    "poscnf-logtwis",
    "is-vc",
    "vc-rbds",
    "rbds-ds",
)


def _require_nonempty_classes(instance: TcmcInstance, what: str):
    for key in sorted(instance.classes):
        if not instance.classes[key]:
            raise InvariantViolation(f"{what} requires nonempty classes, {key} is empty")


# ==================================== shaped machine acceptance to cliques


def _block_view(beta: int, blocks: int, tape: tuple[str, ...], work_head: int):
    """Per-block (position tag, content) encoding of a work tape."""
    head_block = (work_head - 1) // beta + 1
    in_block = work_head - (head_block - 1) * beta
    out = []
    for j in range(1, blocks + 1):
        content = tape[(j - 1) * beta: j * beta]
        if j < head_block:
            tag = BEFORE
        elif j > head_block:
            tag = AFTER
        else:
            tag = in_block
        out.append((tag, content))
    return out


def _tag_num(tag, beta: int) -> int:
    # movement arithmetic: a block that just lost the head to the left reads
    # "after" (numeric 0), to the right "before" (numeric beta+1)
    if tag == AFTER:
        return 0
    if tag == BEFORE:
        return beta + 1
    return tag


def _intra_edge(a, b, beta: int) -> bool:
    """Consecutive-color constraint inside one tree node."""
    (qa, pa, ta, _wa) = a
    (qb, pb, tb, _wb) = b
    if qa != qb or pa != pb:
        return False
    if ta == tb and ta in (BEFORE, AFTER):
        return True
    if isinstance(ta, int) and tb == AFTER:
        return True
    if ta == BEFORE and isinstance(tb, int):
        return True
    return False


def reduce_atm_to_tcmc(machine: MachineSpec, x: str, shape: OrderedTree,
                       blocks: int, beta: int) -> ReductionArtifact:
    """Encode shaped acceptance of a stack-free machine as a tree-chained
    multicolor clique instance.

    The work tape (blocks*beta cells over the binary alphabet with blank 0)
    is split into one color class per block; a vertex (q, p, tag, content)
    records the machine state, input head, the block's position relative to
    the work head, and the block content.  Intra-node edges force the chosen
    vertices of one node to encode a single configuration, cross-node edges
    on equal colors encode machine transitions (restricted to the first or
    second universal transition toward the first or second child), and the
    remaining non-constraining pairs are completed into cliques.
    """
    if machine.uses_stack:
        raise InvariantViolation("atm-tcmc requires a stack-free machine")
    if blocks < 1 or beta < 1:
        raise InvariantViolation("blocks and beta must be >= 1")
    if machine.work_cells != blocks * beta:
        raise InvariantViolation(
            f"work tape has {machine.work_cells} cells, need blocks*beta = {blocks * beta}")
    if tuple(machine.work_alphabet) != ("0", "1") and tuple(machine.work_alphabet) != ("0",):
        raise InvariantViolation(
            "atm-tcmc requires the binary work alphabet '01' with blank 0")
    shape.validate_binary()

    npos = len(x) + 2  # head positions 0..len+1 including both boundary markers
    tags = [BEFORE, AFTER] + list(range(1, beta + 1))
    contents = ["".join(bits) for bits in itertools.product(*(["01"] * beta))]

    def role_states(node: int) -> list[str]:
        kids = shape.child_list(node)
        if not kids:
            return [q for q in machine.states if q in machine.accepting]
        if len(kids) == 2:
            return [q for q in machine.states
                    if machine.mode[q] == "univ" and q not in machine.accepting]
        return [q for q in machine.states
                if machine.mode[q] in ("det", "exist") and q not in machine.accepting]

    init_blocks = _block_view(beta, blocks, (machine.blank,) * machine.work_cells, 1)

    labels_of: dict[tuple[int, int], list] = {}
    for i in shape.nodes():
        states = role_states(i)
        for j in range(1, blocks + 1):
            if i == shape.root:
                tag, content = init_blocks[j - 1]
                labels = [(machine.initial, 1, tag, "".join(content))]
                labels = [lab for lab in labels if lab[0] in states]
            else:
                labels = [(q, p, tag, w)
                          for q in states
                          for p in range(0, npos)
                          for tag in tags
                          for w in contents]
            labels_of[(i, j)] = labels
            cap = len(machine.states) * npos * (beta + 2) * (1 << beta)
            assert len(labels) <= cap

    vid: dict[tuple[int, int, tuple], int] = {}
    label_of_vertex: dict[int, tuple[int, int, tuple]] = {}
    nxt = 1
    for key in sorted(labels_of):
        for lab in labels_of[key]:
            vid[(key[0], key[1], lab)] = nxt
            label_of_vertex[nxt] = (key[0], key[1], lab)
            nxt += 1
    total = nxt - 1

    edges: set[tuple[int, int]] = set()

    def connect(u: int, v: int):
        edges.add(normalize_edge(u, v))

    def transition_edge(parent_lab, child_lab, allowed_actions) -> bool:
        q, p, tag, w = parent_lab
        q2, p2, tag2, w2 = child_lab
        if tag in (BEFORE, AFTER):
            # block without the head: content is untouched; the pairs also
            # admit the head entering this block at its first or last cell
            pairs_ok = (
                (tag == AFTER and tag2 == AFTER)
                or (tag == BEFORE and tag2 == BEFORE)
                or (tag == AFTER and tag2 == 1)
                or (tag == BEFORE and tag2 == beta))
            return pairs_ok and w == w2
        # head-bearing block: some machine transition must explain the step
        for act in allowed_actions(q, input_symbol(x, p), w[tag - 1]):
            if act.state != q2:
                continue
            if p + act.di != p2:
                continue
            if _tag_num(tag2, beta) != tag + act.dw:
                continue
            expect = w[:tag - 1] + act.write + w[tag:]
            if expect == w2:
                return True
        return False

    for i in shape.nodes():
        # intra-node constraint edges on consecutive colors, completion beyond
        for j1 in range(1, blocks + 1):
            for j2 in range(j1 + 1, blocks + 1):
                for lab_a in labels_of[(i, j1)]:
                    for lab_b in labels_of[(i, j2)]:
                        if j2 == j1 + 1:
                            keep = _intra_edge(lab_a, lab_b, beta)
                        else:
                            keep = True
                        if keep:
                            connect(vid[(i, j1, lab_a)], vid[(i, j2, lab_b)])

    for parent in shape.nodes():
        kids = shape.child_list(parent)
        for idx, child in enumerate(kids):
            if len(kids) == 2:
                def allowed(q, a, w, _idx=idx):
                    acts = machine.transitions.get((q, a, w), ())
                    return acts[_idx:_idx + 1]
            else:
                def allowed(q, a, w):
                    return machine.transitions.get((q, a, w), ())
            for j in range(1, blocks + 1):
                for lab_a in labels_of[(parent, j)]:
                    for lab_b in labels_of[(child, j)]:
                        # the work head must stay on the tape globally
                        if isinstance(lab_a[2], int):
                            ghead = (j - 1) * beta + lab_a[2]
                            moved = _tag_num(lab_b[2], beta) - lab_a[2]
                            if not 1 <= ghead + moved <= blocks * beta:
                                continue
                        if transition_edge(lab_a, lab_b, allowed):
                            connect(vid[(parent, j, lab_a)], vid[(child, j, lab_b)])
            # completion across the tree edge for different colors
            for j1 in range(1, blocks + 1):
                for j2 in range(1, blocks + 1):
                    if j1 == j2:
                        continue
                    for lab_a in labels_of[(parent, j1)]:
                        for lab_b in labels_of[(child, j2)]:
                            connect(vid[(parent, j1, lab_a)], vid[(child, j2, lab_b)])

    graph = Graph(n=total, edges=frozenset(edges))
    classes = {key: frozenset(vid[(key[0], key[1], lab)] for lab in labs)
               for key, labs in labels_of.items()}
    target = TcmcInstance(tree=shape, k=blocks, classes=classes, graph=graph)

    def encode_part(node: int, part) -> dict[tuple[int, int], int]:
        q, p, tape, wh = part
        out = {}
        for j, (tag, content) in enumerate(_block_view(beta, blocks, tape, wh), start=1):
            out[(node, j)] = vid[(node, j, (q, p, tag, "".join(content)))]
        return out

    def forward(run: dict[int, tuple]) -> dict[tuple[int, int], int]:
        choice = {}
        for node, part in run.items():
            choice.update(encode_part(node, part))
        return choice

    def backward(choice: dict[tuple[int, int], int]) -> dict[int, tuple]:
        run = {}
        for node in shape.nodes():
            per_block = [label_of_vertex[choice[(node, j)]][2]
                         for j in range(1, blocks + 1)]
            q, p = per_block[0][0], per_block[0][1]
            head_block = next(j for j, lab in enumerate(per_block, start=1)
                              if isinstance(lab[2], int))
            wh = (head_block - 1) * beta + per_block[head_block - 1][2]
            tape = tuple(ch for lab in per_block for ch in lab[3])
            run[node] = (q, p, tape, wh)
        return run

    records = tuple(
        (f"{lab[0]}@{lab[1]}/{lab[2]}/{lab[3]}", (f"v{v}",))
        for v, (node, color, lab) in sorted(label_of_vertex.items()))
    return ReductionArtifact(
        name="atm-tcmc", source=(machine, x, shape, blocks, beta), target=target,
        parameter_in=blocks, parameter_out=blocks, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=forward, backward=backward))


# ======================================== clique/independent-set complement


def complement_tcmc_to_tcmis(instance: TcmcInstance) -> ReductionArtifact:
    """Complement the graph on all constrained class pairs, turning
    tree-chained multicolor cliques into independent sets and back."""
    edges = set()
    for a, b in instance.constrained_pairs():
        for u in instance.classes[a]:
            for v in instance.classes[b]:
                if not instance.graph.has_edge(u, v):
                    edges.add(normalize_edge(u, v))
    graph = Graph(n=instance.graph.n, edges=frozenset(edges),
                  labels=dict(instance.graph.labels))
    target = TcmcInstance(tree=instance.tree, k=instance.k,
                          classes=dict(instance.classes), graph=graph)
    identity = lambda sol: dict(sol)
    records = tuple((f"v{v}", (f"v{v}",)) for v in instance.graph.vertices())
    return ReductionArtifact(
        name="tcmc-tcmis", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=identity, backward=identity))


# ============================================================ list coloring


def reduce_tcmis_to_listcoloring(instance: TcmcInstance) -> ReductionArtifact:
    """One class vertex per (node, color) with its class as color list, one
    degree-2 conflict vertex per source edge; colorable iff a tree-chained
    multicolor independent set exists.  Emits the 2k-1 width witness."""
    _require_nonempty_classes(instance, "tcmis-listcol")
    keys = sorted(instance.classes)
    class_vertex = {key: idx for idx, key in enumerate(keys, start=1)}
    nxt = len(keys) + 1
    conflict_vertex: dict[tuple[int, int], int] = {}
    edges = set()
    lists: dict[int, frozenset[int]] = {}
    for key in keys:
        lists[class_vertex[key]] = frozenset(instance.classes[key])
    for e in sorted(instance.graph.edges):
        u, w = e
        cu = class_vertex[instance.class_of(u)]
        cw = class_vertex[instance.class_of(w)]
        conflict_vertex[e] = nxt
        lists[nxt] = frozenset({u, w})
        edges.add(normalize_edge(nxt, cu))
        edges.add(normalize_edge(nxt, cw))
        nxt += 1
    graph = Graph(n=nxt - 1, edges=frozenset(edges))
    palette = frozenset(instance.graph.vertices())
    target = ListColoringInstance(graph=graph, palette=palette, lists=lists)

    # witness: per structure node the bag of its own and its parent's class
    # vertices; per conflict vertex a 3-element bag under the deeper node
    tree = instance.tree
    base_bags: dict[int, set[int]] = {}
    for i in tree.nodes():
        bag = {class_vertex[(i, j)] for j in range(1, instance.k + 1)}
        p = tree.parent(i)
        if p is not None:
            bag |= {class_vertex[(p, j)] for j in range(1, instance.k + 1)}
        base_bags[i] = bag
    children: dict[int, list[int]] = {i: list(tree.child_list(i)) for i in tree.nodes()}
    bags: dict[int, frozenset[int]] = {i: frozenset(base_bags[i]) for i in tree.nodes()}
    nxt_node = tree.n + 1
    for e in sorted(conflict_vertex):
        u, w = e
        iu, _ = instance.class_of(u)
        iw, _ = instance.class_of(w)
        if iu == iw:
            host = iu
        else:
            host = iu if tree.parent(iu) == iw else iw
        cu = class_vertex[instance.class_of(u)]
        cw = class_vertex[instance.class_of(w)]
        bags[nxt_node] = frozenset({conflict_vertex[e], cu, cw})
        children.setdefault(host, []).append(nxt_node)
        nxt_node += 1
    wtree = OrderedTree(n=nxt_node - 1,
                        children={i: tuple(cs) for i, cs in children.items() if cs})
    witness = TreeDecomposition(tree=wtree, bags=bags)

    def forward(choice: dict[tuple[int, int], int]) -> dict[int, int]:
        coloring = {class_vertex[key]: choice[key] for key in keys}
        chosen = set(choice.values())
        for e, cv in conflict_vertex.items():
            u, w = e
            free = [c for c in (u, w) if c not in chosen]
            coloring[cv] = min(free)
        return coloring

    def backward(coloring: dict[int, int]) -> dict[tuple[int, int], int]:
        return {key: coloring[class_vertex[key]] for key in keys}

    records = tuple((f"class:{i}:{j}", (f"v{class_vertex[(i, j)]}",)) for i, j in keys)
    records += tuple((f"edge:{u}:{w}", (f"v{cv}",))
                     for (u, w), cv in sorted(conflict_vertex.items()))
    return ReductionArtifact(
        name="tcmis-listcol", source=instance, target=target,
        parameter_in=instance.k, parameter_out=witness.width(),
        growth_bound="k'<=2k-1",
        lift=LiftMap(records=records, forward=forward, backward=backward),
        witness=witness)


def reduce_listcoloring_to_precoloring(
        instance: ListColoringInstance,
        witness: TreeDecomposition | None = None) -> ReductionArtifact:
    """Replace color lists by precolored pendant neighbors, one per forbidden
    color of each vertex; an extension exists iff the source is colorable.

    When a decomposition witness for the source graph is supplied, it is
    extended with one {vertex, pendant} bag per pendant (width +<= 1)."""
    n = instance.graph.n
    palette = instance.palette
    pendants: dict[tuple[int, int], int] = {}
    nxt = n + 1
    edges = set(instance.graph.edges)
    for v in sorted(instance.graph.vertices()):
        for c in sorted(palette - instance.effective_list(v)):
            pendants[(v, c)] = nxt
            edges.add(normalize_edge(v, nxt))
            nxt += 1
    graph = Graph(n=nxt - 1, edges=frozenset(edges))
    lists = {v: palette for v in graph.vertices()}
    precolored = {pv: c for (v, c), pv in pendants.items()}
    target = ListColoringInstance(graph=graph, palette=palette,
                                  lists=lists, precolored=precolored)

    out_witness = None
    if witness is not None:
        host: dict[int, int] = {}
        for i in sorted(witness.bags):
            for v in witness.bags[i]:
                host.setdefault(v, i)
        children = {i: list(witness.tree.child_list(i)) for i in witness.tree.nodes()}
        bags = dict(witness.bags)
        nxt_node = witness.tree.n + 1
        for (v, _c), pv in sorted(pendants.items()):
            bags[nxt_node] = frozenset({v, pv})
            children.setdefault(host[v], []).append(nxt_node)
            nxt_node += 1
        wtree = OrderedTree(n=nxt_node - 1,
                            children={i: tuple(cs) for i, cs in children.items() if cs})
        out_witness = TreeDecomposition(tree=wtree, bags=bags)

    def forward(coloring: dict[int, int]) -> dict[int, int]:
        out = dict(coloring)
        out.update(precolored)
        return out

    def backward(coloring: dict[int, int]) -> dict[int, int]:
        return {v: coloring[v] for v in instance.graph.vertices()}

    records = tuple((f"forbid:{v}:{c}", (f"v{pv}",))
                    for (v, c), pv in sorted(pendants.items()))
    p_in = witness.width() if witness is not None else 0
    p_out = out_witness.width() if out_witness is not None else 0
    return ReductionArtifact(
        name="listcol-precol", source=instance, target=target,
        parameter_in=p_in, parameter_out=p_out, growth_bound="width+<=1",
        lift=LiftMap(records=records, forward=forward, backward=backward),
        witness=out_witness)


# ======================================================= tree-chained CNFs


def reduce_tcmis_to_negcnf(instance: TcmcInstance) -> ReductionArtifact:
    """One variable per vertex, cells mirroring the classes, one all-negative
    clause per edge; satisfiable under exactly-one-per-cell iff a
    tree-chained multicolor independent set exists."""
    _require_nonempty_classes(instance, "tcmis-negcnf")
    variable_sets = {
        i: frozenset(v for j in range(1, instance.k + 1)
                     for v in instance.classes[(i, j)])
        for i in instance.tree.nodes()}
    partition = {key: frozenset(vs) for key, vs in instance.classes.items()}
    clauses = tuple((-u, -v) for u, v in sorted(instance.graph.edges))
    target = TreeChainedCnf(
        tree=instance.tree, variable_sets=variable_sets, clauses=clauses,
        variant="negative-partitioned", k=instance.k, partition=partition)

    def forward(choice: dict[tuple[int, int], int]) -> frozenset[int]:
        return frozenset(choice.values())

    def backward(true_vars: frozenset[int]) -> dict[tuple[int, int], int]:
        out = {}
        for key in sorted(partition):
            picked = sorted(true_vars & partition[key])
            out[key] = picked[0]
        return out

    records = tuple((f"v{v}", (target.var_names[v],))
                    for v in instance.graph.vertices())
    return ReductionArtifact(
        name="tcmis-negcnf", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=forward, backward=backward))


def reduce_negcnf_to_poscnf(instance: TreeChainedCnf) -> ReductionArtifact:
    """Replace every negative literal on a cell variable by the disjunction
    of the other variables of its cell; a literal on a singleton cell
    contributes nothing, so a clause of only such literals is emitted empty
    (unsatisfiable under the partition, mirroring the source semantics)."""
    if instance.variant != "negative-partitioned":
        raise InvariantViolation("negcnf-poscnf needs a negative-partitioned instance")
    assert instance.partition is not None
    cell_of = {}
    for key, cell in instance.partition.items():
        for v in cell:
            cell_of[v] = key
    clauses = []
    for clause in instance.clauses:
        out = []
        for lit in clause:
            v = -lit
            others = sorted(instance.partition[cell_of[v]] - {v})
            out.extend(others)
        clauses.append(tuple(out))
    target = TreeChainedCnf(
        tree=instance.tree, variable_sets=dict(instance.variable_sets),
        clauses=tuple(clauses), variant="positive-partitioned", k=instance.k,
        partition=dict(instance.partition), var_names=dict(instance.var_names))
    identity = lambda sol: frozenset(sol)
    records = tuple((instance.var_names[v], (instance.var_names[v],))
                    for v in instance.all_variables())
    return ReductionArtifact(
        name="negcnf-poscnf", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=identity, backward=identity))


def reduce_partitioned_to_general_cnf(instance: TreeChainedCnf) -> ReductionArtifact:
    """Drop the partition and enforce it with clauses instead: per cell one
    all-positive clause (pick at least one) and all pairwise negative
    clauses (pick at most one); weight k per node set."""
    if instance.variant not in ("positive-partitioned", "negative-partitioned"):
        raise InvariantViolation("part-gencnf needs a partitioned instance")
    assert instance.partition is not None
    clauses = list(instance.clauses)
    for key in sorted(instance.partition):
        cell = sorted(instance.partition[key])
        clauses.append(tuple(cell))
        for a, b in itertools.combinations(cell, 2):
            clauses.append((-a, -b))
    target = TreeChainedCnf(
        tree=instance.tree, variable_sets=dict(instance.variable_sets),
        clauses=tuple(clauses), variant="general", k=instance.k,
        var_names=dict(instance.var_names))
    identity = lambda sol: frozenset(sol)
    records = tuple((instance.var_names[v], (instance.var_names[v],))
                    for v in instance.all_variables())
    return ReductionArtifact(
        name="part-gencnf", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=identity, backward=identity))


# ==================================== independent set at logarithmic width


def _ladder_completion(ell: int, pos: int | None) -> tuple[list, int]:
    """Best choice of path vertices of one clause gadget given that literal
    vertex pos (or none) is in the independent set.

    Vertices are tagged ("p", t) for t in 0..ell+1 and ("pp", t) for t in
    1..ell; returns (chosen tags, count).  Exact DP over the ladder columns,
    state = (p_t chosen, p'_t chosen)."""
    best: dict[tuple[int, int], tuple[int, tuple]] = {
        (0, 0): (0, ()),
        (1, 0): (1, (("p", 0),)),
    }
    for t in range(1, ell + 2):
        has_pp_col = 1 <= t <= ell
        nxt: dict[tuple[int, int], tuple[int, tuple]] = {}
        for p_in in (0, 1):
            for pp_in in (0, 1):
                if pp_in and not has_pp_col:
                    continue
                if p_in and pp_in:
                    continue  # rung edge p_t -- p'_t
                if pos is not None and t == pos and (p_in or pp_in):
                    continue  # both are neighbors of the chosen literal vertex
                tags: tuple = ()
                if p_in:
                    tags += (("p", t),)
                if pp_in:
                    tags += (("pp", t),)
                for (p_prev, pp_prev), (val, chosen) in best.items():
                    if p_in and p_prev:
                        continue  # path edge p_{t-1} -- p_t
                    if pp_in and pp_prev:
                        continue  # path edge p'_{t-1} -- p'_t
                    cand = (val + len(tags), chosen + tags)
                    cur = nxt.get((p_in, pp_in))
                    if cur is None or cand[0] > cur[0]:
                        nxt[(p_in, pp_in)] = cand
        best = nxt
    val, chosen = max(best.values(), key=lambda it: it[0])
    return list(chosen), val


def reduce_poscnf_to_logtw_is(instance: TreeChainedCnf) -> ReductionArtifact:
    """Variable gadgets of matched bit edges plus double-path clause gadgets,
    with the target weight counting one vertex per gadget edge and padded
    clause length + 2 per clause; independent set of that size exists iff
    the source is satisfiable.

    The source is normalized first (one clause per cell holding exactly its
    variables), then clause lengths are padded to even with dummy literals
    that get path positions but no literal vertex."""
    if instance.variant != "positive-partitioned":
        raise InvariantViolation("poscnf-logtwis needs a positive-partitioned instance")
    assert instance.partition is not None
    for key in sorted(instance.partition):
        if not instance.partition[key]:
            raise InvariantViolation(f"cell {key} is empty")

    cell_keys = sorted(instance.partition)
    cell_vars = {key: sorted(instance.partition[key]) for key in cell_keys}
    cell_of = {}
    for key in cell_keys:
        for v in cell_vars[key]:
            cell_of[v] = key
    bits_of = {key: max(len(cell_vars[key]) - 1, 0).bit_length()
               for key in cell_keys}

    # normalization precedes parity padding
    clauses = [tuple(c) for c in instance.clauses]
    clauses += [tuple(cell_vars[key]) for key in cell_keys]
    padded: list[list[int | None]] = []
    for clause in clauses:
        lits: list[int | None] = list(clause)
        if len(lits) % 2 == 1:
            lits.append(None)
        padded.append(lits)

    nxt = 1
    edges: set[tuple[int, int]] = set()

    def new_vertex() -> int:
        nonlocal nxt
        v = nxt
        nxt += 1
        return v

    hat: dict[tuple[tuple[int, int], int, int], int] = {}  # (cell, alpha, bit)
    for key in cell_keys:
        for alpha in range(1, bits_of[key] + 1):
            h0 = new_vertex()
            h1 = new_vertex()
            hat[(key, alpha, 0)] = h0
            hat[(key, alpha, 1)] = h1
            edges.add(normalize_edge(h0, h1))

    def var_bits(v: int) -> str:
        key = cell_of[v]
        index = cell_vars[key].index(v)
        t = bits_of[key]
        return format(index, f"0{t}b") if t else ""

    gadget: list[dict] = []
    for lits in padded:
        ell = len(lits)
        p = {t: new_vertex() for t in range(0, ell + 2)}
        pp = {t: new_vertex() for t in range(1, ell + 1)}
        lit_vertex: dict[int, int] = {}
        for t in range(0, ell + 1):
            edges.add(normalize_edge(p[t], p[t + 1]))
        for t in range(1, ell):
            edges.add(normalize_edge(pp[t], pp[t + 1]))
        for t in range(1, ell + 1):
            edges.add(normalize_edge(p[t], pp[t]))
        for t, lit in enumerate(lits, start=1):
            if lit is None:
                continue
            v = new_vertex()
            lit_vertex[t] = v
            edges.add(normalize_edge(v, p[t]))
            edges.add(normalize_edge(v, pp[t]))
            key = cell_of[lit]
            for alpha, b in enumerate(var_bits(lit), start=1):
                edges.add(normalize_edge(v, hat[(key, alpha, 1 - int(b))]))
        gadget.append({"lits": lits, "ell": ell, "p": p, "pp": pp,
                       "lit_vertex": lit_vertex})

    n = nxt - 1
    graph = Graph(n=n, edges=frozenset(edges))
    weight = sum(bits_of.values()) + sum(2 + g["ell"] for g in gadget)

    # decomposition: one base bag per structure node with its own and its
    # parent's variable-gadget vertices; each clause gadget is a chain of
    # window bags (extended by the base bag) under the deeper scope node
    tree = instance.tree
    gvs: dict[int, set[int]] = {i: set() for i in tree.nodes()}
    for key in cell_keys:
        for alpha in range(1, bits_of[key] + 1):
            gvs[key[0]].update((hat[(key, alpha, 0)], hat[(key, alpha, 1)]))
    base: dict[int, set[int]] = {}
    for i in tree.nodes():
        bag = set(gvs[i])
        parent = tree.parent(i)
        if parent is not None:
            bag |= gvs[parent]
        base[i] = bag
    children = {i: list(tree.child_list(i)) for i in tree.nodes()}
    bags: dict[int, frozenset[int]] = {i: frozenset(base[i]) for i in tree.nodes()}
    nxt_node = tree.n + 1
    for g in gadget:
        scope = {cell_of[lit][0] for lit in g["lits"] if lit is not None}
        if not scope:
            host = tree.root
        elif len(scope) == 1:
            host = next(iter(scope))
        else:
            a, b = sorted(scope)
            host = a if tree.parent(a) == b else b
        prev = None
        for t in range(0, g["ell"] + 1):
            window = {g["p"][t], g["p"][t + 1]}
            for tt in (t, t + 1):
                if tt in g["pp"]:
                    window.add(g["pp"][tt])
                if tt in g["lit_vertex"]:
                    window.add(g["lit_vertex"][tt])
            bags[nxt_node] = frozenset(window | base[host])
            if prev is None:
                children.setdefault(host, []).append(nxt_node)
            else:
                children.setdefault(prev, []).append(nxt_node)
            prev = nxt_node
            nxt_node += 1
    wtree = OrderedTree(n=nxt_node - 1,
                        children={i: tuple(cs) for i, cs in children.items() if cs})
    witness = TreeDecomposition(tree=wtree, bags=bags)
    width = witness.width()
    k_out = -(-width // ceil_log2(n))  # ceil division
    target = LogTwGraphInstance(graph=graph, decomposition=witness,
                                target_weight=weight, k=k_out, problem="is")

    def forward(true_vars: frozenset[int]) -> frozenset[int]:
        chosen: set[int] = set()
        for key in cell_keys:
            picked = sorted(true_vars & instance.partition[key])
            bits = var_bits(picked[0])
            for alpha, b in enumerate(bits, start=1):
                chosen.add(hat[(key, alpha, int(b))])
        for g in gadget:
            pos = None
            for t, lit in enumerate(g["lits"], start=1):
                if lit is not None and lit in true_vars:
                    pos = t
                    break
            tags, count = _ladder_completion(g["ell"], pos)
            if pos is not None:
                chosen.add(g["lit_vertex"][pos])
            for kind, t in tags:
                chosen.add(g["p"][t] if kind == "p" else g["pp"][t])
        return frozenset(chosen)

    def backward(solution: frozenset[int]) -> frozenset[int]:
        true_vars = set()
        for key in cell_keys:
            t = bits_of[key]
            bits = ""
            for alpha in range(1, t + 1):
                bits += "1" if hat[(key, alpha, 1)] in solution else "0"
            index = int(bits, 2) if bits else 0
            if index < len(cell_vars[key]):
                true_vars.add(cell_vars[key][index])
        return frozenset(true_vars)

    records = tuple(
        (instance.var_names[v],
         tuple(f"v{hat[(cell_of[v], alpha, int(b))]}"
               for alpha, b in enumerate(var_bits(v), start=1)))
        for v in sorted(cell_of))
    return ReductionArtifact(
        name="poscnf-logtwis", source=instance, target=target,
        parameter_in=instance.k, parameter_out=k_out,
        growth_bound="k'=ceil(width/ceil(log2 n))",
        lift=LiftMap(records=records, forward=forward, backward=backward),
        witness=witness)


# =========================================== covering and domination chain


def reduce_is_to_vc(instance: LogTwGraphInstance) -> ReductionArtifact:
    """Same graph and witness; a vertex cover of size n - W exists iff an
    independent set of size W does.  Lift is set complement."""
    if instance.problem != "is":
        raise InvariantViolation("is-vc needs an independent-set instance")
    target = LogTwGraphInstance(
        graph=instance.graph, decomposition=instance.decomposition,
        target_weight=instance.graph.n - instance.target_weight,
        k=instance.k, problem="vc")
    allv = frozenset(instance.graph.vertices())
    complement = lambda s: frozenset(allv - s)
    records = (("complement", ("complement",)),)
    return ReductionArtifact(
        name="is-vc", source=instance, target=target,
        parameter_in=instance.k, parameter_out=instance.k, growth_bound="k'=k",
        lift=LiftMap(records=records, forward=complement, backward=complement),
        witness=instance.decomposition)


def reduce_vc_to_rbds(instance: LogTwGraphInstance) -> ReductionArtifact:
    """Subdivide every edge: original vertices blue, subdivision vertices
    red; a set of K blue vertices dominating all red vertices is exactly a
    vertex cover of size K."""
    if instance.problem != "vc":
        raise InvariantViolation("vc-rbds needs a vertex-cover instance")
    n = instance.graph.n
    sub_vertex = {}
    edges = set()
    labels = {v: "blue" for v in instance.graph.vertices()}
    nxt = n + 1
    for e in sorted(instance.graph.edges):
        u, v = e
        sub_vertex[e] = nxt
        labels[nxt] = "red"
        edges.add(normalize_edge(u, nxt))
        edges.add(normalize_edge(v, nxt))
        nxt += 1
    graph = Graph(n=nxt - 1, edges=frozenset(edges), labels=labels)

    dec = instance.decomposition
    children = {i: list(dec.tree.child_list(i)) for i in dec.tree.nodes()}
    bags = dict(dec.bags)
    nxt_node = dec.tree.n + 1
    for e in sorted(sub_vertex):
        u, v = e
        host = next(i for i in sorted(dec.bags)
                    if u in dec.bags[i] and v in dec.bags[i])
        bags[nxt_node] = frozenset({u, v, sub_vertex[e]})
        children.setdefault(host, []).append(nxt_node)
        nxt_node += 1
    wtree = OrderedTree(n=nxt_node - 1,
                        children={i: tuple(cs) for i, cs in children.items() if cs})
    witness = TreeDecomposition(tree=wtree, bags=bags)
    k_out = max(-(-witness.width() // ceil_log2(graph.n)), 1)
    target = LogTwGraphInstance(graph=graph, decomposition=witness,
                                target_weight=instance.target_weight,
                                k=k_out, problem="rbds")
    identity = lambda s: frozenset(s)
    records = tuple((f"e:{u}:{v}", (f"v{r}",)) for (u, v), r in sorted(sub_vertex.items()))
    return ReductionArtifact(
        name="vc-rbds", source=instance, target=target,
        parameter_in=instance.k, parameter_out=k_out, growth_bound="width+<=1",
        lift=LiftMap(records=records, forward=identity, backward=identity),
        witness=witness)


def reduce_rbds_to_ds(instance: LogTwGraphInstance) -> ReductionArtifact:
    """Attach x1 adjacent to x0 and to all blue vertices; the minimum
    dominating set of the new graph is exactly one larger than the minimum
    red-blue dominating set."""
    if instance.problem != "rbds":
        raise InvariantViolation("rbds-ds needs a red-blue dominating set instance")
    n = instance.graph.n
    x0, x1 = n + 1, n + 2
    edges = set(instance.graph.edges)
    edges.add(normalize_edge(x0, x1))
    blues = instance.blue_vertices()
    for b in blues:
        edges.add(normalize_edge(b, x1))
    labels = dict(instance.graph.labels)
    graph = Graph(n=n + 2, edges=frozenset(edges), labels=labels)

    dec = instance.decomposition
    children = {i: list(dec.tree.child_list(i)) for i in dec.tree.nodes()}
    bags = {i: frozenset(set(b) | {x1}) for i, b in dec.bags.items()}
    new_node = dec.tree.n + 1
    bags[new_node] = frozenset({x0, x1})
    children.setdefault(dec.tree.root, []).append(new_node)
    wtree = OrderedTree(n=new_node,
                        children={i: tuple(cs) for i, cs in children.items() if cs})
    witness = TreeDecomposition(tree=wtree, bags=bags)
    k_out = max(-(-witness.width() // ceil_log2(graph.n)), 1)
    target = LogTwGraphInstance(graph=graph, decomposition=witness,
                                target_weight=instance.target_weight + 1,
                                k=k_out, problem="ds")

    red_ends = {}
    adj = instance.graph.adjacency()
    for r in instance.red_vertices():
        red_ends[r] = sorted(adj[r] & set(blues))

    def forward(s: frozenset[int]) -> frozenset[int]:
        return frozenset(s | {x1})

    def backward(s: frozenset[int]) -> frozenset[int]:
        out = set(v for v in s if v <= n and instance.graph.labels.get(v) == "blue")
        for r in instance.red_vertices():
            if r in s and not (out & set(red_ends[r])):
                if red_ends[r]:
                    out.add(red_ends[r][0])
        return frozenset(out)

    records = (("x0", (f"v{x0}",)), ("x1", (f"v{x1}",)))
    return ReductionArtifact(
        name="rbds-ds", source=instance, target=target,
        parameter_in=instance.k, parameter_out=k_out, growth_bound="width+<=1",
        lift=LiftMap(records=records, forward=forward, backward=backward),
        witness=witness)


REDUCTIONS = {
    "atm-tcmc": reduce_atm_to_tcmc,
    "tcmc-tcmis": complement_tcmc_to_tcmis,
    "tcmis-listcol": reduce_tcmis_to_listcoloring,
    "listcol-precol": reduce_listcoloring_to_precoloring,
    "tcmis-negcnf": reduce_tcmis_to_negcnf,
    "negcnf-poscnf": reduce_negcnf_to_poscnf,
    "part-gencnf": reduce_partitioned_to_general_cnf,
    "poscnf-logtwis": reduce_poscnf_to_logtw_is,
    "is-vc": reduce_is_to_vc,
    "vc-rbds": reduce_vc_to_rbds,
    "rbds-ds": reduce_rbds_to_ds,
}

assert tuple(REDUCTIONS) == REDUCTION_NAMES
