"""Line-oriented text formats for every instance type.

All files are UTF-8, one record per line, lines whose first token starts
with '#' are comments, and the first record is the versioned header
"xalpwb 1".  parse_instance(tag, text) and serialize_instance(x) round-trip:
parse(serialize(x)) is structurally equal to x.
"""

from __future__ import annotations

from .instances import (
    FormatError,
    Graph,
    ListColoringInstance,
    LogTwGraphInstance,
    OrderedTree,
    TcmcInstance,
    TreeChainedCnf,
    TreeDecomposition,
    normalize_edge,
)
from .machines import Action, MachineSpec

HEADER = "xalpwb 1"

FORMAT_TAGS = ("graph", "tree", "decomposition", "tcmc", "cnf",
               "listcol", "logtw", "machine")


def _records(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line.split()))
    return out


def _check_header(recs: list[tuple[int, list[str]]]) -> list[tuple[int, list[str]]]:
    if not recs:
        raise FormatError("empty instance text")
    lineno, toks = recs[0]
    if toks != HEADER.split():
        raise FormatError(f"expected header {HEADER!r}", lineno)
    return recs[1:]


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"{what}: expected integer, got {tok!r}", lineno)


def parse_instance(format_tag: str, text: str):
    """Parse text in the tagged format into a validated instance."""
    if format_tag not in FORMAT_TAGS:
        raise FormatError(f"unknown format tag {format_tag!r}")
    recs = _check_header(_records(text))
    parser = {
        "graph": _parse_graph,
        "tree": _parse_tree,
        "decomposition": _parse_decomposition,
        "tcmc": _parse_tcmc,
        "cnf": _parse_cnf,
        "listcol": _parse_listcol,
        "logtw": _parse_logtw,
        "machine": _parse_machine,
    }[format_tag]
    return parser(recs)


def serialize_instance(instance) -> str:
    """Serialize a validated instance; inverse of parse_instance."""
    lines = [HEADER]
    if isinstance(instance, Graph):
        lines += _graph_lines(instance)
    elif isinstance(instance, OrderedTree):
        lines += _tree_lines(instance)
    elif isinstance(instance, TreeDecomposition):
        lines += _decomposition_lines(instance)
    elif isinstance(instance, TcmcInstance):
        lines.append(f"tcmc {instance.k}")
        lines += _graph_lines(instance.graph)
        lines += _tree_lines(instance.tree)
        for (i, j) in sorted(instance.classes):
            vs = " ".join(str(v) for v in sorted(instance.classes[(i, j)]))
            lines.append(f"class {i} {j} {vs}".rstrip())
    elif isinstance(instance, TreeChainedCnf):
        lines.append(f"cnf {instance.variant} {instance.k}")
        lines += _tree_lines(instance.tree)
        slot = {}
        if instance.partition is not None:
            for (i, j), cell in instance.partition.items():
                for x in cell:
                    slot[x] = j
        for x in instance.all_variables():
            i = instance.node_of_var(x)
            name = instance.var_names[x]
            if x in slot:
                lines.append(f"var {i} {name} {slot[x]}")
            else:
                lines.append(f"var {i} {name}")
        for clause in instance.clauses:
            lits = " ".join(
                instance.var_names[lit] if lit > 0 else "-" + instance.var_names[-lit]
                for lit in clause)
            lines.append(f"c {lits}".rstrip())
    elif isinstance(instance, ListColoringInstance):
        lines.append("listcol")
        lines += _graph_lines(instance.graph)
        lines.append("palette " + " ".join(str(c) for c in sorted(instance.palette)))
        for v in sorted(instance.lists):
            cs = " ".join(str(c) for c in sorted(instance.lists[v]))
            lines.append(f"list {v} {cs}")
        for v in sorted(instance.precolored):
            lines.append(f"pre {v} {instance.precolored[v]}")
    elif isinstance(instance, LogTwGraphInstance):
        lines.append(f"logtw {instance.k} {instance.target_weight}")
        lines.append(f"problem {instance.problem}")
        lines += _graph_lines(instance.graph)
        lines += _decomposition_lines(instance.decomposition)
    elif isinstance(instance, MachineSpec):
        lines += _machine_lines(instance)
    else:
        raise FormatError(f"cannot serialize {type(instance).__name__}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- graph

def _graph_lines(g: Graph) -> list[str]:
    lines = [f"p graph {g.n} {len(g.edges)}"]
    for u, v in sorted(g.edges):
        lines.append(f"e {u} {v}")
    for v in sorted(g.labels):
        lines.append(f"label {v} {g.labels[v]}")
    return lines


def _parse_graph_records(recs, allow_extra=False):
    n = m = None
    edges = set()
    labels = {}
    rest = []
    for lineno, toks in recs:
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "graph":
                raise FormatError("expected 'p graph <n> <m>'", lineno)
            if n is not None:
                raise FormatError("duplicate 'p graph' record", lineno)
            n = _int(toks[2], lineno, "vertex count")
            m = _int(toks[3], lineno, "edge count")
        elif toks[0] == "e":
            if len(toks) != 3:
                raise FormatError("expected 'e <u> <v>'", lineno)
            u = _int(toks[1], lineno, "edge endpoint")
            v = _int(toks[2], lineno, "edge endpoint")
            if u == v:
                raise FormatError(f"self-loop at vertex {u}", lineno)
            edges.add(normalize_edge(u, v))
        elif toks[0] == "label":
            if len(toks) < 3:
                raise FormatError("expected 'label <v> <text>'", lineno)
            labels[_int(toks[1], lineno, "label vertex")] = " ".join(toks[2:])
        elif allow_extra:
            rest.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in graph", lineno)
    if n is None:
        raise FormatError("missing 'p graph' record")
    if len(edges) != m:
        raise FormatError(f"header declares {m} edges, found {len(edges)}")
    return Graph(n=n, edges=frozenset(edges), labels=labels), rest


def _parse_graph(recs) -> Graph:
    g, _ = _parse_graph_records(recs)
    return g


# ---------------------------------------------------------------- tree

def _tree_lines(t: OrderedTree) -> list[str]:
    lines = [f"t {t.n}"]
    for p in sorted(t.children):
        for order, c in enumerate(t.children[p], start=1):
            lines.append(f"a {p} {c} {order}")
    return lines


def _parse_tree_records(recs, allow_extra=False):
    n = None
    arcs: dict[int, dict[int, int]] = {}
    rest = []
    for lineno, toks in recs:
        if toks[0] == "t":
            if len(toks) != 2:
                raise FormatError("expected 't <nodes>'", lineno)
            if n is not None:
                raise FormatError("duplicate 't' record", lineno)
            n = _int(toks[1], lineno, "node count")
        elif toks[0] == "a":
            if len(toks) != 4:
                raise FormatError("expected 'a <parent> <child> <order>'", lineno)
            p = _int(toks[1], lineno, "parent")
            c = _int(toks[2], lineno, "child")
            order = _int(toks[3], lineno, "child order")
            if order < 1:
                raise FormatError("child order must be >= 1", lineno)
            if order in arcs.setdefault(p, {}):
                raise FormatError(f"duplicate child order {order} at node {p}", lineno)
            arcs[p][order] = c
        elif allow_extra:
            rest.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in tree", lineno)
    if n is None:
        raise FormatError("missing 't' record")
    children = {}
    for p, by_order in arcs.items():
        orders = sorted(by_order)
        if orders != list(range(1, len(orders) + 1)):
            raise FormatError(f"child orders of node {p} are not 1..{len(orders)}")
        children[p] = tuple(by_order[o] for o in orders)
    return OrderedTree(n=n, children=children), rest


def _parse_tree(recs) -> OrderedTree:
    t, _ = _parse_tree_records(recs)
    return t


# ------------------------------------------------------- decomposition

def _decomposition_lines(dec: TreeDecomposition) -> list[str]:
    lines = _tree_lines(dec.tree)
    for i in sorted(dec.bags):
        vs = " ".join(str(v) for v in sorted(dec.bags[i]))
        lines.append(f"bag {i} {vs}".rstrip())
    return lines


def _parse_decomposition_records(recs, allow_extra=False):
    bag_recs = []
    rest = []
    tree_recs = []
    for lineno, toks in recs:
        if toks[0] == "bag":
            if len(toks) < 2:
                raise FormatError("expected 'bag <node> <v...>'", lineno)
            i = _int(toks[1], lineno, "bag node")
            bag_recs.append((lineno, i, [_int(v, lineno, "bag vertex") for v in toks[2:]]))
        elif toks[0] in ("t", "a"):
            tree_recs.append((lineno, toks))
        elif allow_extra:
            rest.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in decomposition", lineno)
    tree, _ = _parse_tree_records(tree_recs)
    bags: dict[int, frozenset[int]] = {}
    for lineno, i, vs in bag_recs:
        if i in bags:
            raise FormatError(f"duplicate bag for node {i}", lineno)
        bags[i] = frozenset(vs)
    for i in tree.nodes():
        bags.setdefault(i, frozenset())
    return TreeDecomposition(tree=tree, bags=bags), rest


def _parse_decomposition(recs) -> TreeDecomposition:
    dec, _ = _parse_decomposition_records(recs)
    return dec


# ---------------------------------------------------------------- tcmc

def _parse_tcmc(recs) -> TcmcInstance:
    k = None
    class_recs = []
    other = []
    for lineno, toks in recs:
        if toks[0] == "tcmc":
            if len(toks) != 2:
                raise FormatError("expected 'tcmc <k>'", lineno)
            k = _int(toks[1], lineno, "color count")
        elif toks[0] == "class":
            if len(toks) < 3:
                raise FormatError("expected 'class <node> <color> <v...>'", lineno)
            i = _int(toks[1], lineno, "class node")
            j = _int(toks[2], lineno, "class color")
            vs = [_int(v, lineno, "class vertex") for v in toks[3:]]
            class_recs.append((lineno, i, j, vs))
        else:
            other.append((lineno, toks))
    if k is None:
        raise FormatError("missing 'tcmc <k>' record")
    graph_recs = [(ln, t) for ln, t in other if t[0] in ("p", "e", "label")]
    tree_recs = [(ln, t) for ln, t in other if t[0] in ("t", "a")]
    leftovers = [(ln, t) for ln, t in other
                 if t[0] not in ("p", "e", "label", "t", "a")]
    if leftovers:
        ln, t = leftovers[0]
        raise FormatError(f"unexpected record {t[0]!r} in tcmc", ln)
    graph, _ = _parse_graph_records(graph_recs)
    tree, _ = _parse_tree_records(tree_recs)
    classes: dict[tuple[int, int], frozenset[int]] = {}
    for lineno, i, j, vs in class_recs:
        if (i, j) in classes:
            raise FormatError(f"duplicate class ({i},{j})", lineno)
        classes[(i, j)] = frozenset(vs)
    for i in tree.nodes():
        for j in range(1, k + 1):
            classes.setdefault((i, j), frozenset())
    return TcmcInstance(tree=tree, k=k, classes=classes, graph=graph)


# ----------------------------------------------------------------- cnf

def _parse_cnf(recs) -> TreeChainedCnf:
    variant = None
    k = None
    var_recs = []
    clause_recs = []
    tree_recs = []
    for lineno, toks in recs:
        if toks[0] == "cnf":
            if len(toks) != 3:
                raise FormatError("expected 'cnf <variant> <k>'", lineno)
            variant = toks[1]
            k = _int(toks[2], lineno, "parameter k")
        elif toks[0] == "var":
            if len(toks) not in (3, 4):
                raise FormatError("expected 'var <node> <name> [<slot>]'", lineno)
            node = _int(toks[1], lineno, "variable node")
            slot = _int(toks[3], lineno, "variable slot") if len(toks) == 4 else None
            var_recs.append((lineno, node, toks[2], slot))
        elif toks[0] == "c":
            clause_recs.append((lineno, toks[1:]))
        elif toks[0] in ("t", "a"):
            tree_recs.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in cnf", lineno)
    if variant is None:
        raise FormatError("missing 'cnf <variant> <k>' record")
    tree, _ = _parse_tree_records(tree_recs)
    variable_sets: dict[int, set[int]] = {i: set() for i in tree.nodes()}
    var_names: dict[int, str] = {}
    id_of: dict[str, int] = {}
    partition: dict[tuple[int, int], set[int]] = {}
    any_slot = False
    for idx, (lineno, node, name, slot) in enumerate(var_recs, start=1):
        if name in id_of:
            raise FormatError(f"duplicate variable name {name!r}", lineno)
        if name.startswith("-"):
            raise FormatError(f"variable name {name!r} may not start with '-'", lineno)
        id_of[name] = idx
        var_names[idx] = name
        if node not in variable_sets:
            raise FormatError(f"variable {name!r} on unknown tree node {node}", lineno)
        variable_sets[node].add(idx)
        if slot is not None:
            any_slot = True
            partition.setdefault((node, slot), set()).add(idx)
    clauses = []
    for lineno, lits in clause_recs:
        clause = []
        for tok in lits:
            neg = tok.startswith("-")
            name = tok[1:] if neg else tok
            if name not in id_of:
                raise FormatError(f"clause uses unknown variable {name!r}", lineno)
            clause.append(-id_of[name] if neg else id_of[name])
        clauses.append(tuple(clause))
    part = None
    if any_slot:
        part = {key: frozenset(vs) for key, vs in partition.items()}
        if k is not None:
            for i in tree.nodes():
                for j in range(1, k + 1):
                    part.setdefault((i, j), frozenset())
    return TreeChainedCnf(
        tree=tree,
        variable_sets={i: frozenset(vs) for i, vs in variable_sets.items()},
        clauses=tuple(clauses),
        variant=variant,
        k=k,
        partition=part,
        var_names=var_names,
    )


# ------------------------------------------------------------- listcol

def _parse_listcol(recs) -> ListColoringInstance:
    palette = None
    lists: dict[int, frozenset[int]] = {}
    precolored: dict[int, int] = {}
    other = []
    for lineno, toks in recs:
        if toks[0] == "listcol":
            continue
        if toks[0] == "palette":
            palette = frozenset(_int(c, lineno, "palette color") for c in toks[1:])
        elif toks[0] == "list":
            if len(toks) < 3:
                raise FormatError("expected 'list <v> <c...>'", lineno)
            v = _int(toks[1], lineno, "list vertex")
            if v in lists:
                raise FormatError(f"duplicate list for vertex {v}", lineno)
            lists[v] = frozenset(_int(c, lineno, "list color") for c in toks[2:])
        elif toks[0] == "pre":
            if len(toks) != 3:
                raise FormatError("expected 'pre <v> <c>'", lineno)
            v = _int(toks[1], lineno, "precolored vertex")
            if v in precolored:
                raise FormatError(f"duplicate precoloring of vertex {v}", lineno)
            precolored[v] = _int(toks[2], lineno, "precolor")
        elif toks[0] in ("p", "e", "label"):
            other.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in listcol", lineno)
    if palette is None:
        raise FormatError("missing 'palette' record")
    graph, _ = _parse_graph_records(other)
    return ListColoringInstance(graph=graph, palette=palette,
                                lists=lists, precolored=precolored)


# --------------------------------------------------------------- logtw

def _parse_logtw(recs) -> LogTwGraphInstance:
    k = weight = None
    problem = "is"
    graph_recs = []
    dec_recs = []
    for lineno, toks in recs:
        if toks[0] == "logtw":
            if len(toks) != 3:
                raise FormatError("expected 'logtw <k> <W>'", lineno)
            k = _int(toks[1], lineno, "parameter k")
            weight = _int(toks[2], lineno, "target weight")
        elif toks[0] == "problem":
            if len(toks) != 2:
                raise FormatError("expected 'problem <tag>'", lineno)
            problem = toks[1]
        elif toks[0] in ("p", "e", "label"):
            graph_recs.append((lineno, toks))
        elif toks[0] in ("t", "a", "bag"):
            dec_recs.append((lineno, toks))
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in logtw", lineno)
    if k is None or weight is None:
        raise FormatError("missing 'logtw <k> <W>' record")
    graph, _ = _parse_graph_records(graph_recs)
    dec, _ = _parse_decomposition_records(dec_recs)
    return LogTwGraphInstance(graph=graph, decomposition=dec,
                              target_weight=weight, k=k, problem=problem)


# ------------------------------------------------------------- machine

def _stackop_text(op) -> str:
    if op is None:
        return "none"
    kind, sym = op
    return f"{kind}:{sym}"


def _machine_lines(m: MachineSpec) -> list[str]:
    lines = ["m states " + " ".join(m.states)]
    lines.append(f"init {m.initial}")
    lines.append("accept " + " ".join(sorted(m.accepting)))
    for q in m.states:
        lines.append(f"mode {q} {m.mode[q]}")
    lines.append(f"work {m.work_cells} {''.join(m.work_alphabet)}")
    for key in sorted(m.transitions):
        q, a, w = key
        for act in m.transitions[key]:
            lines.append(
                f"tr {q} {a} {w} -> {act.state} {act.write} "
                f"{act.dw} {act.di} {_stackop_text(act.stack_op)}")
    return lines


def _parse_stackop(tok: str, lineno: int):
    if tok == "none":
        return None
    if ":" not in tok:
        raise FormatError(f"bad stack op {tok!r}", lineno)
    kind, sym = tok.split(":", 1)
    if kind not in ("push", "pop") or len(sym) != 1:
        raise FormatError(f"bad stack op {tok!r}", lineno)
    return (kind, sym)


def _parse_machine(recs) -> MachineSpec:
    states = None
    initial = None
    accepting = None
    mode: dict[str, str] = {}
    work_cells = None
    work_alphabet = None
    transitions: dict[tuple[str, str, str], list[Action]] = {}
    for lineno, toks in recs:
        if toks[0] == "m":
            if len(toks) < 3 or toks[1] != "states":
                raise FormatError("expected 'm states <q...>'", lineno)
            states = tuple(toks[2:])
        elif toks[0] == "init":
            if len(toks) != 2:
                raise FormatError("expected 'init <q>'", lineno)
            initial = toks[1]
        elif toks[0] == "accept":
            accepting = frozenset(toks[1:])
        elif toks[0] == "mode":
            if len(toks) != 3:
                raise FormatError("expected 'mode <q> <det|exist|univ>'", lineno)
            mode[toks[1]] = toks[2]
        elif toks[0] == "work":
            if len(toks) != 3:
                raise FormatError("expected 'work <cells> <alphabet>'", lineno)
            work_cells = _int(toks[1], lineno, "work cells")
            work_alphabet = tuple(toks[2])
        elif toks[0] == "tr":
            if len(toks) != 10 or toks[4] != "->":
                raise FormatError(
                    "expected 'tr <q> <in> <work> -> <q'> <write> <dw> <di> <op>'",
                    lineno)
            key = (toks[1], toks[2], toks[3])
            act = Action(
                state=toks[5],
                write=toks[6],
                dw=_int(toks[7], lineno, "work move"),
                di=_int(toks[8], lineno, "input move"),
                stack_op=_parse_stackop(toks[9], lineno),
            )
            transitions.setdefault(key, []).append(act)
        else:
            raise FormatError(f"unexpected record {toks[0]!r} in machine", lineno)
    if states is None or initial is None or accepting is None:
        raise FormatError("machine needs 'm states', 'init' and 'accept' records")
    if work_cells is None or work_alphabet is None:
        raise FormatError("machine needs a 'work <cells> <alphabet>' record")
    return MachineSpec(
        states=states,
        initial=initial,
        accepting=accepting,
        mode=mode,
        work_cells=work_cells,
        work_alphabet=work_alphabet,
        transitions={k: tuple(v) for k, v in transitions.items()},
    )
