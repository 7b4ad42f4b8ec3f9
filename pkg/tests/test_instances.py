"""Instance types, validators, text formats, and their round-trip laws."""

import random

import pytest

from xalpwb.formats import parse_instance, serialize_instance
from xalpwb.instances import (
    FormatError,
    Graph,
    InvariantViolation,
    ListColoringInstance,
    LogTwGraphInstance,
    OrderedTree,
    TcmcInstance,
    TreeChainedCnf,
    TreeDecomposition,
    ceil_log2,
    equal_size_classes,
    validate_decomposition,
)
from xalpwb.verify import generate_instance


def test_parse_smallest_graph():
    g = parse_instance("graph", "xalpwb 1\np graph 2 1\ne 1 2\n")
    assert g == Graph(n=2, edges=frozenset({(1, 2)}))


def test_parse_single_class_tcmc():
    text = "xalpwb 1\ntcmc 1\np graph 1 0\nt 1\nclass 1 1 1\n"
    inst = parse_instance("tcmc", text)
    assert inst.k == 1
    assert inst.classes[(1, 1)] == frozenset({1})


def test_tcmc_rejects_edge_between_nonincident_classes():
    # three-node path tree; an edge between the two leaves is not allowed
    text = ("xalpwb 1\ntcmc 1\np graph 3 1\ne 2 3\n"
            "t 3\na 1 2 1\na 2 3 1\n"
            "class 1 1 1\nclass 2 1 2\nclass 3 1 3\n")
    inst = parse_instance("tcmc", text)  # leaf 3 is adjacent to node 2: fine
    assert inst.graph.has_edge(2, 3)
    bad = ("xalpwb 1\ntcmc 1\np graph 3 1\ne 1 3\n"
           "t 3\na 1 2 1\na 2 3 1\n"
           "class 1 1 1\nclass 2 1 2\nclass 3 1 3\n")
    with pytest.raises(InvariantViolation, match="non-incident"):
        parse_instance("tcmc", bad)


def test_graph_invariants():
    with pytest.raises(InvariantViolation):
        Graph(n=2, edges=frozenset({(1, 1)}))
    with pytest.raises(InvariantViolation):
        Graph(n=2, edges=frozenset({(1, 3)}))


def test_tree_invariants():
    with pytest.raises(InvariantViolation, match="root"):
        OrderedTree(n=2, children={1: (2,), 2: (1,)})
    with pytest.raises(InvariantViolation, match="two parents"):
        OrderedTree(n=3, children={1: (3,), 2: (3,)})
    tree = OrderedTree(n=3, children={1: (2, 3)})
    assert tree.root == 1
    assert tree.parent(3) == 1


def test_ceil_log2_convention():
    assert ceil_log2(1) == 1
    assert ceil_log2(2) == 1
    assert ceil_log2(3) == 2
    assert ceil_log2(8) == 3
    with pytest.raises(InvariantViolation):
        ceil_log2(0)


def test_validate_decomposition_trivial_bag():
    for n in (1, 3, 5):
        g = Graph(n=n, edges=frozenset((u, u + 1) for u in range(1, n)))
        dec = TreeDecomposition(tree=OrderedTree(n=1),
                                bags={1: frozenset(range(1, n + 1))})
        check = validate_decomposition(g, dec)
        assert check.ok and check.width == n - 1


def test_validate_decomposition_path():
    g = Graph(n=3, edges=frozenset({(1, 2), (2, 3)}))
    dec = TreeDecomposition(tree=OrderedTree(n=2, children={1: (2,)}),
                            bags={1: frozenset({1, 2}), 2: frozenset({2, 3})})
    check = validate_decomposition(g, dec)
    assert check.ok and check.width == 1


def test_validate_decomposition_uncovered_edge():
    g = Graph(n=3, edges=frozenset({(1, 2), (2, 3), (1, 3)}))
    dec = TreeDecomposition(tree=OrderedTree(n=2, children={1: (2,)}),
                            bags={1: frozenset({1, 2}), 2: frozenset({2, 3})})
    check = validate_decomposition(g, dec)
    assert not check.ok
    assert check.violation == "edge uncovered: {1,3}"
    assert check.witness == (1, 3)


def test_validate_decomposition_disconnected_occurrence():
    g = Graph(n=2)
    dec = TreeDecomposition(
        tree=OrderedTree(n=3, children={1: (2, 3)}),
        bags={1: frozenset({2}), 2: frozenset({1}), 3: frozenset({1})})
    check = validate_decomposition(g, dec)
    assert not check.ok
    assert "disconnected" in check.violation


def _brute_decomposition_check(graph, dec):
    """Independent re-statement of the three conditions by enumeration."""
    nodes = list(dec.tree.nodes())
    # vertex coverage
    for v in graph.vertices():
        if not any(v in dec.bags[i] for i in nodes):
            return False
    # edge coverage
    for u, v in graph.edges:
        if not any(u in dec.bags[i] and v in dec.bags[i] for i in nodes):
            return False
    # connectivity: count connected components of the occurrence node set
    tree_edges = set()
    for p, c in dec.tree.edge_list():
        tree_edges.add((p, c))
        tree_edges.add((c, p))
    for v in graph.vertices():
        occ = [i for i in nodes if v in dec.bags[i]]
        comp = {occ[0]}
        changed = True
        while changed:
            changed = False
            for i in occ:
                if i in comp:
                    continue
                if any((i, j) in tree_edges for j in comp):
                    comp.add(i)
                    changed = True
        if set(occ) != comp:
            return False
    return True


def test_decomposition_checker_against_bruteforce():
    rng = random.Random(20)
    checked = 0
    for trial in range(120):
        n = rng.randint(1, 8)
        nodes = rng.randint(1, 4)
        children = {}
        for node in range(2, nodes + 1):
            parent = rng.randint(1, node - 1)
            children.setdefault(parent, []).append(node)
        tree = OrderedTree(n=nodes,
                           children={p: tuple(c) for p, c in children.items()})
        bags = {i: frozenset(v for v in range(1, n + 1) if rng.random() < 0.5)
                for i in tree.nodes()}
        dec = TreeDecomposition(tree=tree, bags=bags)
        edges = frozenset((u, v) for u in range(1, n + 1)
                          for v in range(u + 1, n + 1) if rng.random() < 0.3)
        g = Graph(n=n, edges=edges)
        got = validate_decomposition(g, dec)
        assert got.ok == _brute_decomposition_check(g, dec), (trial, got.violation)
        checked += 1
    assert checked == 120


ROUND_TRIP_FAMILIES = ["graph", "tcmc", "tcmis", "listcol", "negcnf",
                       "poscnf", "logtw-is", "logtw-rbds"]


@pytest.mark.parametrize("family", ROUND_TRIP_FAMILIES)
def test_round_trip(family):
    for seed in range(8):
        inst = generate_instance(family, None, seed=seed)
        tag = {"tcmis": "tcmc", "negcnf": "cnf", "poscnf": "cnf",
               "logtw-is": "logtw", "logtw-rbds": "logtw"}.get(family, family)
        text = serialize_instance(inst)
        assert parse_instance(tag, text) == inst


def test_round_trip_empty_edge_graph():
    g = Graph(n=3)
    text = serialize_instance(g)
    assert "p graph 3 0" in text
    assert parse_instance("graph", text) == g


def test_round_trip_single_clause_cnf():
    inst = TreeChainedCnf(
        tree=OrderedTree(n=1), variable_sets={1: frozenset({1, 2})},
        clauses=((1, -2),), variant="general", k=1)
    text = serialize_instance(inst)
    assert sum(line.startswith("c ") for line in text.splitlines()) == 1
    assert parse_instance("cnf", text) == inst


def test_header_required():
    with pytest.raises(FormatError, match="header"):
        parse_instance("graph", "p graph 1 0\n")


def test_parse_error_carries_line_number():
    with pytest.raises(FormatError, match="line 3"):
        parse_instance("graph", "xalpwb 1\np graph 2 1\ne 1 x\n")


def test_listcol_invariants():
    g = Graph(n=1)
    with pytest.raises(InvariantViolation, match="empty list"):
        ListColoringInstance(graph=g, palette=frozenset({1}),
                             lists={1: frozenset()})
    with pytest.raises(InvariantViolation, match="outside its list"):
        ListColoringInstance(graph=g, palette=frozenset({1, 2}),
                             lists={1: frozenset({1})}, precolored={1: 2})


def test_logtw_width_bound_checked():
    g = Graph(n=2, edges=frozenset({(1, 2)}))
    dec = TreeDecomposition(tree=OrderedTree(n=1), bags={1: frozenset({1, 2})})
    LogTwGraphInstance(graph=g, decomposition=dec, target_weight=1, k=1)
    big = Graph(n=4, edges=frozenset())
    wide = TreeDecomposition(tree=OrderedTree(n=1),
                             bags={1: frozenset({1, 2, 3, 4})})
    with pytest.raises(InvariantViolation, match="exceeds"):
        LogTwGraphInstance(graph=big, decomposition=wide, target_weight=0, k=1)


def test_equal_size_class_padding():
    tree = OrderedTree(n=1)
    inst = TcmcInstance(tree=tree, k=2,
                        classes={(1, 1): frozenset({1, 2}), (1, 2): frozenset({3})},
                        graph=Graph(n=3))
    padded = equal_size_classes(inst)
    sizes = {len(vs) for vs in padded.classes.values()}
    assert sizes == {2}
    assert padded.graph.n == 4


def _mutate(rng, text):
    lines = text.splitlines()
    op = rng.randrange(4)
    if op == 0 and len(lines) > 1:
        del lines[rng.randrange(1, len(lines))]
    elif op == 1:
        lines.append(lines[rng.randrange(len(lines))])
    elif op == 2:
        i = rng.randrange(len(lines))
        toks = lines[i].split()
        if toks:
            j = rng.randrange(len(toks))
            if toks[j].lstrip("-").isdigit():
                toks[j] = str(int(toks[j]) + rng.choice((-1, 1, 7)))
            else:
                toks[j] = toks[j] + "z"
            lines[i] = " ".join(toks)
    else:
        i = rng.randrange(len(lines))
        toks = lines[i].split()
        if len(toks) > 1:
            del toks[rng.randrange(len(toks))]
            lines[i] = " ".join(toks)
    return "\n".join(lines) + "\n"


@pytest.mark.parametrize("family,tag", [("tcmc", "tcmc"), ("poscnf", "cnf"),
                                        ("listcol", "listcol"),
                                        ("logtw-is", "logtw")])
def test_fuzzed_mutations_never_misaccepted(family, tag):
    """Mutations either fail to parse or still satisfy every invariant; a
    parse success implies the constructors re-validated everything."""
    rng = random.Random(hash(family) % 10000)
    base = serialize_instance(generate_instance(family, None, seed=1))
    for _ in range(200):
        mutated = _mutate(rng, base)
        try:
            inst = parse_instance(tag, mutated)
        except (FormatError, InvariantViolation):
            continue
        assert serialize_instance(inst)  # well-formed enough to serialize
