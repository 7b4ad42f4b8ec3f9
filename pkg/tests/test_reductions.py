"""Per-reduction constructions: the spec'd small cases, counting laws,
witness bounds, lift round-trips, and end-to-end composition."""

import pytest

from conftest import make_machine
from xalpwb.instances import (
    Graph,
    InvariantViolation,
    ListColoringInstance,
    LogTwGraphInstance,
    OrderedTree,
    TcmcInstance,
    TreeChainedCnf,
    TreeDecomposition,
    validate_decomposition,
)
from xalpwb.oracles import (
    check_cnf_solution,
    check_coloring,
    check_subset_solution,
    check_tcmc_solution,
    is_independent_set,
    optimum_subset,
    solve_cnf_bruteforce,
    solve_is_ds_vc,
    solve_is_treedp,
    solve_listcoloring,
    solve_tcmc_bruteforce,
)
from xalpwb.reductions import (
    complement_tcmc_to_tcmis,
    reduce_atm_to_tcmc,
    reduce_is_to_vc,
    reduce_listcoloring_to_precoloring,
    reduce_negcnf_to_poscnf,
    reduce_partitioned_to_general_cnf,
    reduce_poscnf_to_logtw_is,
    reduce_rbds_to_ds,
    reduce_tcmis_to_listcoloring,
    reduce_tcmis_to_negcnf,
    reduce_vc_to_rbds,
)
from xalpwb.machines import run_with_tree_shape
from xalpwb.verify import generate_instance

BIGCAP = 1 << 44


def single_node_tcmc():
    return TcmcInstance(tree=OrderedTree(n=1), k=1,
                        classes={(1, 1): frozenset({1})}, graph=Graph(n=1))


def two_node_tcmc(edges=()):
    tree = OrderedTree(n=2, children={1: (2,)})
    classes = {(1, 1): frozenset({1}), (2, 1): frozenset({2})}
    return TcmcInstance(tree=tree, k=1, classes=classes,
                        graph=Graph(n=2, edges=frozenset(edges)))


# ------------------------------------------------------------------ atm-tcmc


def test_atm_tcmc_immediate_accept_single_node():
    m = make_machine(["a"], "a", ["a"], {"a": "det"}, 1, "01", {})
    shape = OrderedTree(n=1)
    art = reduce_atm_to_tcmc(m, "", shape, 1, 1)
    # the only class holds the root-compatible accepting vertex
    assert all(len(vs) == 1 for vs in art.target.classes.values())
    ok, _ = solve_tcmc_bruteforce(art.target, "clique", cap=BIGCAP)
    assert ok


def test_atm_tcmc_two_step_existential_path():
    m = make_machine(["s", "t"], "s", ["t"], {"s": "exist", "t": "det"}, 2, "01",
                     {("s", "0", "0"): [("t", "0", 0, 0, None)]})
    shape = OrderedTree(n=2, children={1: (2,)})
    art = reduce_atm_to_tcmc(m, "0", shape, 2, 1)
    ok, sol = solve_tcmc_bruteforce(art.target, "clique", cap=BIGCAP)
    assert ok == run_with_tree_shape(m, "0", shape) == True
    run = art.lift.backward(sol)
    assert check_tcmc_solution(art.target, "clique", art.lift.forward(run))
    # same machine on a mismatching shape: both sides reject
    single = OrderedTree(n=1)
    art2 = reduce_atm_to_tcmc(m, "0", single, 2, 1)
    ok2, _ = solve_tcmc_bruteforce(art2.target, "clique", cap=BIGCAP)
    assert ok2 == run_with_tree_shape(m, "0", single) == False


def test_atm_tcmc_per_class_size_cap():
    m = make_machine(
        ["u", "l", "r", "acc"], "u", ["acc"],
        {"u": "univ", "l": "exist", "r": "exist", "acc": "det"}, 2, "01",
        {("u", "#", "0"): [("l", "1", 0, 0, None), ("r", "0", 1, 0, None)],
         ("l", "#", "1"): [("acc", "1", 0, 0, None)],
         ("r", "#", "0"): [("acc", "1", 0, 0, None)]})
    x = "0"
    shape = OrderedTree(n=5, children={1: (2, 3), 2: (4,), 3: (5,)})
    beta = 1
    art = reduce_atm_to_tcmc(m, x, shape, 2, beta)
    cap = len(m.states) * (len(x) + 2) * (beta + 2) * (1 << beta)
    assert all(len(vs) <= cap for vs in art.target.classes.values())


def test_atm_tcmc_rejects_bad_layout():
    m = make_machine(["a"], "a", ["a"], {"a": "det"}, 3, "01", {})
    with pytest.raises(InvariantViolation, match="blocks"):
        reduce_atm_to_tcmc(m, "", OrderedTree(n=1), 2, 2)
    stacky = make_machine(["a", "b"], "a", ["b"], {"a": "det", "b": "det"}, 1, "01",
                          {("a", "#", "0"): [("b", "0", 0, 0, ("push", "z"))]})
    with pytest.raises(InvariantViolation, match="stack-free"):
        reduce_atm_to_tcmc(stacky, "", OrderedTree(n=1), 1, 1)


# --------------------------------------------------------- tcmc complement


def test_complement_single_vertex_unchanged():
    inst = single_node_tcmc()
    art = complement_tcmc_to_tcmis(inst)
    assert art.target == inst
    assert solve_tcmc_bruteforce(art.target, "independent-set")[0]


def test_complement_swaps_solvability():
    # fully adjacent incident classes: clique solvable, complement has no
    # cross edges and stays solvable as an independent set
    inst = two_node_tcmc(edges={(1, 2)})
    art = complement_tcmc_to_tcmis(inst)
    assert not art.target.graph.edges
    assert solve_tcmc_bruteforce(inst, "clique")[0]
    assert solve_tcmc_bruteforce(art.target, "independent-set")[0]


def test_complement_is_involution():
    for seed in range(20):
        inst = generate_instance("tcmc", None, seed=seed)
        twice = complement_tcmc_to_tcmis(complement_tcmc_to_tcmis(inst).target)
        assert twice.target == inst


# ------------------------------------------------------------- list coloring


def test_listcol_edgeless_source_trivially_colorable():
    inst = two_node_tcmc()
    art = reduce_tcmis_to_listcoloring(inst)
    assert art.target.graph.n == 2  # no conflict vertices
    assert solve_listcoloring(art.target)[0]


def test_listcol_single_cross_edge_forces_uncolorable():
    inst = two_node_tcmc(edges={(1, 2)})
    assert not solve_tcmc_bruteforce(inst, "independent-set")[0]
    art = reduce_tcmis_to_listcoloring(inst)
    assert art.target.graph.n == 3
    assert not solve_listcoloring(art.target)[0]


def test_listcol_witness_width_bound_k2():
    hit_exact = False
    for seed in range(25):
        inst = generate_instance("tcmis", {"k": 2}, seed=seed)
        art = reduce_tcmis_to_listcoloring(inst)
        check = validate_decomposition(art.target.graph, art.witness)
        assert check.ok
        assert check.width <= 3
        if check.width == 3:
            hit_exact = True
    assert hit_exact


def test_precoloring_full_list_adds_no_pendants():
    g = Graph(n=1)
    inst = ListColoringInstance(graph=g, palette=frozenset({1, 2}),
                                lists={1: frozenset({1, 2})})
    art = reduce_listcoloring_to_precoloring(inst)
    assert art.target.graph.n == 1 and not art.target.precolored


def test_precoloring_pendant_count():
    for seed in range(20):
        inst = generate_instance("listcol", None, seed=seed)
        art = reduce_listcoloring_to_precoloring(inst)
        forbidden = sum(len(inst.palette - inst.effective_list(v))
                        for v in inst.graph.vertices())
        assert art.target.graph.n == inst.graph.n + forbidden
        assert len(art.target.precolored) == forbidden


def test_precoloring_solutions_restrict():
    for seed in range(20):
        inst = generate_instance("listcol", {"n": 3}, seed=seed)
        src_ok, src_col = solve_listcoloring(inst)
        art = reduce_listcoloring_to_precoloring(inst)
        tgt_ok, tgt_col = solve_listcoloring(art.target)
        assert src_ok == tgt_ok
        if src_ok:
            assert check_coloring(art.target, art.lift.forward(src_col))
            assert check_coloring(inst, art.lift.backward(tgt_col))


# ----------------------------------------------------------------- CNF chain


def test_negcnf_edgeless_source():
    inst = two_node_tcmc()
    art = reduce_tcmis_to_negcnf(inst)
    assert art.target.clauses == ()
    assert solve_cnf_bruteforce(art.target)[0]


def test_negcnf_clause_count_equals_edges():
    for seed in range(15):
        inst = generate_instance("tcmis", None, seed=seed)
        art = reduce_tcmis_to_negcnf(inst)
        assert len(art.target.clauses) == len(inst.graph.edges)


def test_negcnf_single_edge_forced_unsat():
    inst = two_node_tcmc(edges={(1, 2)})
    art = reduce_tcmis_to_negcnf(inst)
    assert not solve_cnf_bruteforce(art.target)[0]


def test_poscnf_cell_of_two_substitution():
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1, 2})},
                          clauses=((-1,),), variant="negative-partitioned", k=1,
                          partition={(1, 1): frozenset({1, 2})})
    art = reduce_negcnf_to_poscnf(inst)
    assert art.target.clauses == ((2,),)


def test_poscnf_literal_count_law():
    for seed in range(15):
        inst = generate_instance("negcnf", None, seed=seed)
        art = reduce_negcnf_to_poscnf(inst)
        for before, after in zip(inst.clauses, art.target.clauses):
            expect = sum(len(inst.partition[inst.cell_of_var(-lit)]) - 1
                         for lit in before)
            assert len(after) == expect


def test_poscnf_singleton_cell_yields_empty_clause():
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1})},
                          clauses=((-1,),), variant="negative-partitioned", k=1,
                          partition={(1, 1): frozenset({1})})
    art = reduce_negcnf_to_poscnf(inst)
    assert art.target.clauses == ((),)
    assert not solve_cnf_bruteforce(art.target)[0]
    assert not solve_cnf_bruteforce(inst)[0]


def test_poscnf_equisatisfiable():
    for seed in range(25):
        inst = generate_instance("negcnf", None, seed=seed)
        art = reduce_negcnf_to_poscnf(inst)
        assert solve_cnf_bruteforce(inst)[0] == solve_cnf_bruteforce(art.target)[0]


def test_gencnf_cell_clauses():
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1, 2})},
                          clauses=(), variant="positive-partitioned", k=1,
                          partition={(1, 1): frozenset({1, 2})})
    art = reduce_partitioned_to_general_cnf(inst)
    assert art.target.clauses == ((1, 2), (-1, -2))


def test_gencnf_added_clause_count():
    for seed in range(15):
        inst = generate_instance("poscnf", None, seed=seed)
        art = reduce_partitioned_to_general_cnf(inst)
        expect = sum(1 + len(cell) * (len(cell) - 1) // 2
                     for cell in inst.partition.values())
        assert len(art.target.clauses) == len(inst.clauses) + expect


def test_gencnf_equisatisfiable():
    for seed in range(25):
        inst = generate_instance("poscnf", None, seed=seed)
        art = reduce_partitioned_to_general_cnf(inst)
        assert solve_cnf_bruteforce(inst)[0] == solve_cnf_bruteforce(art.target)[0]


# ---------------------------------------------------- logarithmic treewidth


def isolated_clause_gadget(ell):
    """Build just one clause gadget (no variable-gadget edges) by reducing a
    formula with one cell of 2^0-sized... simpler: construct directly."""
    edges = set()
    nxt = 1
    p = {}
    pp = {}
    v = {}
    for t in range(0, ell + 2):
        p[t] = nxt
        nxt += 1
    for t in range(1, ell + 1):
        pp[t] = nxt
        nxt += 1
    for t in range(1, ell + 1):
        v[t] = nxt
        nxt += 1
    for t in range(0, ell + 1):
        edges.add((min(p[t], p[t + 1]), max(p[t], p[t + 1])))
    for t in range(1, ell):
        edges.add((min(pp[t], pp[t + 1]), max(pp[t], pp[t + 1])))
    for t in range(1, ell + 1):
        edges.add((min(p[t], pp[t]), max(p[t], pp[t])))
        edges.add((min(v[t], p[t]), max(v[t], p[t])))
        edges.add((min(v[t], pp[t]), max(v[t], pp[t])))
    return Graph(n=nxt - 1, edges=frozenset(edges)), set(v.values())


@pytest.mark.parametrize("ell", [2, 4, 6])
def test_clause_gadget_law(ell):
    graph, lit_vertices = isolated_clause_gadget(ell)
    best_with = 0
    best_without = 0
    for mask in range(1 << graph.n):
        s = frozenset(i + 1 for i in range(graph.n) if mask >> i & 1)
        if not is_independent_set(graph, s):
            continue
        if s & lit_vertices:
            best_with = max(best_with, len(s))
        else:
            best_without = max(best_without, len(s))
    assert best_with == ell + 2
    assert best_without <= ell + 1


def test_logtw_smallest_end_to_end():
    # one cell of size 1: t=0, one normalization clause padded to length 2
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1})},
                          clauses=(), variant="positive-partitioned", k=1,
                          partition={(1, 1): frozenset({1})})
    art = reduce_poscnf_to_logtw_is(inst)
    assert art.target.target_weight == 4  # 0 bits + (2 + 2)
    ok, best = solve_is_treedp(art.target)
    assert ok and best >= 4
    sub_best, _ = optimum_subset(art.target.graph, "is")
    assert sub_best == best


def test_logtw_cell_of_four_gadget_bits():
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1, 2, 3, 4})},
                          clauses=(), variant="positive-partitioned", k=1,
                          partition={(1, 1): frozenset({1, 2, 3, 4})})
    art = reduce_poscnf_to_logtw_is(inst)
    # t = 2: two disjoint bit edges contribute exactly 2 to any optimum
    hats = [rec for rec in art.lift.records]
    assert all(len(tgts) == 2 for _, tgts in hats)
    sat, sol = solve_cnf_bruteforce(inst)
    assert sat
    s = art.lift.forward(sol)
    assert is_independent_set(art.target.graph, s)
    assert len(s) >= art.target.target_weight


def test_logtw_weight_iff_satisfiable():
    for seed in range(20):
        inst = generate_instance("poscnf", None, seed=seed)
        art = reduce_poscnf_to_logtw_is(inst)
        sat, sol = solve_cnf_bruteforce(inst)
        met, best = solve_is_treedp(art.target)
        assert sat == met, seed
        check = validate_decomposition(art.target.graph, art.target.decomposition)
        assert check.ok
        if sat:
            back = art.lift.backward(art.lift.forward(sol))
            assert check_cnf_solution(inst, back)


# ------------------------------------------------------- corollary chain


def _logtw(graph, W, problem="is"):
    from xalpwb.instances import ceil_log2

    dec = TreeDecomposition(tree=OrderedTree(n=1),
                            bags={1: frozenset(graph.vertices())})
    k = max(-(-max(dec.width(), 1) // ceil_log2(graph.n)), 1)
    return LogTwGraphInstance(graph=graph, decomposition=dec,
                              target_weight=W, k=k, problem=problem)


def test_is_vc_examples():
    p3 = _logtw(Graph(n=3, edges=frozenset({(1, 2), (2, 3)})), 2)
    art = reduce_is_to_vc(p3)
    assert art.target.target_weight == 1
    assert solve_is_ds_vc(p3.graph, "is", 2)[0]
    assert solve_is_ds_vc(art.target.graph, "vc", 1)[0]
    edgeless = _logtw(Graph(n=4), 4)
    assert reduce_is_to_vc(edgeless).target.target_weight == 0
    k3 = _logtw(Graph(n=3, edges=frozenset({(1, 2), (2, 3), (1, 3)})), 1)
    art = reduce_is_to_vc(k3)
    assert art.target.target_weight == 2
    assert solve_is_ds_vc(k3.graph, "vc", 2)[0]


def test_vc_rbds_examples():
    single = _logtw(Graph(n=2, edges=frozenset({(1, 2)})), 1, problem="vc")
    art = reduce_vc_to_rbds(single)
    assert art.target.graph.n == 3
    assert art.target.graph.labels[3] == "red"
    assert solve_is_ds_vc(art.target.graph, "rbds", 1)[0]
    p3 = _logtw(Graph(n=3, edges=frozenset({(1, 2), (2, 3)})), 1, problem="vc")
    art = reduce_vc_to_rbds(p3)
    ok, w = solve_is_ds_vc(art.target.graph, "rbds", 1)
    assert ok and w == frozenset({2})
    # subdivided vertex count: n + m
    assert art.target.graph.n == 3 + 2


def test_rbds_ds_examples():
    single = _logtw(Graph(n=2, edges=frozenset({(1, 2)})), 1, problem="vc")
    rbds = reduce_vc_to_rbds(single).target
    art = reduce_rbds_to_ds(rbds)
    assert art.target.target_weight == 2
    assert art.target.graph.n == rbds.graph.n + 2
    best, _ = optimum_subset(art.target.graph, "ds")
    assert best == 2
    # x1 belongs to some minimum dominating set: lift drops it
    ok, wds = solve_is_ds_vc(art.target.graph, "ds", 2)
    assert ok
    back = art.lift.backward(wds)
    assert check_subset_solution(rbds.graph, "rbds", back)
    assert len(back) <= 1


def test_rbds_ds_min_difference_exactly_one():
    for seed in range(25):
        rbds = generate_instance("logtw-rbds", None, seed=seed)
        art = reduce_rbds_to_ds(rbds)
        best_rbds, _ = optimum_subset(rbds.graph, "rbds", cap=1 << 22)
        best_ds, _ = optimum_subset(art.target.graph, "ds", cap=1 << 22)
        assert best_ds == best_rbds + 1, seed


def test_full_chain_composition():
    for seed in range(12):
        inst = generate_instance("tcmis", {"tree_nodes": 2, "max_class": 1,
                                           "max_edges": 4}, seed=seed)
        src_ok = solve_tcmc_bruteforce(inst, "independent-set")[0]
        stage = reduce_tcmis_to_negcnf(inst).target
        stage = reduce_negcnf_to_poscnf(stage).target
        art = reduce_poscnf_to_logtw_is(stage)
        stage = art.target
        stage = reduce_is_to_vc(stage).target
        stage = reduce_vc_to_rbds(stage).target
        final = reduce_rbds_to_ds(stage)
        from xalpwb.oracles import solve_ds_treedp
        end_ok, _ = solve_ds_treedp(final.target, cap=1 << 22)
        assert src_ok == end_ok, seed


def test_gencnf_accepts_negative_partitioned_sources():
    for seed in range(15):
        inst = generate_instance("negcnf", None, seed=seed)
        art = reduce_partitioned_to_general_cnf(inst)
        assert art.target.variant == "general"
        assert solve_cnf_bruteforce(inst)[0] == solve_cnf_bruteforce(art.target)[0]


def test_logtw_empty_clause_source_unsat():
    inst = TreeChainedCnf(tree=OrderedTree(n=1),
                          variable_sets={1: frozenset({1})},
                          clauses=((),), variant="positive-partitioned", k=1,
                          partition={(1, 1): frozenset({1})})
    assert not solve_cnf_bruteforce(inst)[0]
    art = reduce_poscnf_to_logtw_is(inst)
    met, best = solve_is_treedp(art.target)
    assert not met and best == art.target.target_weight - 1


def test_lift_map_serialization_format():
    inst = two_node_tcmc(edges={(1, 2)})
    art = reduce_tcmis_to_listcoloring(inst)
    lines = art.lift.serialize().splitlines()
    assert lines and all(ln.startswith("lift ") for ln in lines)
    assert any(ln.startswith("lift class:1:1 ") for ln in lines)
    assert any(ln.startswith("lift edge:1:2 ") for ln in lines)


def test_atm_tcmc_beta2_blocks2_cross_block_movement():
    # walk the work head across the block boundary in both directions
    m = make_machine(
        ["a", "b", "c", "d", "acc"], "a", ["acc"],
        {"a": "exist", "b": "exist", "c": "exist", "d": "exist", "acc": "det"},
        4, "01",
        {("a", "#", "0"): [("b", "1", 1, 0, None)],    # cell 1 -> 2 (block 1)
         ("b", "#", "0"): [("c", "1", 1, 0, None)],    # cell 2 -> 3 (into block 2)
         ("c", "#", "0"): [("d", "1", -1, 0, None)],   # cell 3 -> 2 (back)
         ("d", "#", "1"): [("acc", "1", 0, 0, None)]})
    shape = OrderedTree(n=5, children={1: (2,), 2: (3,), 3: (4,), 4: (5,)})
    art = reduce_atm_to_tcmc(m, "", shape, 2, 2)
    ok, sol = solve_tcmc_bruteforce(art.target, "clique", cap=1 << 52)
    assert ok == run_with_tree_shape(m, "", shape) == True
    run = art.lift.backward(sol)
    # the decoded run ends in the accepting state with the tape it wrote
    leaf = run[5]
    assert leaf[0] == "acc" and leaf[2] == ("1", "1", "1", "0")
    # and a machine that would walk off the last cell stays unsolvable
    off = make_machine(
        ["a", "acc"], "a", ["acc"], {"a": "exist", "acc": "det"}, 2, "01",
        {("a", "#", "0"): [("acc", "1", -1, 0, None)]})  # off the left edge
    shape2 = OrderedTree(n=2, children={1: (2,)})
    art2 = reduce_atm_to_tcmc(off, "", shape2, 2, 1)
    ok2, _ = solve_tcmc_bruteforce(art2.target, "clique", cap=BIGCAP)
    assert ok2 == run_with_tree_shape(off, "", shape2) == False
