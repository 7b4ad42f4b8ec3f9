"""CLI exit-status contract, file round trips, and report output."""

import pathlib

import pytest

from xalpwb.cli import main
from xalpwb.formats import parse_instance, serialize_instance
from xalpwb.verify import generate_instance, replay_counterexample


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _write_instance(path, family, seed=0, profile=None):
    inst = generate_instance(family, profile, seed=seed)
    pathlib.Path(path).write_text(serialize_instance(inst))
    return inst


def test_reduce_round_trip(workdir, capsys):
    _write_instance("src.tcmc", "tcmis", seed=6)
    code = main(["reduce", "--name", "tcmis-listcol", "-i", "src.tcmc",
                 "-o", "out.lc", "--lift", "lift.txt", "--witness", "wit.dec"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("k=2 k'=")
    assert "bound=k'<=2k-1" in out
    target = parse_instance("listcol", pathlib.Path("out.lc").read_text())
    assert target.palette
    parse_instance("decomposition", pathlib.Path("wit.dec").read_text())
    assert pathlib.Path("lift.txt").read_text().startswith("lift ")


def test_reduce_unknown_name_exits_2(workdir):
    pathlib.Path("x").write_text("")
    assert main(["reduce", "--name", "bogus", "-i", "x", "-o", "y"]) == 2


def test_reduce_atm_needs_blocks(workdir, corpus):
    pathlib.Path("m.mach").write_text(serialize_instance(corpus["accept_now"]))
    assert main(["reduce", "--name", "atm-tcmc", "-i", "m.mach", "-o", "t.tcmc"]) == 2


def test_solve_is_on_path(workdir, capsys):
    text = ("xalpwb 1\nlogtw 2 2\nproblem is\n"
            "p graph 3 2\ne 1 2\ne 2 3\n"
            "t 1\nbag 1 1 2 3\n")
    pathlib.Path("p3.logtw").write_text(text)
    assert main(["solve", "--problem", "is", "-i", "p3.logtw",
                 "-o", "sol.txt"]) == 0
    assert capsys.readouterr().out.strip() == "YES"
    assert pathlib.Path("sol.txt").read_text().startswith("sol ")


def test_solve_treedp_matches_brute(workdir, capsys):
    _write_instance("g.logtw", "logtw-is", seed=3)
    assert main(["solve", "--problem", "is", "-i", "g.logtw"]) == 0
    brute = capsys.readouterr().out.strip()
    assert main(["solve", "--problem", "is", "-i", "g.logtw",
                 "--solver", "treedp"]) == 0
    assert capsys.readouterr().out.strip() == brute


def test_solve_listcol_conflict_no(workdir, capsys):
    text = ("xalpwb 1\nlistcol\np graph 2 1\ne 1 2\n"
            "palette 1\nlist 1 1\nlist 2 1\n")
    pathlib.Path("c.lc").write_text(text)
    assert main(["solve", "--problem", "listcol", "-i", "c.lc"]) == 0
    assert capsys.readouterr().out.strip() == "NO"


def test_solve_cap_exit_3(workdir, capsys):
    _write_instance("g.logtw", "logtw-is", seed=3)
    assert main(["solve", "--problem", "is", "-i", "g.logtw",
                 "--cap", "2"]) == 3


def test_verify_reduction_exit_0(workdir, capsys):
    assert main(["verify", "--reduction", "is-vc", "--trials", "15",
                 "--seed", "7", "--report", "rep.txt"]) == 0
    text = pathlib.Path("rep.txt").read_text()
    assert text.splitlines()[0].startswith("report is-vc")


def test_verify_zero_trials_usage_error(workdir):
    assert main(["verify", "--reduction", "is-vc", "--trials", "0"]) == 2


def test_verify_requires_one_mode(workdir):
    assert main(["verify", "--trials", "5"]) == 2


def test_verify_fault_chain_exit_1_with_replayable_counterexample(workdir):
    code = main(["verify", "--chain",
                 "tcmis-negcnf,negcnf-poscnf!faulty,part-gencnf",
                 "--trials", "20", "--seed", "5", "--report", "rep.txt"])
    assert code == 1
    cex_files = sorted(workdir.glob("rep.txt.cex*.txt"))
    assert cex_files
    assert replay_counterexample(cex_files[0].read_text())


def test_verify_machines_exit_0(workdir, capsys):
    import xalpwb

    corpus_dir = pathlib.Path(xalpwb.__file__).parent / "corpus"
    assert main(["verify", "--machines", str(corpus_dir),
                 "--max-input-len", "3"]) == 0


def test_machine_eval_contract(workdir, corpus, capsys):
    pathlib.Path("acc.mach").write_text(serialize_instance(corpus["accept_now"]))
    for semantics in ("alt", "balanced", "altstack", "stack", "stackalt"):
        assert main(["machine", "eval", "--semantics", semantics,
                     "-m", "acc.mach"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("ACCEPT treeNodes=")
    pathlib.Path("pp.mach").write_text(serialize_instance(corpus["push_pop"]))
    assert main(["machine", "eval", "--semantics", "stack", "-m", "pp.mach"]) == 0
    out = capsys.readouterr().out
    assert "stack=1" in out and out.startswith("ACCEPT")
    # alternating semantics on a stack machine is a usage error
    assert main(["machine", "eval", "--semantics", "alt", "-m", "pp.mach"]) == 2


def test_machine_shaped_mismatch_rejects(workdir, corpus, capsys):
    pathlib.Path("uni.mach").write_text(serialize_instance(corpus["universal_pair"]))
    pathlib.Path("shape1.tree").write_text("xalpwb 1\nt 1\n")
    assert main(["machine", "eval", "--semantics", "shaped", "-m", "uni.mach",
                 "--shape", "shape1.tree"]) == 0
    assert capsys.readouterr().out.strip() == "REJECT"
    pathlib.Path("shape3.tree").write_text("xalpwb 1\nt 3\na 1 2 1\na 1 3 2\n")
    assert main(["machine", "eval", "--semantics", "shaped", "-m", "uni.mach",
                 "--shape", "shape3.tree"]) == 0
    assert capsys.readouterr().out.strip() == "ACCEPT"


def test_parse_failure_exit_2(workdir):
    pathlib.Path("junk.tcmc").write_text("not a header\n")
    assert main(["solve", "--problem", "tcmc", "-i", "junk.tcmc"]) == 2


def test_reduce_witnessless_reduction_rejects_witness_flag(workdir):
    _write_instance("src.tcmc", "tcmis", seed=6)
    assert main(["reduce", "--name", "tcmc-tcmis", "-i", "src.tcmc",
                 "-o", "out.tcmc", "--witness", "w.dec"]) == 2


def test_reduce_atm_tcmc_via_files(workdir, corpus, capsys):
    from xalpwb.oracles import solve_tcmc_bruteforce

    pathlib.Path("m.mach").write_text(serialize_instance(corpus["universal_pair"]))
    pathlib.Path("shape.tree").write_text("xalpwb 1\nt 3\na 1 2 1\na 1 3 2\n")
    code = main(["reduce", "--name", "atm-tcmc", "-i", "m.mach",
                 "--shape", "shape.tree", "--blocks", "1", "--beta", "1",
                 "-x", "0", "-o", "out.tcmc", "--lift", "lift.txt"])
    assert code == 0
    assert capsys.readouterr().out.startswith("k=1 k'=1 bound=k'=k")
    target = parse_instance("tcmc", pathlib.Path("out.tcmc").read_text())
    ok, _ = solve_tcmc_bruteforce(target, "clique", cap=1 << 30)
    assert ok  # the universal pair accepts a root-plus-two-leaves shape


def test_corpus_files_round_trip(corpus):
    for name, machine in corpus.items():
        assert parse_instance("machine", serialize_instance(machine)) == machine
