import random
import subprocess
import sys

import pytest

from thingmachine import corpus
from thingmachine.cli import main
from thingmachine.corpus import DEFAULT_PARAMETERS, load_catalog

CAR = str(corpus.path("car_hire.tm"))
CAR_SCN = str(corpus.path("car_hire_happy.scn"))
CAR_EVENTS = str(corpus.path("car_hire.events"))
CHALET = str(corpus.path("chalet.tm"))
CATALOG = str(corpus.path("chalet_catalog.csv"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


# validate


def test_validate_clean(capsys):
    assert run(capsys, "validate", CAR) == (0, "", "")


def test_validate_bad_flow(capsys, write):
    code, out, _ = run(capsys, "validate", write("bad.tm", "thimac S { action process p action receive r flow p -> r : t }"))
    assert code == 1 and "error: illegal flow adjacency" in out
    assert out.startswith("S.p: error:")


def test_validate_warning_only_exits_zero(capsys, write):
    code, out, _ = run(capsys, "validate", write("w.tm", "thimac S { action create c action release r flow c -> r : t }"))
    assert code == 0 and "warning:" in out


def test_validate_syntax_error_goes_to_stderr(capsys, write):
    path = write("broken.tm", "thimac S {")
    code, out, err = run(capsys, "validate", path)
    assert code == 1 and out == "" and err.startswith(f"{path}:1:")


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "missing.tm"))
    assert code == 3 and "cannot read" in err


# simulate / behavior


def test_simulate_matches_golden(capsys):
    code, out, _ = run(capsys, "simulate", CAR, CAR_SCN)
    assert code == 0 and out == corpus.read("golden/car_hire_happy.trace")


def test_simulate_writes_file(capsys, tmp_path):
    target = tmp_path / "t.trace"
    assert run(capsys, "simulate", CAR, CAR_SCN, "--out", str(target)) == (0, "", "")
    assert target.read_text() == corpus.read("golden/car_hire_happy.trace")


def test_simulate_empty_scenario(capsys, write):
    code, out, _ = run(capsys, "simulate", CAR, write("e.scn", ""))
    assert code == 0 and out.endswith("end quiescent tick 0\n")


def test_simulate_tick_limit(capsys, write):
    scn = write("l.scn", "inject request at Customer.request.create { available = true }\nlimit 3\n")
    code, out, _ = run(capsys, "simulate", CAR, scn)
    assert code == 0 and out.endswith("end tick-limit tick 3\n")


def test_simulate_rejects_invalid_model(capsys, write):
    bad = write("bad.tm", "thimac S { action process p action receive r flow p -> r : t }")
    code, out, err = run(capsys, "simulate", bad, write("e.scn", ""))
    assert code == 1 and out == "" and "illegal flow adjacency" in err


@pytest.mark.parametrize("scn", ["inject request at Nowhere", "inject request at Customer.request.process"])
def test_simulate_bad_entry(capsys, write, scn):
    code, _, err = run(capsys, "simulate", CAR, write("x.scn", scn))
    assert code == 1 and "error" in err


def test_simulate_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", CAR, CAR_SCN, "--out", str(tmp_path / "no" / "such" / "dir"))
    assert code == 3 and "cannot write" in err


@pytest.mark.parametrize("name", sorted(corpus.GOLDEN))
def test_behavior_matches_golden(capsys, name):
    model, scn, events = (str(corpus.path(f)) for f in corpus.GOLDEN[name])
    code, out, _ = run(capsys, "behavior", model, scn, events)
    assert code == 0 and out == corpus.read(f"golden/{name}.behavior")


def test_behavior_single_event(capsys, write):
    events = write("one.events", "event everything\n" + "\n".join(corpus.car_hire_model().action_paths()))
    code, out, _ = run(capsys, "behavior", CAR, CAR_SCN, events)
    assert code == 0 and out == "node everything#0 0 28\n"


def test_behavior_overlap_warning_on_stderr(capsys, write):
    events = write("o.events", "event a\nSalesDesk.request.check\nevent b\nSalesDesk.request.check\n")
    code, out, err = run(capsys, "behavior", CAR, CAR_SCN, events)
    assert code == 0 and "overlapping" in err and "overlapping" not in out


# dot


def test_dot_empty_model(capsys, write):
    code, out, _ = run(capsys, "dot", write("w.tm", "thimac W { }"))
    assert code == 0 and out.count("subgraph cluster_") == 1 and 'label="W"' in out


def test_dot_car_hire_counts(capsys):
    code, out, _ = run(capsys, "dot", CAR)
    model = corpus.car_hire_model()
    assert code == 0
    assert out.count("style=dashed") == len(model.triggers)
    assert out.count("shape=box") == len(model.action_paths())
    assert out.count("shape=cylinder") == sum(1 for p in model.action_paths() if model.action(p).storage)
    assert out.startswith("digraph TM {") and out.rstrip().endswith("}")


def test_dot_behavior_one_node_per_occurrence(capsys):
    code, out, _ = run(capsys, "dot", CAR, "--scenario", CAR_SCN, "--events", CAR_EVENTS)
    nodes = corpus.read("golden/car_hire_happy.behavior").count("node ")
    assert code == 0 and out.count("shape=ellipse") == nodes


def test_dot_from_listing(capsys, write):
    listing = write("b.txt", corpus.read("golden/car_hire_happy.behavior"))
    code, out, _ = run(capsys, "dot", "--listing", listing)
    assert code == 0 and out.count(" -> ") == corpus.read("golden/car_hire_happy.behavior").count("edge ")


def test_dot_rejects_cyclic_listing(capsys, write):
    listing = write("c.txt", "node a#0 0 1\nnode b#0 1 2\nedge a#0 -> b#0\nedge b#0 -> a#0\n")
    code, out, err = run(capsys, "dot", "--listing", listing)
    assert code == 1 and out == "" and "cycle" in err


@pytest.mark.parametrize("argv", [["dot"], ["dot", CAR, "--scenario", CAR_SCN]])
def test_dot_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_dot_missing_model(capsys, tmp_path):
    assert run(capsys, "dot", str(tmp_path / "nope.tm"))[0] == 3


# chalet


def test_chalet_matches_oracle(capsys):
    code, out, _ = run(capsys, "chalet", CATALOG, "--want", "expensive", "--want", "modern")
    catalog = load_catalog(CATALOG)
    expected = sorted(r.key for r in catalog if r.features["expensive"] and r.features["modern"])
    lines = out.splitlines()
    assert code == 0 and lines[:-1] == expected and lines[-1] == f"pick: {expected[0]}"


def test_chalet_no_match(capsys, write):
    rows = ["id," + ",".join(DEFAULT_PARAMETERS), "c1," + ",".join(["false"] * len(DEFAULT_PARAMETERS))]
    code, out, _ = run(capsys, "chalet", write("c.csv", "\n".join(rows) + "\n"), "--want", "modern")
    assert code == 0 and out == "pick: no chalet\n"


def test_chalet_unknown_parameter(capsys):
    code, out, err = run(capsys, "chalet", CATALOG, "--want", "flying")
    assert code == 1 and out == "" and "flying" in err


def test_chalet_bad_catalog(capsys, write):
    assert run(capsys, "chalet", write("c.csv", "id,modern\nc1,true\n"), "--want", "modern")[0] == 1


def test_chalet_missing_catalog(capsys, tmp_path):
    assert run(capsys, "chalet", str(tmp_path / "none.csv"), "--want", "modern")[0] == 3


# usage


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["chalet", CATALOG], ["simulate", CAR], ["validate", CAR, "-x"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0


def test_outputs_are_byte_identical_across_runs(capsys):
    argv = ["behavior", CAR, CAR_SCN, CAR_EVENTS]
    assert run(capsys, *argv) == run(capsys, *argv)


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "thingmachine", "simulate", CAR, CAR_SCN], capture_output=True, text=True
    )
    assert result.returncode == 0 and result.stdout == corpus.read("golden/car_hire_happy.trace")


@pytest.mark.parametrize("seed", range(5))
def test_random_requests_match_oracle(capsys, seed):
    rng = random.Random(seed)
    wants = rng.sample(DEFAULT_PARAMETERS, rng.randint(1, 3))
    argv = ["chalet", CATALOG]
    for w in wants:
        argv += ["--want", w]
    _, out, _ = run(capsys, *argv)
    catalog = load_catalog(CATALOG)
    assert out.splitlines()[:-1] == sorted(r.key for r in catalog if all(r.features[w] for w in wants))
