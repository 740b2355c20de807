import io
import random
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thingmachine import corpus
from thingmachine.behavior import extract_behavior
from thingmachine.corpus import (
    CAR_HIRE_STEPS,
    DEFAULT_PARAMETERS,
    BadBoolean,
    BuyerRequest,
    ChaletRecord,
    MissingColumn,
    UnknownParameter,
    load_catalog,
    random_catalog,
    run_chalet_pipeline,
    write_catalog,
)
from thingmachine.dsl import parse_model
from thingmachine.simulator import simulate
from thingmachine.validator import check_reachability, validate

ROOT = Path(__file__).resolve().parents[1]


def brute_force(catalog, wants):
    return sorted(r.key for r in catalog if all(r.features[w] for w in wants))


def csv_text(rows, columns=("id", *DEFAULT_PARAMETERS)):
    return "\n".join([",".join(columns), *rows]) + "\n"


def row(key, value="true"):
    return ",".join([key, *[value] * len(DEFAULT_PARAMETERS)])


# catalog


def test_three_rows():
    assert [r.key for r in load_catalog(io.StringIO(csv_text([row("a"), row("b", "0"), row("c", "1")])))] == ["a", "b", "c"]


def test_missing_column():
    columns = ["id", *(p for p in DEFAULT_PARAMETERS if p != "modern")]
    with pytest.raises(MissingColumn) as info:
        load_catalog(io.StringIO(csv_text([], columns)))
    assert info.value.column == "modern"


def test_bad_boolean_names_row_and_column():
    text = csv_text([row("a"), "b,true,yes," + ",".join(["true"] * 6)])
    with pytest.raises(BadBoolean) as info:
        load_catalog(io.StringIO(text))
    assert (info.value.row, info.value.column) == (2, "beautiful")


def test_shipped_catalog_round_trips():
    catalog = load_catalog(corpus.path("chalet_catalog.csv"))
    assert len(catalog) == 20
    assert write_catalog(catalog) == corpus.read("chalet_catalog.csv")


@given(st.integers(0, 2**32), st.integers(0, 20))
def test_generated_catalog_round_trips(seed, size):
    catalog = random_catalog(random.Random(seed), size)
    assert load_catalog(io.StringIO(write_catalog(catalog))) == catalog


# pipeline


def test_single_matching_chalet():
    catalog = [ChaletRecord("only", {p: True for p in DEFAULT_PARAMETERS})]
    assert run_chalet_pipeline(catalog, ["modern", "cheap"]).keys() == ["only"]


def test_unknown_parameter():
    with pytest.raises(UnknownParameter):
        run_chalet_pipeline([], ["flying"])


def test_empty_request_rejected():
    with pytest.raises(ValueError):
        BuyerRequest([])


def test_custom_parameter_list():
    params = ("near_lake", "cheap")
    catalog = [ChaletRecord("x", {"near_lake": True, "cheap": False}), ChaletRecord("y", {"near_lake": True, "cheap": True})]
    assert run_chalet_pipeline(catalog, ["near_lake"], params).keys() == ["x", "y"]
    with pytest.raises(UnknownParameter):
        run_chalet_pipeline(catalog, ["modern"], params)


@pytest.mark.parametrize("seed", range(25))
def test_pipeline_matches_brute_force(seed):
    rng = random.Random(seed)
    catalog = random_catalog(rng, rng.randint(0, 20))
    wants = rng.sample(DEFAULT_PARAMETERS, rng.randint(1, len(DEFAULT_PARAMETERS)))
    assert run_chalet_pipeline(catalog, wants).keys() == brute_force(catalog, wants)


# car hire


def test_car_hire_carries_every_step(car_hire):
    annotated = {n for p in car_hire.action_paths() for n in car_hire.action(p).steps}
    annotated |= {n for f in car_hire.flows for n in f.steps} | {n for t in car_hire.triggers for n in t.steps}
    assert set(CAR_HIRE_STEPS) <= annotated
    assert 18 not in annotated
    assert "no action carries step 18" in corpus.read("car_hire.tm")


def test_car_hire_happy_path(car_hire_happy):
    model, scn, constraints = car_hire_happy
    assert validate(model) == [] and check_reachability(model) == []
    graph = extract_behavior(simulate(model, scn), corpus.car_hire_events(model))
    assert all(c.holds(graph) for c in constraints)


def test_payment_refused_has_no_confirmation(car_hire_happy):
    model, scn, _ = car_hire_happy
    from dataclasses import replace

    inj = replace(scn.injections[0], attributes={"available": True, "payment_ok": False})
    trace = simulate(model, replace(scn, injections=(inj,)))
    assert not any("confirmation" in e.action_path for e in trace.events)


def test_constraint_missing_node_fails(car_hire_happy):
    model, scn, constraints = car_hire_happy
    graph = extract_behavior(simulate(model, scn), [])
    assert not any(c.holds(graph) for c in constraints)


# chalet model


def test_chalet_model_is_clean(chalet):
    assert validate(chalet) == [] and check_reachability(chalet) == []


def test_chalet_model_text_is_generated():
    assert corpus.chalet_model_text() == corpus.read("chalet.tm")
    assert corpus.chalet_events_text() == corpus.read("chalet.events")


def test_chalet_model_for_other_parameters():
    m = parse_model(corpus.chalet_model_text(("near_lake", "cheap", "old")))
    assert validate(m) == [] and check_reachability(m) == []


def test_chalet_demo_retrieves_requested_sets():
    model, scn, _ = corpus.chalet_demo()
    trace = simulate(model, scn)
    released = {e.action_path for e in trace.events if e.action_path.endswith("_set.ext")}
    assert released == {"ChaletMarket.expensive_set.ext", "ChaletMarket.modern_set.ext"}
    assert trace.reason == "quiescent"


def test_regenerated_corpus_is_current():
    result = subprocess.run(
        [sys.executable, str(ROOT / "scripts" / "regen_corpus.py"), "--check"], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stdout
