import random

import pytest
from hypothesis import settings

from thingmachine import corpus
from thingmachine.generate import random_model, random_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def car_hire():
    return corpus.car_hire_model()


@pytest.fixture(scope="session")
def car_hire_happy():
    return corpus.car_hire_happy_path()


@pytest.fixture(scope="session")
def chalet():
    return corpus.chalet_model()


def seeded_models(n: int = 100):
    for seed in range(n):
        rng = random.Random(seed)
        model = random_model(rng)
        yield seed, model, random_scenario(rng, model)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
