"""Regenerate the generated corpus files and the golden traces/listings.

    python scripts/regen_corpus.py            # rewrite everything
    python scripts/regen_corpus.py --check    # exit 1 if anything would change

Golden files are reviewed by hand against the narrative before committing.
"""

import argparse
import random
import sys

from thingmachine import corpus
from thingmachine.behavior import extract_behavior, format_behavior
from thingmachine.simulator import format_trace, simulate

CATALOG_SEED = 2023
CATALOG_SIZE = 20
DEMO_CHALETS = 6
DEMO_WANTS = ("expensive", "modern")


def generated() -> dict[str, str]:
    catalog = corpus.random_catalog(random.Random(CATALOG_SEED), CATALOG_SIZE)
    files = {
        "chalet.tm": corpus.chalet_model_text(),
        "chalet.events": corpus.chalet_events_text(),
        "chalet_catalog.csv": corpus.write_catalog(catalog),
        "chalet_demo.scn": corpus.chalet_scenario_text(catalog[:DEMO_CHALETS], DEMO_WANTS),
    }
    return files


def golden() -> dict[str, str]:
    out = {}
    for name, (model_file, scn_file, events_file) in corpus.GOLDEN.items():
        model = corpus.parse_model(corpus.read(model_file))
        scenario = corpus.parse_scenario(corpus.read(scn_file), model)
        trace = simulate(model, scenario)
        out[f"golden/{name}.trace"] = format_trace(trace)
        specs = corpus.event_specs(model, corpus.read(events_file))
        out[f"golden/{name}.behavior"] = format_behavior(extract_behavior(trace, specs))
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()
    stale = []
    # golden outputs depend on the generated inputs, so write those first
    for batch in (generated, golden):
        for rel, text in batch().items():
            target = corpus.path(rel)
            if not target.exists() or target.read_text(encoding="utf-8") != text:
                stale.append(rel)
                if not args.check:
                    target.parent.mkdir(parents=True, exist_ok=True)
                    target.write_text(text, encoding="utf-8")
    for rel in stale:
        print(("stale: " if args.check else "wrote: ") + rel)
    return 1 if (args.check and stale) else 0


if __name__ == "__main__":
    sys.exit(main())
