"""Run the car-hire happy path and print its chronology.

    python scripts/car_hire_demo.py [--payment-refused] [--dot FILE]
"""

import argparse
from dataclasses import replace

from thingmachine import corpus
from thingmachine.behavior import extract_behavior, format_behavior, parallel_pairs
from thingmachine.dot import behavior_to_dot
from thingmachine.simulator import simulate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--payment-refused", action="store_true")
    parser.add_argument("--dot", help="also write the behavior graph as DOT")
    args = parser.parse_args()

    model, scenario, constraints = corpus.car_hire_happy_path()
    if args.payment_refused:
        inj = scenario.injections[0]
        attrs = {**inj.attributes, "payment_ok": False}
        scenario = replace(scenario, injections=(replace(inj, attributes=attrs),))
    trace = simulate(model, scenario)
    graph = extract_behavior(trace, corpus.car_hire_events(model))

    print(f"{len(trace.events)} events, {trace.reason} at tick {trace.final_tick}")
    print(format_behavior(graph), end="")
    for a, b in parallel_pairs(graph):
        print(f"parallel: {a} | {b}")
    for c in constraints:
        print(f"{'ok  ' if c.holds(graph) else 'FAIL'} {c}")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(behavior_to_dot(graph))


if __name__ == "__main__":
    main()
