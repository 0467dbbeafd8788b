"""Writes DST fixtures whose LP optimum is fractional.

Each of k terminals is fed by every relay covering k-1 of them, so the only
LP optimum puts 1/(k-1) on each relay. Variants add unused detours and
padding nodes.
"""
import itertools
import json
import pathlib
import sys


def fixture(k, relay_cost, detour, padding):
    nodes = [{"id": 0, "cost": 0}]
    arcs = []

    def add(cost):
        nodes.append({"id": len(nodes), "cost": cost})
        return len(nodes) - 1

    terminals = [add(0) for _ in range(k)]
    for combo in itertools.combinations(terminals, k - 1):
        hub = 0
        if detour:
            hub = add(0)
            arcs.append([0, hub])
        relay = add(relay_cost)
        arcs.append([hub, relay])
        arcs.extend([relay, t] for t in combo)
    for t in terminals:
        if detour:
            far = add(10 * relay_cost * k)
            arcs.extend([[0, far], [far, t]])
    for _ in range(padding):
        arcs.append([0, add(relay_cost)])
    return {
        "format_version": 1,
        "kind": "dst",
        "directed": True,
        "nodes": nodes,
        "arcs": sorted(arcs),
        "root": 0,
        "terminals": terminals,
    }


def main(out):
    out = pathlib.Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for k in (4, 5, 6, 7):
        for relay_cost in (1, 3):
            for detour, padding in ((False, 0), (True, 0), (False, 2)):
                name = f"k{k}_c{relay_cost}_{'detour' if detour else 'plain'}_p{padding}.json"
                text = json.dumps(fixture(k, relay_cost, detour, padding), indent=2)
                (out / name).write_text(text + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures/dst_fractional")
