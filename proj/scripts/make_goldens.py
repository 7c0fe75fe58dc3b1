"""Computes the frozen golden values for the bundled fixtures.

Run from the repository root AFTER make_fixtures.py:

    python3 scripts/make_goldens.py

For each (fixture, hardware profile) pair this derives every pick with the
reference model in scripts/sgs_model.py and records exact weight byte
counts, roofline latencies with an empty buffer and with the shared core
resident, energies, hit/miss traffic, hit ratios, and the set of layers
whose boundedness flips from memory to compute when the core is cached.
The output is committed under tests/golden/ and treated as frozen: the C++
implementation must reproduce these numbers, never the other way around.
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import sgs_model as M  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURE_DIR = os.path.join(ROOT, "fixtures")
GOLDEN_DIR = os.path.join(ROOT, "tests", "golden")


def load(fname: str) -> dict:
    with open(os.path.join(FIXTURE_DIR, fname)) as f:
        return json.load(f)


def family_golden(fixture: dict, hw_json: dict) -> dict:
    spec = M.spec_from_json(fixture)
    hw = M.Hw(
        hw_json["bandwidth_bytes_per_s"],
        hw_json["peak_flops_per_s"],
        hw_json["pb_bytes"],
        hw_json["energy_per_byte_j"],
    )
    shapes = M.subnet_shapes(fixture)
    core = None
    for shape, _ in shapes.values():
        core = shape if core is None else M.intersect(core, shape)

    subnets = []
    for pid, (shape, acc) in shapes.items():
        none = M.cost_query(spec, hw, shape, None)
        cached = M.cost_query(spec, hw, shape, core)
        flips = []
        for layer, ln, lc in zip(spec.layers, none["layers"],
                                  cached["layers"]):
            if ln["bound"] == "memory" and lc["bound"] == "compute":
                flips.append(layer.name)
            assert not (ln["bound"] == "compute"
                        and lc["bound"] == "memory"), layer.name
        wb = M.weight_bytes(spec, shape)
        subnets.append(
            dict(
                id=pid,
                accuracy=acc,
                weight_bytes=wb,
                latency_none_s=none["latency"],
                latency_core_s=cached["latency"],
                reduction_pct=100.0 * (none["latency"] - cached["latency"])
                / none["latency"],
                energy_none_j=none["energy"],
                energy_core_j=cached["energy"],
                hit_bytes_core=cached["hit_bytes"],
                miss_bytes_core=cached["miss_bytes"],
                hit_ratio_core=M.hit_ratio(shape, core),
                flip_layers=flips,
            )
        )

    smallest = min(subnets, key=lambda s: s["weight_bytes"])
    return dict(
        fixture=fixture["name"],
        hw=hw_json,
        core_weight_bytes=M.weight_bytes(spec, core),
        smallest_id=smallest["id"],
        smallest_weight_traffic_saving_pct=100.0
        * smallest["hit_bytes_core"] / smallest["weight_bytes"],
        subnets=subnets,
    )


def main() -> None:
    os.makedirs(GOLDEN_DIR, exist_ok=True)
    jobs = [
        ("resnet50ws.json", "hw_edge_large.json", "resnet50ws_golden.json"),
        ("mobv3ws.json", "hw_edge_small.json", "mobv3ws_golden.json"),
    ]
    for fix_name, hw_name, out_name in jobs:
        golden = family_golden(load(fix_name), load(hw_name))
        path = os.path.join(GOLDEN_DIR, out_name)
        with open(path, "w") as f:
            json.dump(golden, f, indent=1)
            f.write("\n")
        print(f"wrote {path}: core {golden['core_weight_bytes']} B, "
              f"{len(golden['subnets'])} subnets, smallest "
              f"{golden['smallest_id']} saves "
              f"{golden['smallest_weight_traffic_saving_pct']:.1f}% traffic")


if __name__ == "__main__":
    main()
