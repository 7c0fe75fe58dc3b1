"""Generates the two bundled supernet fixtures and the hardware profiles.

Run from the repository root:  python3 scripts/make_fixtures.py

The builders below lay out two weight-shared families:
  * resnet50ws — bottleneck-residual family, 160x160 input, int8 weights
    and activations, four elastic stages.
  * mobv3ws    — inverted-residual family, 160x160 input, int8 weights,
    fp16 activations, elastic tail stages plus elastic head width.

After emitting fixtures/ and the hardware profiles the script re-derives
every subnet with the reference model and checks the serving properties the
test suite relies on (per-subnet latency-reduction bands, boundedness flips,
traffic savings), so tuning mistakes fail loudly here rather than in C++.
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import sgs_model as M  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURE_DIR = os.path.join(ROOT, "fixtures")


# ---------------------------------------------------------------------------
# resnet50ws: bottleneck-residual family
# ---------------------------------------------------------------------------

RES_FRACS = [0.6, 0.68, 0.8, 0.9, 1.0]
RES_WIDTHS = [64, 128, 256, 512]
RES_SPATIAL = [40, 20, 10, 5]
RES_MAX_DEPTH = [3, 4, 6, 3]
RES_DEPTH_CHOICES = [[2, 3], [3, 4], [4, 5, 6], [2, 3]]
RES_OUT_MULT = 4

# (accuracy, per-stage depth, per-stage width fraction)
RES_PICKS = [
    ("sn0", 0.745, [2, 3, 4, 2], [0.68, 0.68, 0.68, 0.68]),
    ("sn1", 0.758, [3, 3, 4, 2], [0.60, 0.80, 0.80, 0.80]),
    ("sn2", 0.767, [2, 4, 5, 2], [0.80, 0.80, 0.80, 0.80]),
    ("sn3", 0.778, [3, 4, 5, 2], [0.80, 0.80, 0.90, 0.90]),
    ("sn4", 0.792, [3, 4, 6, 3], [0.90, 0.90, 0.90, 0.90]),
    ("sn5", 0.802, [3, 4, 6, 3], [1.00, 1.00, 1.00, 1.00]),
]


def build_resnet50ws() -> dict:
    layers = []
    layer_stage = []  # stage index per layer, -1 for always-active

    def add(name, kernels, channels, kh, kw, out, stride, src, choices,
            stage, act_bytes=1, depthwise=False):
        layers.append(
            dict(
                name=name,
                kernels=kernels,
                channels=channels,
                kernel_h=kh,
                kernel_w=kw,
                out_h=out,
                out_w=out,
                stride=stride,
                weight_elem_bytes=1,
                act_elem_bytes=act_bytes,
                depthwise=depthwise,
                expand_choices=choices,
                channel_source=src,
            )
        )
        layer_stage.append(stage)
        return len(layers) - 1

    stem = add("stem", 64, 3, 7, 7, 80, 2, -1, [1.0], -1)

    stages = []
    stage_input = stem  # always-active layer feeding the next stage
    for s in range(4):
        w = RES_WIDTHS[s]
        x = RES_SPATIAL[s]
        blocks = []
        block_input = stage_input
        block0_c3 = -1
        for b in range(RES_MAX_DEPTH[s]):
            first = b == 0
            strided = first and s > 0
            c1_out = RES_SPATIAL[s - 1] if strided else x
            in_ch = layers[block_input]["kernels"]
            c1 = add(f"s{s + 1}b{b}c1", w, in_ch, 1, 1, c1_out, 1,
                     block_input, RES_FRACS, s)
            c2 = add(f"s{s + 1}b{b}c2", w, w, 3, 3, x,
                     2 if strided else 1, c1, RES_FRACS, s)
            c3 = add(f"s{s + 1}b{b}c3", w * RES_OUT_MULT, w, 1, 1, x, 1,
                     c2, RES_FRACS, s)
            ids = [c1, c2, c3]
            if first:
                d = add(f"s{s + 1}b0d", w * RES_OUT_MULT, in_ch, 1, 1, x,
                        2 if strided else 1, block_input, RES_FRACS, s)
                ids.append(d)
                block0_c3 = c3
            blocks.append(ids)
            block_input = c3
        stages.append(
            dict(name=f"stage{s + 1}", blocks=blocks,
                 depth_choices=RES_DEPTH_CHOICES[s])
        )
        stage_input = block0_c3

    picks = []
    for pid, acc, depth, fracs in RES_PICKS:
        expand = []
        for st in layer_stage:
            expand.append(1.0 if st < 0 else fracs[st])
        picks.append(dict(id=pid, accuracy=acc, depth=depth, expand=expand))

    return dict(name="resnet50ws", layers=layers, stages=stages, picks=picks)


# ---------------------------------------------------------------------------
# mobv3ws: inverted-residual family
# ---------------------------------------------------------------------------

MOB_FRACS = [0.7, 0.72, 0.85, 1.0]

# fraction groups: st1, st2, st3, st4, st5, head (final/head convs)
MOB_PICKS = [
    ("mv0", 0.712, [4, 2], [0.72, 0.72, 0.72, 0.72, 0.72, 0.72]),
    ("mv1", 0.718, [4, 2], [0.85, 0.85, 0.70, 0.85, 0.85, 0.85]),
    ("mv2", 0.726, [5, 2], [0.85, 0.85, 0.85, 0.85, 0.85, 0.85]),
    ("mv3", 0.731, [4, 3], [0.85, 0.85, 0.85, 0.85, 0.85, 0.85]),
    ("mv4", 0.738, [5, 3], [0.85, 0.85, 0.85, 0.85, 0.85, 0.85]),
    ("mv5", 0.747, [6, 3], [0.85, 0.85, 0.85, 1.00, 1.00, 1.00]),
    ("mv6", 0.756, [6, 3], [1.00, 1.00, 1.00, 1.00, 1.00, 1.00]),
]

# (group, spatial, stride-in, blocks as (c_out, expand_ratio), elastic)
MOB_STAGES = [
    (0, 80, 1, [(16, 1)], None),
    (1, 40, 2, [(24, 3)] * 2, None),
    (2, 20, 2, [(40, 3)] * 3, None),
    (3, 10, 2, [(80, 6)] * 6, ("tail1", [4, 5, 6])),
    (4, 5, 2, [(160, 6)] * 3, ("tail2", [2, 3])),
]


def build_mobv3ws() -> dict:
    layers = []
    layer_group = []

    def add(name, kernels, channels, kh, kw, out, stride, src, choices,
            group, depthwise=False):
        layers.append(
            dict(
                name=name,
                kernels=kernels,
                channels=channels,
                kernel_h=kh,
                kernel_w=kw,
                out_h=out,
                out_w=out,
                stride=stride,
                weight_elem_bytes=1,
                act_elem_bytes=2,
                depthwise=depthwise,
                expand_choices=choices,
                channel_source=src,
            )
        )
        layer_group.append(group)
        return len(layers) - 1

    stem = add("stem", 16, 3, 3, 3, 80, 2, -1, [1.0], -1)

    stages = []
    stage_input = stem
    for group, x, first_stride, blocks_cfg, elastic in MOB_STAGES:
        blocks = []
        block_input = stage_input
        block0_proj = -1
        for b, (c_out, ratio) in enumerate(blocks_cfg):
            first = b == 0
            stride = first_stride if first else 1
            exp_out = x * stride  # expansion runs at the input resolution
            in_ch = layers[block_input]["kernels"]
            e = in_ch * ratio
            tag = f"s{group + 1}b{b}"
            exp = add(f"{tag}e", e, in_ch, 1, 1, exp_out, 1, block_input,
                      MOB_FRACS, group)
            dw = add(f"{tag}d", e, 1, 3, 3, x, stride, -1, MOB_FRACS,
                     group, depthwise=True)
            proj = add(f"{tag}p", c_out, e, 1, 1, x, 1, exp, MOB_FRACS,
                       group)
            blocks.append([exp, dw, proj])
            if first:
                block0_proj = proj
            block_input = proj
        if elastic is not None:
            stages.append(
                dict(name=elastic[0], blocks=blocks, depth_choices=elastic[1])
            )
        stage_input = block0_proj

    final = add("final", 960, 160, 1, 1, 5, 1, stage_input, MOB_FRACS, 5)
    head = add("head", 1280, 960, 1, 1, 1, 1, final, MOB_FRACS, 5)
    add("cls", 1000, 1280, 1, 1, 1, 1, head, [1.0], -1)

    picks = []
    for pid, acc, depth, fracs in MOB_PICKS:
        expand = []
        for g in layer_group:
            expand.append(1.0 if g < 0 else fracs[g])
        picks.append(dict(id=pid, accuracy=acc, depth=depth, expand=expand))

    return dict(name="mobv3ws", layers=layers, stages=stages, picks=picks)


# ---------------------------------------------------------------------------
# Hardware profiles
# ---------------------------------------------------------------------------

HW_PROFILES = {
    "hw_edge_large.json": dict(
        name="edge-npu-large-pb",
        bandwidth_bytes_per_s=19.2e9,
        peak_flops_per_s=1.296e12,
        pb_bytes=8000000,
        energy_per_byte_j=2.0e-11,
    ),
    "hw_edge_small.json": dict(
        name="edge-npu-small-pb",
        bandwidth_bytes_per_s=19.2e9,
        peak_flops_per_s=1.296e12,
        pb_bytes=3000000,
        energy_per_byte_j=2.0e-11,
    ),
    "hw_card.json": dict(
        name="card-hbm-slice",
        bandwidth_bytes_per_s=14.4e9,
        peak_flops_per_s=0.9216e12,
        pb_bytes=1690000,
        energy_per_byte_j=2.0e-11,
    ),
}


# ---------------------------------------------------------------------------
# Verification of the serving properties the tests depend on
# ---------------------------------------------------------------------------

def core_shape(shapes: dict) -> list:
    core = None
    for shape, _ in shapes.values():
        core = shape if core is None else M.intersect(core, shape)
    return core


def check_family(tag: str, data: dict, hw: M.Hw, band: tuple,
                 want_traffic_min: float | None,
                 need_flips: bool) -> None:
    spec = M.spec_from_json(data)
    shapes = M.subnet_shapes(data)
    core = core_shape(shapes)
    core_bytes = M.weight_bytes(spec, core)
    assert core_bytes <= hw.pb_bytes, (tag, core_bytes, hw.pb_bytes)
    print(f"[{tag}] core bytes = {core_bytes} "
          f"({core_bytes / 1e6:.3f} MB, PB {hw.pb_bytes / 1e6:.2f} MB)")

    sizes = []
    traffic_by_pick = {}
    for pid, (shape, _) in shapes.items():
        none = M.cost_query(spec, hw, shape, None)
        cached = M.cost_query(spec, hw, shape, core)
        red = 100.0 * (none["latency"] - cached["latency"]) / none["latency"]
        flips = []
        reverse = []
        for layer, ln, lc in zip(spec.layers, none["layers"],
                                  cached["layers"]):
            if ln["bound"] == "memory" and lc["bound"] == "compute":
                flips.append(layer.name)
            if ln["bound"] == "compute" and lc["bound"] == "memory":
                reverse.append(layer.name)
        wb = M.weight_bytes(spec, shape)
        sizes.append((pid, wb))
        hr = M.hit_ratio(shape, core)
        traffic = 100.0 * cached["hit_bytes"] / wb
        traffic_by_pick[pid] = traffic
        print(f"  {pid}: {wb / 1e6:6.3f} MB  "
              f"lat {none['latency'] * 1e6:8.1f} -> "
              f"{cached['latency'] * 1e6:8.1f} us  red {red:5.2f}%  "
              f"flips {len(flips):2d}  hit {hr:.4f}  wtraffic {traffic:5.1f}%")
        assert band[0] <= red <= band[1], (tag, pid, red, band)
        if need_flips:
            assert flips, (tag, pid, "no boundedness flip")
        assert not reverse, (tag, pid, reverse)
    smallest = min(sizes, key=lambda t: t[1])
    largest = max(sizes, key=lambda t: t[1])
    if want_traffic_min is not None:
        got = traffic_by_pick[smallest[0]]
        assert got >= want_traffic_min, (tag, smallest[0], got)
    print(f"  sizes: smallest {smallest[0]} {smallest[1] / 1e6:.3f} MB, "
          f"largest {largest[0]} {largest[1] / 1e6:.3f} MB")
    assert core_bytes < smallest[1], (tag, "core must undercut every subnet")


def main() -> None:
    os.makedirs(FIXTURE_DIR, exist_ok=True)
    res = build_resnet50ws()
    mob = build_mobv3ws()
    for fname, fixture in (("resnet50ws.json", res), ("mobv3ws.json", mob)):
        path = os.path.join(FIXTURE_DIR, fname)
        with open(path, "w") as f:
            json.dump(fixture, f, indent=1)
            f.write("\n")
        print(f"wrote {path} ({len(fixture['layers'])} layers, "
              f"{len(fixture['picks'])} picks)")
    for fname, hw in HW_PROFILES.items():
        path = os.path.join(FIXTURE_DIR, fname)
        with open(path, "w") as f:
            json.dump(hw, f, indent=1)
            f.write("\n")
        print(f"wrote {path}")

    hw_large = M.Hw(19.2e9, 1.296e12, 8000000, 2.0e-11)
    hw_small = M.Hw(19.2e9, 1.296e12, 3000000, 2.0e-11)
    # inner margins relative to the acceptance bands [2,15] and [3,35]
    check_family("resnet50ws", res, hw_large, (3.5, 13.0), None,
                 need_flips=True)
    check_family("mobv3ws", mob, hw_small, (5.0, 30.0), 75.0,
                 need_flips=False)
    print("fixture checks passed")


if __name__ == "__main__":
    main()
