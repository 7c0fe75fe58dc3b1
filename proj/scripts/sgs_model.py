"""Reference implementation of the analytic serving model.

This is the independent oracle: it mirrors the semantics of the C++ library
(shape derivation, weight/traffic accounting, roofline latency, energy, hit
ratio) in plain Python.  Golden files are computed here and frozen; the C++
tests then compare against them.  Keep this file dependency-free so the
oracle stays trivially auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def round_half_away(x: float) -> int:
    """llround semantics for non-negative x."""
    return int(math.floor(x + 0.5))


@dataclass
class Layer:
    name: str
    kernels: int
    channels: int
    kernel_h: int = 1
    kernel_w: int = 1
    out_h: int = 1
    out_w: int = 1
    stride: int = 1
    weight_elem_bytes: int = 1
    act_elem_bytes: int = 1
    depthwise: bool = False
    expand_choices: list = field(default_factory=lambda: [1.0])
    channel_source: int = -1


@dataclass
class Stage:
    name: str
    blocks: list  # list of lists of layer indices
    depth_choices: list


@dataclass
class Spec:
    name: str
    layers: list
    stages: list


@dataclass
class Hw:
    bandwidth: float
    flops: float
    pb_bytes: int
    energy_per_byte: float


def scaled_count(frac: float, maximal: int) -> int:
    if maximal == 0:
        return 0
    return max(1, min(maximal, round_half_away(frac * maximal)))


def derive_shape(spec: Spec, depth: list, expand: list) -> list:
    """Returns [(K, C)] per layer; dropped-block layers are (0, 0)."""
    active = [True] * len(spec.layers)
    assert len(depth) == len(spec.stages)
    for s, stage in enumerate(spec.stages):
        assert depth[s] in stage.depth_choices, (stage.name, depth[s])
        for b in range(depth[s], len(stage.blocks)):
            for li in stage.blocks[b]:
                active[li] = False
    shape = []
    for i, layer in enumerate(spec.layers):
        if not active[i]:
            shape.append((0, 0))
            continue
        frac = expand[i]
        assert any(abs(frac - c) <= 1e-9 for c in layer.expand_choices), (
            layer.name,
            frac,
        )
        k = scaled_count(frac, layer.kernels)
        if layer.channel_source >= 0:
            assert active[layer.channel_source], (layer.name, "source pruned")
            cfrac = expand[layer.channel_source]
        else:
            cfrac = 1.0
        c = scaled_count(cfrac, layer.channels)
        shape.append((k, c))
    return shape


def layer_weight_bytes(layer: Layer, k: int, c: int) -> int:
    return k * c * layer.kernel_h * layer.kernel_w * layer.weight_elem_bytes


def weight_bytes(spec: Spec, shape: list) -> int:
    return sum(
        layer_weight_bytes(l, k, c)
        for l, (k, c) in zip(spec.layers, shape)
    )


def intersect(a: list, b: list) -> list:
    assert len(a) == len(b)
    return [(min(ak, bk), min(ac, bc)) for (ak, ac), (bk, bc) in zip(a, b)]


def layer_flops(layer: Layer, k: int, c: int) -> float:
    return (
        2.0 * k * c * layer.kernel_h * layer.kernel_w * layer.out_h
        * layer.out_w
    )


def layer_act_bytes(layer: Layer, k: int, c: int) -> float:
    if k == 0:
        return 0.0
    in_h = float(layer.out_h) * layer.stride
    in_w = float(layer.out_w) * layer.stride
    return (c * in_h * in_w + k * layer.out_h * layer.out_w) * (
        layer.act_elem_bytes
    )


def cost_query(spec: Spec, hw: Hw, subnet: list, cached: list | None):
    """Mirrors the C++ per-layer roofline walk, same summation order."""
    ridge = hw.flops / hw.bandwidth
    layers = []
    latency = 0.0
    energy = 0.0
    hit_total = 0
    miss_total = 0
    for i, layer in enumerate(spec.layers):
        k, c = subnet[i]
        if k == 0 or c == 0:
            layers.append(
                dict(flops=0.0, act=0.0, w=0, hit=0, miss=0, comp=0.0,
                     mem=0.0, lat=0.0, ai=0.0, bound="compute")
            )
            continue
        flops = layer_flops(layer, k, c)
        act = layer_act_bytes(layer, k, c)
        w = layer_weight_bytes(layer, k, c)
        hit = 0
        if cached is not None:
            gk, gc = cached[i]
            hit = layer_weight_bytes(layer, min(k, gk), min(c, gc))
        miss = w - hit
        offchip = float(miss) + act
        comp = flops / hw.flops
        mem = offchip / hw.bandwidth
        lat = max(comp, mem)
        ai = flops / offchip if offchip > 0.0 else math.inf
        bound = "compute" if comp >= mem else "memory"
        layers.append(
            dict(flops=flops, act=act, w=w, hit=hit, miss=miss, comp=comp,
                 mem=mem, lat=lat, ai=ai, bound=bound)
        )
        latency += lat
        energy += offchip * hw.energy_per_byte
        hit_total += hit
        miss_total += miss
    del ridge
    return dict(
        latency=latency,
        energy=energy,
        hit_bytes=hit_total,
        miss_bytes=miss_total,
        layers=layers,
    )


def hit_ratio(subnet: list, cached: list) -> float:
    num = 0.0
    den = 0.0
    for (k, c), (gk, gc) in zip(subnet, cached):
        mk = float(min(k, gk))
        mc = float(min(c, gc))
        num += mk * mk + mc * mc
        den += float(k) * k + float(c) * c
    assert den > 0.0
    return math.sqrt(num) / math.sqrt(den)


def spec_from_json(data: dict) -> Spec:
    layers = [
        Layer(
            name=jl["name"],
            kernels=jl["kernels"],
            channels=jl["channels"],
            kernel_h=jl.get("kernel_h", 1),
            kernel_w=jl.get("kernel_w", 1),
            out_h=jl.get("out_h", 1),
            out_w=jl.get("out_w", 1),
            stride=jl.get("stride", 1),
            weight_elem_bytes=jl.get("weight_elem_bytes", 1),
            act_elem_bytes=jl.get("act_elem_bytes", 1),
            depthwise=jl.get("depthwise", False),
            expand_choices=jl.get("expand_choices", [1.0]),
            channel_source=jl.get("channel_source", -1),
        )
        for jl in data["layers"]
    ]
    stages = [
        Stage(js["name"], js["blocks"], js["depth_choices"])
        for js in data.get("stages", [])
    ]
    return Spec(data["name"], layers, stages)


def subnet_shapes(data: dict) -> dict:
    """id -> (shape, accuracy) for every pick in a fixture dict."""
    spec = spec_from_json(data)
    out = {}
    for pick in data["picks"]:
        shape = derive_shape(spec, pick["depth"], pick["expand"])
        out[pick["id"]] = (shape, pick["accuracy"])
    return out
