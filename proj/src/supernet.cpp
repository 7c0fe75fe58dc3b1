#include "sgs/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sgs/errors.hpp"

namespace sgs {

namespace {

std::string LengthMessage(const char* what, std::size_t got, std::size_t want) {
  return std::string(what) + ": expected " + std::to_string(want) +
         " layers, got " + std::to_string(got);
}

bool FractionAllowed(double frac, const std::vector<double>& choices) {
  for (double c : choices) {
    if (std::abs(frac - c) <= 1e-9) return true;
  }
  return false;
}

std::uint32_t ScaledCount(double frac, std::uint32_t maximal) {
  if (maximal == 0) return 0;
  const auto scaled = static_cast<std::uint32_t>(std::llround(frac * maximal));
  return std::clamp<std::uint32_t>(scaled, 1, maximal);
}

}  // namespace

std::uint64_t LayerWeightBytes(const LayerSpec& layer, LayerShape shape) {
  return static_cast<std::uint64_t>(shape.kernels) * shape.channels *
         layer.kernel_h * layer.kernel_w * layer.weight_elem_bytes;
}

std::uint64_t WeightBytes(const SuperNetSpec& spec, const ShapeVector& shape) {
  if (shape.size() != spec.LayerCount()) {
    throw StructuralError(
        LengthMessage("shape length mismatch", shape.size(), spec.LayerCount()));
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    total += LayerWeightBytes(spec.layers[i], shape[i]);
  }
  return total;
}

void ValidateShape(const SuperNetSpec& spec, const ShapeVector& shape) {
  if (shape.size() != spec.LayerCount()) {
    throw StructuralError(
        LengthMessage("shape length mismatch", shape.size(), spec.LayerCount()));
  }
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i].kernels > spec.layers[i].kernels ||
        shape[i].channels > spec.layers[i].channels) {
      throw ValidationError("layer " + std::to_string(i) + " (" +
                            spec.layers[i].name + "): shape (" +
                            std::to_string(shape[i].kernels) + "," +
                            std::to_string(shape[i].channels) +
                            ") exceeds maximal (" +
                            std::to_string(spec.layers[i].kernels) + "," +
                            std::to_string(spec.layers[i].channels) + ")");
    }
  }
}

EncodedVector EncodeShape(const ShapeVector& shape) {
  EncodedVector values;
  values.reserve(shape.size() * 2);
  for (const LayerShape& s : shape) {
    values.push_back(static_cast<double>(s.kernels));
    values.push_back(static_cast<double>(s.channels));
  }
  return values;
}

EncodedVector Encode(const SuperNetSpec& spec, const ShapeVector& shape) {
  if (shape.size() != spec.LayerCount()) {
    throw StructuralError(
        LengthMessage("encode", shape.size(), spec.LayerCount()));
  }
  return EncodeShape(shape);
}

ShapeVector DecodeShape(const EncodedVector& values) {
  if (values.size() % 2 != 0) {
    throw StructuralError("encoded vector length " +
                          std::to_string(values.size()) + " is not even");
  }
  ShapeVector shape(values.size() / 2);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double k = values[2 * i];
    const double c = values[2 * i + 1];
    if (k < 0.0 || c < 0.0) {
      throw ValidationError("encoded vector has a negative entry at layer " +
                            std::to_string(i));
    }
    shape[i].kernels = static_cast<std::uint32_t>(std::llround(k));
    shape[i].channels = static_cast<std::uint32_t>(std::llround(c));
  }
  return shape;
}

ShapeVector Intersect(const ShapeVector& a, const ShapeVector& b) {
  if (a.size() != b.size()) {
    throw StructuralError(LengthMessage("intersect", b.size(), a.size()));
  }
  ShapeVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i].kernels = std::min(a[i].kernels, b[i].kernels);
    out[i].channels = std::min(a[i].channels, b[i].channels);
  }
  return out;
}

std::uint64_t OverlapBytes(const SuperNetSpec& spec, const ShapeVector& subnet,
                           const ShapeVector& subgraph) {
  return WeightBytes(spec, Intersect(subnet, subgraph));
}

bool Covers(const ShapeVector& a, const ShapeVector& b) {
  if (a.size() != b.size()) {
    throw StructuralError(LengthMessage("covers", b.size(), a.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kernels < b[i].kernels || a[i].channels < b[i].channels) {
      return false;
    }
  }
  return true;
}

ShapeVector MaximalShape(const SuperNetSpec& spec) {
  ShapeVector shape(spec.LayerCount());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    shape[i] = {spec.layers[i].kernels, spec.layers[i].channels};
  }
  return shape;
}

ShapeVector DeriveShape(const SuperNetSpec& spec, const ElasticPick& pick) {
  if (pick.depth.size() != spec.stages.size()) {
    throw StructuralError("pick '" + pick.id + "': expected " +
                          std::to_string(spec.stages.size()) +
                          " per-stage depth choices, got " +
                          std::to_string(pick.depth.size()));
  }
  if (pick.expand.size() != spec.LayerCount()) {
    throw StructuralError("pick '" + pick.id + "': expected " +
                          std::to_string(spec.LayerCount()) +
                          " per-layer expand fractions, got " +
                          std::to_string(pick.expand.size()));
  }

  std::vector<bool> active(spec.LayerCount(), true);
  for (std::size_t s = 0; s < spec.stages.size(); ++s) {
    const StageSpec& stage = spec.stages[s];
    const std::uint32_t depth = pick.depth[s];
    if (std::find(stage.depth_choices.begin(), stage.depth_choices.end(),
                  depth) == stage.depth_choices.end()) {
      throw ValidationError("pick '" + pick.id + "': depth " +
                            std::to_string(depth) +
                            " is not an allowed choice for stage '" +
                            stage.name + "'");
    }
    for (std::size_t b = depth; b < stage.blocks.size(); ++b) {
      for (std::uint32_t layer : stage.blocks[b]) {
        active[layer] = false;
      }
    }
  }

  ShapeVector shape(spec.LayerCount());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!active[i]) continue;  // stays (0, 0)
    const LayerSpec& layer = spec.layers[i];
    const double frac = pick.expand[i];
    if (!FractionAllowed(frac, layer.expand_choices)) {
      throw ValidationError("pick '" + pick.id + "': expand fraction " +
                            std::to_string(frac) +
                            " is not an allowed choice for layer " +
                            std::to_string(i) + " ('" + layer.name + "')");
    }
    shape[i].kernels = ScaledCount(frac, layer.kernels);

    double channel_frac = 1.0;
    if (layer.channel_source >= 0) {
      const auto src = static_cast<std::size_t>(layer.channel_source);
      if (!active[src]) {
        throw ValidationError("pick '" + pick.id + "': layer " +
                              std::to_string(i) +
                              " draws channels from depth-pruned layer " +
                              std::to_string(src));
      }
      channel_frac = pick.expand[src];
    }
    shape[i].channels = ScaledCount(channel_frac, layer.channels);
  }
  return shape;
}

std::vector<SubNetDescriptor> EnumerateSubnets(
    const SuperNetSpec& spec, const std::vector<ElasticPick>& picks) {
  std::vector<SubNetDescriptor> subnets;
  subnets.reserve(picks.size());
  for (const ElasticPick& pick : picks) {
    SubNetDescriptor sn;
    sn.id = pick.id;
    sn.shape = DeriveShape(spec, pick);
    sn.accuracy = pick.accuracy;
    sn.weight_bytes = WeightBytes(spec, sn.shape);
    subnets.push_back(std::move(sn));
  }
  return subnets;
}

SubGraphDescriptor MakeSubGraph(const SuperNetSpec& spec, std::string id,
                                ShapeVector shape) {
  ValidateShape(spec, shape);
  SubGraphDescriptor g;
  g.id = std::move(id);
  g.weight_bytes = WeightBytes(spec, shape);
  g.shape = std::move(shape);
  return g;
}

}  // namespace sgs
