#include "sgs/accel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sgs/errors.hpp"

namespace sgs {

void ValidateHwConfig(const HwConfig& hw) {
  if (!(hw.bandwidth_bytes_per_s > 0.0) ||
      !std::isfinite(hw.bandwidth_bytes_per_s)) {
    throw ConfigError("hw '" + hw.name +
                      "': bandwidth_bytes_per_s must be positive and finite");
  }
  if (!(hw.peak_flops_per_s > 0.0) || !std::isfinite(hw.peak_flops_per_s)) {
    throw ConfigError("hw '" + hw.name +
                      "': peak_flops_per_s must be positive and finite");
  }
  if (hw.energy_per_byte_j < 0.0 || !std::isfinite(hw.energy_per_byte_j)) {
    throw ConfigError("hw '" + hw.name +
                      "': energy_per_byte_j must be non-negative and finite");
  }
}

double LayerMacs(const LayerSpec& layer, LayerShape shape) {
  return static_cast<double>(shape.kernels) * shape.channels * layer.kernel_h *
         layer.kernel_w * layer.out_h * layer.out_w;
}

double LayerFlops(const LayerSpec& layer, LayerShape shape) {
  return 2.0 * LayerMacs(layer, shape);
}

double LayerActivationBytes(const LayerSpec& layer, LayerShape shape) {
  if (shape.kernels == 0) return 0.0;
  // Input extent is reconstructed as output extent times stride (padding
  // folded into the fixture's output sizes).  Depthwise layers use the
  // same C-deep input formula under their C = 1 encoding.
  const double in_h = static_cast<double>(layer.out_h) * layer.stride;
  const double in_w = static_cast<double>(layer.out_w) * layer.stride;
  const double in_elems = static_cast<double>(shape.channels) * in_h * in_w;
  const double out_elems =
      static_cast<double>(shape.kernels) * layer.out_h * layer.out_w;
  return (in_elems + out_elems) * layer.act_elem_bytes;
}

QueryCost CostQuery(const SuperNetSpec& spec, const HwConfig& hw,
                    const ShapeVector& subnet, const ShapeVector& cached) {
  ValidateHwConfig(hw);
  if (subnet.size() != spec.LayerCount()) {
    throw StructuralError("cost query: subnet has " +
                          std::to_string(subnet.size()) + " layers, supernet " +
                          std::to_string(spec.LayerCount()));
  }
  if (!cached.empty() && cached.size() != spec.LayerCount()) {
    throw StructuralError("cost query: cached subgraph has " +
                          std::to_string(cached.size()) +
                          " layers, supernet " +
                          std::to_string(spec.LayerCount()));
  }
  if (!cached.empty()) {
    const std::uint64_t cached_bytes = WeightBytes(spec, cached);
    if (cached_bytes > hw.pb_bytes) {
      throw CapacityError("cached subgraph needs " +
                          std::to_string(cached_bytes) +
                          " bytes but the persistent buffer holds " +
                          std::to_string(hw.pb_bytes));
    }
  }

  QueryCost total;
  total.layers.resize(spec.LayerCount());
  for (std::size_t i = 0; i < spec.LayerCount(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    LayerCost& lc = total.layers[i];
    if (subnet[i].kernels == 0 || subnet[i].channels == 0) {
      continue;  // layer dropped from this subnet: zero cost, compute-bound
    }
    lc.flops = LayerFlops(layer, subnet[i]);
    lc.act_bytes = LayerActivationBytes(layer, subnet[i]);
    lc.weight_bytes = LayerWeightBytes(layer, subnet[i]);
    if (!cached.empty()) {
      const LayerShape overlap{std::min(subnet[i].kernels, cached[i].kernels),
                               std::min(subnet[i].channels, cached[i].channels)};
      lc.hit_bytes = LayerWeightBytes(layer, overlap);
    }
    lc.miss_bytes = lc.weight_bytes - lc.hit_bytes;

    const double offchip_bytes =
        static_cast<double>(lc.miss_bytes) + lc.act_bytes;
    lc.compute_s = lc.flops / hw.peak_flops_per_s;
    lc.memory_s = offchip_bytes / hw.bandwidth_bytes_per_s;
    lc.latency_s = std::max(lc.compute_s, lc.memory_s);
    // Zero off-chip traffic means a fully resident, compute-only layer;
    // its intensity is the +infinity sentinel, not a 0/0.
    lc.arithmetic_intensity =
        offchip_bytes > 0.0 ? lc.flops / offchip_bytes
                            : std::numeric_limits<double>::infinity();
    lc.bound = lc.compute_s >= lc.memory_s ? Bound::kCompute : Bound::kMemory;

    total.latency_s += lc.latency_s;
    total.energy_j += offchip_bytes * hw.energy_per_byte_j;
    total.hit_bytes += lc.hit_bytes;
    total.miss_bytes += lc.miss_bytes;
  }
  return total;
}

double CacheFillSeconds(const HwConfig& hw, std::uint64_t fill_bytes) {
  ValidateHwConfig(hw);
  return static_cast<double>(fill_bytes) / hw.bandwidth_bytes_per_s;
}

double CacheFillEnergy(const HwConfig& hw, std::uint64_t fill_bytes) {
  ValidateHwConfig(hw);
  return static_cast<double>(fill_bytes) * hw.energy_per_byte_j;
}

double HitRatio(const ShapeVector& subnet, const ShapeVector& cached) {
  if (!cached.empty() && subnet.size() != cached.size()) {
    throw StructuralError("hit ratio: subnet has " +
                          std::to_string(subnet.size()) +
                          " layers, cached subgraph " +
                          std::to_string(cached.size()));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < subnet.size(); ++i) {
    const double k = subnet[i].kernels;
    const double c = subnet[i].channels;
    den += k * k + c * c;
    if (cached.empty()) continue;
    const double mk = std::min<double>(k, cached[i].kernels);
    const double mc = std::min<double>(c, cached[i].channels);
    num += mk * mk + mc * mc;
  }
  if (den == 0.0) {
    throw ValidationError("hit ratio undefined for an all-zero subnet");
  }
  return std::sqrt(num) / std::sqrt(den);
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void FnvMix(std::uint64_t& h, const std::string& text) {
  for (unsigned char byte : text) {
    h ^= byte;
    h *= kFnvPrime;
  }
}

std::string CanonDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t ModelFingerprint(const HwConfig& hw, const SuperNetSpec& spec) {
  std::uint64_t h = kFnvOffset;
  FnvMix(h, "hw;bw=" + CanonDouble(hw.bandwidth_bytes_per_s) +
                ";flops=" + CanonDouble(hw.peak_flops_per_s) +
                ";pb=" + std::to_string(hw.pb_bytes) +
                ";epb=" + CanonDouble(hw.energy_per_byte_j) + "\n");
  FnvMix(h, "net;name=" + spec.name +
                ";layers=" + std::to_string(spec.LayerCount()) + "\n");
  for (const LayerSpec& l : spec.layers) {
    FnvMix(h, "layer;" + l.name + ";" + std::to_string(l.kernels) + ";" +
                  std::to_string(l.channels) + ";" +
                  std::to_string(l.kernel_h) + ";" +
                  std::to_string(l.kernel_w) + ";" + std::to_string(l.out_h) +
                  ";" + std::to_string(l.out_w) + ";" +
                  std::to_string(l.stride) + ";" +
                  std::to_string(l.weight_elem_bytes) + ";" +
                  std::to_string(l.act_elem_bytes) + ";" +
                  (l.depthwise ? "dw" : "full") + "\n");
  }
  return h;
}

}  // namespace sgs
