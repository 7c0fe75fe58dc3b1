// Analytic accelerator cost model.
//
// Latency follows a per-layer roofline: compute time is FLOPs over peak
// throughput, memory time is off-chip traffic over bandwidth, and the two
// overlap perfectly (double-buffered weight fetch), so a layer costs the
// max of the two.  Off-chip traffic for a layer is its activation bytes
// plus the weight bytes NOT already resident in the persistent buffer.
// Energy is pure off-chip traffic: bytes moved times energy per byte.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgs/supernet.hpp"

namespace sgs {

// Fixed accelerator parameters.  pb_bytes is the capacity of the persistent
// buffer that holds cached subgraph weights across queries; pb_bytes == 0
// models an accelerator with no cross-query weight reuse.
struct HwConfig {
  std::string name;
  double bandwidth_bytes_per_s = 0.0;
  double peak_flops_per_s = 0.0;
  std::uint64_t pb_bytes = 0;
  double energy_per_byte_j = 0.0;
};

// Throws ConfigError unless bandwidth and peak throughput are positive and
// finite and the energy coefficient is non-negative and finite.
void ValidateHwConfig(const HwConfig& hw);

enum class Bound { kCompute, kMemory };

// Per-layer cost detail.  Layers dropped from the subnet (kernels == 0)
// contribute zeros and are classified compute-bound by convention.
struct LayerCost {
  double flops = 0.0;
  double act_bytes = 0.0;
  std::uint64_t weight_bytes = 0;
  std::uint64_t hit_bytes = 0;   // weight bytes served from the PB
  std::uint64_t miss_bytes = 0;  // weight bytes fetched off-chip
  double compute_s = 0.0;
  double memory_s = 0.0;
  double latency_s = 0.0;  // max(compute_s, memory_s)
  double arithmetic_intensity = 0.0;  // flops per off-chip byte
  Bound bound = Bound::kCompute;
};

// One query's cost, summed over layers.
struct QueryCost {
  double latency_s = 0.0;
  double energy_j = 0.0;
  std::uint64_t hit_bytes = 0;
  std::uint64_t miss_bytes = 0;
  std::vector<LayerCost> layers;
};

// Multiply-accumulates for one layer at the given shape.
double LayerMacs(const LayerSpec& layer, LayerShape shape);

// FLOPs = 2 * MACs.
double LayerFlops(const LayerSpec& layer, LayerShape shape);

// Input plus output activation traffic in bytes.  Input spatial extent is
// reconstructed as output extent times stride.
double LayerActivationBytes(const LayerSpec& layer, LayerShape shape);

// Cost of running `subnet` once while `cached` occupies the persistent
// buffer.  Weight bytes covered by the element-wise intersection of the two
// shapes are hits; the rest is fetched.  Pass an empty `cached` (or an
// all-zero shape) for a run with nothing resident.  Throws CapacityError if
// the cached subgraph's weights exceed the buffer.
QueryCost CostQuery(const SuperNetSpec& spec, const HwConfig& hw,
                    const ShapeVector& subnet, const ShapeVector& cached);

// Time and energy to stream `fill_bytes` of weights into the PB.
double CacheFillSeconds(const HwConfig& hw, std::uint64_t fill_bytes);
double CacheFillEnergy(const HwConfig& hw, std::uint64_t fill_bytes);

// ||min(subnet, cached)||_2 / ||subnet||_2 over the encoded vectors.
// An empty `cached` counts as all-zero (ratio 0); an all-zero subnet has
// no defined ratio and throws ValidationError.
double HitRatio(const ShapeVector& subnet, const ShapeVector& cached);

// Stable 64-bit digest (FNV-1a over a canonical text rendering) of every
// quantity that feeds latency entries: hw numbers plus the full layer
// geometry of the supernet.  Tables persist it so a lookup against a table
// built for different hardware or a different supernet is caught.
std::uint64_t ModelFingerprint(const HwConfig& hw, const SuperNetSpec& spec);

}  // namespace sgs
