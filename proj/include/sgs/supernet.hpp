#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgs {

// Maximal geometry of one convolution-equivalent layer. A derived network
// narrows kernels/channels; a depth-pruned layer carries K = C = 0 and
// contributes no FLOPs and no bytes.
struct LayerSpec {
  std::string name;
  std::uint32_t kernels = 0;   // K: output feature maps
  std::uint32_t channels = 0;  // C: input feature maps (1 for depthwise)
  std::uint32_t kernel_h = 1;  // R
  std::uint32_t kernel_w = 1;  // S
  std::uint32_t out_h = 1;     // Xo
  std::uint32_t out_w = 1;     // Yo
  std::uint32_t stride = 1;    // input spatial = output spatial * stride
  std::uint32_t weight_elem_bytes = 1;
  std::uint32_t act_elem_bytes = 1;
  bool depthwise = false;
  // Allowed kernel fractions for elastic width at this layer. Must contain 1.0.
  std::vector<double> expand_choices{1.0};
  // Index of the layer whose chosen fraction drives this layer's channel
  // count; -1 keeps the full channel width (stem / fixed-input layers).
  std::int32_t channel_source = -1;
};

// A stage groups blocks; elastic depth keeps the first d blocks of a stage.
struct StageSpec {
  std::string name;
  std::vector<std::vector<std::uint32_t>> blocks;  // layer indices per block
  std::vector<std::uint32_t> depth_choices;        // allowed kept-block counts
};

struct SuperNetSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<StageSpec> stages;

  std::size_t LayerCount() const { return layers.size(); }
};

struct LayerShape {
  std::uint32_t kernels = 0;
  std::uint32_t channels = 0;

  friend bool operator==(LayerShape a, LayerShape b) {
    return a.kernels == b.kernels && a.channels == b.channels;
  }
};

using ShapeVector = std::vector<LayerShape>;

struct SubNetDescriptor {
  std::string id;
  ShapeVector shape;
  double accuracy = 0.0;  // top-1 fraction, caller-supplied metadata
  std::uint64_t weight_bytes = 0;
};

struct SubGraphDescriptor {
  std::string id;
  ShapeVector shape;
  std::uint64_t weight_bytes = 0;
};

// One servable configuration: per-stage kept-block counts plus a per-layer
// kernel fraction drawn from that layer's expand_choices.
struct ElasticPick {
  std::string id;
  double accuracy = 0.0;
  std::vector<std::uint32_t> depth;
  std::vector<double> expand;
};

// [K_1, C_1, K_2, C_2, ..., K_N, C_N]
using EncodedVector = std::vector<double>;

std::uint64_t LayerWeightBytes(const LayerSpec& layer, LayerShape shape);
std::uint64_t WeightBytes(const SuperNetSpec& spec, const ShapeVector& shape);

// Throws StructuralError when the shape length differs from the spec's
// layer count; ValidationError when a layer exceeds its maximal K or C.
void ValidateShape(const SuperNetSpec& spec, const ShapeVector& shape);

EncodedVector Encode(const SuperNetSpec& spec, const ShapeVector& shape);
EncodedVector EncodeShape(const ShapeVector& shape);
ShapeVector DecodeShape(const EncodedVector& values);

ShapeVector Intersect(const ShapeVector& a, const ShapeVector& b);
std::uint64_t OverlapBytes(const SuperNetSpec& spec, const ShapeVector& subnet,
                           const ShapeVector& subgraph);

// a covers b element-wise (every K and C at least as large).
bool Covers(const ShapeVector& a, const ShapeVector& b);

ShapeVector MaximalShape(const SuperNetSpec& spec);

// Materializes one pick.  Throws StructuralError when the pick's depth or
// expand vector length does not match the spec, ValidationError when a
// choice is off the allowed grid or a kept layer sources its channels from
// a pruned one.
ShapeVector DeriveShape(const SuperNetSpec& spec, const ElasticPick& pick);

std::vector<SubNetDescriptor> EnumerateSubnets(
    const SuperNetSpec& spec, const std::vector<ElasticPick>& picks);

// Validates the shape against the spec, then wraps it in a descriptor with
// its weight byte count filled in.
SubGraphDescriptor MakeSubGraph(const SuperNetSpec& spec, std::string id,
                                ShapeVector shape);

}  // namespace sgs
