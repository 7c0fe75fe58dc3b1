#include "sgs/io.hpp"

#include <fstream>

#include "json.hpp"

#include "sgs/errors.hpp"

namespace sgs {

namespace {

using nlohmann::json;

json ParseFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// at<T>(obj, "field") with FormatError context instead of json's own
// exception types.
template <typename T>
T Field(const json& obj, const std::string& context, const char* key) {
  if (!obj.contains(key)) {
    throw FormatError(context + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(context + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T FieldOr(const json& obj, const std::string& context, const char* key,
          T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(context + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

FixtureBundle LoadFixture(const std::filesystem::path& path) {
  const json root = ParseFile(path);
  const std::string where = path.string();
  FixtureBundle fx;
  fx.spec.name = Field<std::string>(root, where, "name");

  const json layers = Field<json>(root, where, "layers");
  if (!layers.is_array() || layers.empty()) {
    throw FormatError(where + ": 'layers' must be a non-empty array");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string ctx = where + ": layers[" + std::to_string(i) + "]";
    const json& jl = layers[i];
    LayerSpec layer;
    layer.name = Field<std::string>(jl, ctx, "name");
    layer.kernels = Field<std::uint32_t>(jl, ctx, "kernels");
    layer.channels = Field<std::uint32_t>(jl, ctx, "channels");
    layer.kernel_h = FieldOr<std::uint32_t>(jl, ctx, "kernel_h", 1);
    layer.kernel_w = FieldOr<std::uint32_t>(jl, ctx, "kernel_w", 1);
    layer.out_h = FieldOr<std::uint32_t>(jl, ctx, "out_h", 1);
    layer.out_w = FieldOr<std::uint32_t>(jl, ctx, "out_w", 1);
    layer.stride = FieldOr<std::uint32_t>(jl, ctx, "stride", 1);
    layer.weight_elem_bytes =
        FieldOr<std::uint32_t>(jl, ctx, "weight_elem_bytes", 1);
    layer.act_elem_bytes = FieldOr<std::uint32_t>(jl, ctx, "act_elem_bytes", 1);
    layer.depthwise = FieldOr<bool>(jl, ctx, "depthwise", false);
    layer.expand_choices = FieldOr<std::vector<double>>(
        jl, ctx, "expand_choices", std::vector<double>{1.0});
    layer.channel_source = FieldOr<std::int32_t>(jl, ctx, "channel_source", -1);
    if (layer.kernels == 0 || layer.channels == 0) {
      throw FormatError(ctx + ": kernels and channels must be positive");
    }
    if (layer.channel_source >= static_cast<std::int64_t>(layers.size())) {
      throw FormatError(ctx + ": channel_source out of range");
    }
    fx.spec.layers.push_back(std::move(layer));
  }

  const json stages = FieldOr<json>(root, where, "stages", json::array());
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string ctx = where + ": stages[" + std::to_string(s) + "]";
    const json& js = stages[s];
    StageSpec stage;
    stage.name = Field<std::string>(js, ctx, "name");
    stage.blocks =
        Field<std::vector<std::vector<std::uint32_t>>>(js, ctx, "blocks");
    stage.depth_choices =
        Field<std::vector<std::uint32_t>>(js, ctx, "depth_choices");
    if (stage.blocks.empty() || stage.depth_choices.empty()) {
      throw FormatError(ctx + ": blocks and depth_choices must be non-empty");
    }
    for (const auto& block : stage.blocks) {
      for (std::uint32_t layer : block) {
        if (layer >= fx.spec.LayerCount()) {
          throw FormatError(ctx + ": block layer index " +
                            std::to_string(layer) + " out of range");
        }
      }
    }
    for (std::uint32_t d : stage.depth_choices) {
      if (d == 0 || d > stage.blocks.size()) {
        throw FormatError(ctx + ": depth choice " + std::to_string(d) +
                          " outside [1, " + std::to_string(stage.blocks.size()) +
                          "]");
      }
    }
    fx.spec.stages.push_back(std::move(stage));
  }

  const json picks = Field<json>(root, where, "picks");
  if (!picks.is_array() || picks.empty()) {
    throw FormatError(where + ": 'picks' must be a non-empty array");
  }
  for (std::size_t p = 0; p < picks.size(); ++p) {
    const std::string ctx = where + ": picks[" + std::to_string(p) + "]";
    const json& jp = picks[p];
    ElasticPick pick;
    pick.id = Field<std::string>(jp, ctx, "id");
    pick.accuracy = Field<double>(jp, ctx, "accuracy");
    pick.depth = Field<std::vector<std::uint32_t>>(jp, ctx, "depth");
    pick.expand = Field<std::vector<double>>(jp, ctx, "expand");
    fx.picks.push_back(std::move(pick));
  }
  return fx;
}

namespace {

json ShapeToJson(const ShapeVector& shape) {
  json arr = json::array();
  for (const LayerShape& s : shape) {
    arr.push_back(json::array({s.kernels, s.channels}));
  }
  return arr;
}

ShapeVector ShapeFromJson(const json& arr, const std::string& context) {
  if (!arr.is_array()) {
    throw FormatError(context + ": shape must be an array of [K, C] pairs");
  }
  ShapeVector shape;
  shape.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& pair = arr[i];
    if (!pair.is_array() || pair.size() != 2) {
      throw FormatError(context + ": shape[" + std::to_string(i) +
                        "] must be a [K, C] pair");
    }
    try {
      shape.push_back({pair[0].get<std::uint32_t>(),
                       pair[1].get<std::uint32_t>()});
    } catch (const json::exception& e) {
      throw FormatError(context + ": shape[" + std::to_string(i) + "]: " +
                        e.what());
    }
  }
  return shape;
}

void DumpJson(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

}  // namespace

void SaveSubnets(const std::filesystem::path& path,
                 const std::vector<SubNetDescriptor>& subnets) {
  json arr = json::array();
  for (const auto& sn : subnets) {
    json j;
    j["id"] = sn.id;
    j["accuracy"] = sn.accuracy;
    j["weight_bytes"] = sn.weight_bytes;
    j["shape"] = ShapeToJson(sn.shape);
    arr.push_back(std::move(j));
  }
  DumpJson(path, arr);
}

std::vector<SubNetDescriptor> LoadSubnets(const std::filesystem::path& path) {
  const json arr = ParseFile(path);
  const std::string where = path.string();
  if (!arr.is_array() || arr.empty()) {
    throw FormatError(where + ": expected a non-empty descriptor array");
  }
  std::vector<SubNetDescriptor> subnets;
  subnets.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = where + ": [" + std::to_string(i) + "]";
    SubNetDescriptor sn;
    sn.id = Field<std::string>(arr[i], ctx, "id");
    sn.accuracy = Field<double>(arr[i], ctx, "accuracy");
    sn.weight_bytes = Field<std::uint64_t>(arr[i], ctx, "weight_bytes");
    sn.shape = ShapeFromJson(Field<json>(arr[i], ctx, "shape"), ctx);
    subnets.push_back(std::move(sn));
  }
  return subnets;
}

void SaveSubgraphs(const std::filesystem::path& path,
                   const std::vector<SubGraphDescriptor>& subgraphs) {
  json arr = json::array();
  for (const auto& g : subgraphs) {
    json j;
    j["id"] = g.id;
    j["weight_bytes"] = g.weight_bytes;
    j["shape"] = ShapeToJson(g.shape);
    arr.push_back(std::move(j));
  }
  DumpJson(path, arr);
}

std::vector<SubGraphDescriptor> LoadSubgraphs(
    const std::filesystem::path& path) {
  const json arr = ParseFile(path);
  const std::string where = path.string();
  if (!arr.is_array() || arr.empty()) {
    throw FormatError(where + ": expected a non-empty descriptor array");
  }
  std::vector<SubGraphDescriptor> subgraphs;
  subgraphs.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ctx = where + ": [" + std::to_string(i) + "]";
    SubGraphDescriptor g;
    g.id = Field<std::string>(arr[i], ctx, "id");
    g.weight_bytes = Field<std::uint64_t>(arr[i], ctx, "weight_bytes");
    g.shape = ShapeFromJson(Field<json>(arr[i], ctx, "shape"), ctx);
    subgraphs.push_back(std::move(g));
  }
  return subgraphs;
}

HwConfig LoadHwConfig(const std::filesystem::path& path) {
  const json root = ParseFile(path);
  const std::string where = path.string();
  HwConfig hw;
  hw.name = Field<std::string>(root, where, "name");
  hw.bandwidth_bytes_per_s = Field<double>(root, where, "bandwidth_bytes_per_s");
  hw.peak_flops_per_s = Field<double>(root, where, "peak_flops_per_s");
  hw.pb_bytes = Field<std::uint64_t>(root, where, "pb_bytes");
  hw.energy_per_byte_j = Field<double>(root, where, "energy_per_byte_j");
  ValidateHwConfig(hw);
  return hw;
}

}  // namespace sgs
