#include "sgs/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_set>

#include "sgs/errors.hpp"

namespace sgs {

namespace {

// mt19937_64 output mapped to [0, 1) with full 53-bit mantissa coverage.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ShapeKey(const ShapeVector& shape) {
  std::string key;
  key.reserve(shape.size() * 8);
  for (const LayerShape& s : shape) {
    key += std::to_string(s.kernels);
    key += ',';
    key += std::to_string(s.channels);
    key += ';';
  }
  return key;
}

}  // namespace

LatencyTable::LatencyTable(std::uint64_t fingerprint,
                           std::vector<std::string> subnet_ids,
                           std::vector<std::string> subgraph_ids,
                           std::vector<double> entries_s)
    : fingerprint_(fingerprint),
      subnet_ids_(std::move(subnet_ids)),
      subgraph_ids_(std::move(subgraph_ids)),
      entries_s_(std::move(entries_s)) {
  if (entries_s_.size() != subnet_ids_.size() * subgraph_ids_.size()) {
    throw ConfigError("latency table: " + std::to_string(entries_s_.size()) +
                      " entries for " + std::to_string(subnet_ids_.size()) +
                      "x" + std::to_string(subgraph_ids_.size()) + " matrix");
  }
  for (std::size_t i = 0; i < subnet_ids_.size(); ++i) {
    if (!subnet_index_.emplace(subnet_ids_[i], i).second) {
      throw ConfigError("latency table: duplicate subnet id '" +
                        subnet_ids_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < subgraph_ids_.size(); ++i) {
    if (!subgraph_index_.emplace(subgraph_ids_[i], i).second) {
      throw ConfigError("latency table: duplicate subgraph id '" +
                        subgraph_ids_[i] + "'");
    }
  }
}

std::size_t LatencyTable::SubnetIndex(const std::string& subnet_id) const {
  const auto it = subnet_index_.find(subnet_id);
  if (it == subnet_index_.end()) {
    throw LookupError("unknown subnet id '" + subnet_id + "'");
  }
  return it->second;
}

std::size_t LatencyTable::SubgraphIndex(const std::string& subgraph_id) const {
  const auto it = subgraph_index_.find(subgraph_id);
  if (it == subgraph_index_.end()) {
    throw LookupError("unknown subgraph id '" + subgraph_id + "'");
  }
  return it->second;
}

double LatencyTable::At(std::size_t row, std::size_t col) const {
  if (row >= Rows() || col >= Cols()) {
    throw LookupError("table index (" + std::to_string(row) + "," +
                      std::to_string(col) + ") outside " +
                      std::to_string(Rows()) + "x" + std::to_string(Cols()));
  }
  return entries_s_[row * Cols() + col];
}

double LatencyTable::Lookup(const std::string& subnet_id,
                            const std::string& subgraph_id) const {
  return entries_s_[SubnetIndex(subnet_id) * Cols() +
                    SubgraphIndex(subgraph_id)];
}

LatencyTable BuildLatencyTable(
    const SuperNetSpec& spec, const HwConfig& hw,
    const std::vector<SubNetDescriptor>& subnets,
    const std::vector<SubGraphDescriptor>& subgraphs) {
  if (subnets.empty()) throw ConfigError("latency table: no subnets");
  if (subgraphs.empty()) throw ConfigError("latency table: no subgraphs");
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  row_ids.reserve(subnets.size());
  col_ids.reserve(subgraphs.size());
  for (const auto& sn : subnets) row_ids.push_back(sn.id);
  for (const auto& g : subgraphs) col_ids.push_back(g.id);

  std::vector<double> entries;
  entries.reserve(subnets.size() * subgraphs.size());
  for (const auto& sn : subnets) {
    for (const auto& g : subgraphs) {
      entries.push_back(CostQuery(spec, hw, sn.shape, g.shape).latency_s);
    }
  }
  return LatencyTable(ModelFingerprint(hw, spec), std::move(row_ids),
                      std::move(col_ids), std::move(entries));
}

void CheckFresh(const LatencyTable& table, const HwConfig& hw,
                const SuperNetSpec& spec) {
  const std::uint64_t want = ModelFingerprint(hw, spec);
  if (table.Fingerprint() != want) {
    throw StaleTableError(
        "latency table fingerprint " + std::to_string(table.Fingerprint()) +
        " does not match current hardware + supernet (" + std::to_string(want) +
        "); rebuild the table");
  }
}

void SaveTable(const std::filesystem::path& path, const LatencyTable& table) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << "sgsim-table v1\n";
  out << "fingerprint " << table.Fingerprint() << "\n";
  out << "rows " << table.Rows() << "\n";
  out << "cols " << table.Cols() << "\n";
  for (const auto& id : table.SubnetIds()) out << "row " << id << "\n";
  for (const auto& id : table.SubgraphIds()) out << "col " << id << "\n";
  for (std::size_t r = 0; r < table.Rows(); ++r) {
    for (std::size_t c = 0; c < table.Cols(); ++c) {
      if (c) out << ' ';
      out << FormatDouble(table.At(r, c));
    }
    out << "\n";
  }
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

LatencyTable LoadTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string where = path.string();

  std::string line;
  if (!std::getline(in, line) || line != "sgsim-table v1") {
    throw FormatError(where + ": missing 'sgsim-table v1' header");
  }

  auto expect_field = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0) {
      throw FormatError(where + ": expected '" + key + " ...' line");
    }
    return line.substr(key.size() + 1);
  };

  std::uint64_t fingerprint = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  try {
    fingerprint = std::stoull(expect_field("fingerprint"));
    rows = std::stoull(expect_field("rows"));
    cols = std::stoull(expect_field("cols"));
  } catch (const std::logic_error&) {
    throw FormatError(where + ": non-numeric fingerprint/rows/cols");
  }

  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  row_ids.reserve(rows);
  col_ids.reserve(cols);
  for (std::size_t i = 0; i < rows; ++i) row_ids.push_back(expect_field("row"));
  for (std::size_t i = 0; i < cols; ++i) col_ids.push_back(expect_field("col"));

  std::vector<double> entries;
  entries.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw FormatError(where + ": missing entry row " + std::to_string(r));
    }
    std::istringstream row(line);
    double v = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!(row >> v)) {
        throw FormatError(where + ": entry row " + std::to_string(r) +
                          " has fewer than " + std::to_string(cols) +
                          " values");
      }
      entries.push_back(v);
    }
    std::string extra;
    if (row >> extra) {
      throw FormatError(where + ": entry row " + std::to_string(r) +
                        " has more than " + std::to_string(cols) + " values");
    }
  }
  return LatencyTable(fingerprint, std::move(row_ids), std::move(col_ids),
                      std::move(entries));
}

void ExportTableCsv(const std::filesystem::path& path,
                    const LatencyTable& table) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << "subnet_id";
  for (const auto& id : table.SubgraphIds()) out << ',' << id;
  out << "\n";
  for (std::size_t r = 0; r < table.Rows(); ++r) {
    out << table.SubnetIds()[r];
    for (std::size_t c = 0; c < table.Cols(); ++c) {
      out << ',' << FormatDouble(table.At(r, c));
    }
    out << "\n";
  }
}

SubGraphDescriptor EmptySubGraph(const SuperNetSpec& spec) {
  SubGraphDescriptor g;
  g.id = "none";
  g.shape.assign(spec.LayerCount(), LayerShape{0, 0});
  g.weight_bytes = 0;
  return g;
}

namespace {

// Uniform kernel-count scaling, flooring but never dropping a live layer
// below one unit.  Channel widths stay put; weight bytes are linear in K,
// so kernel scaling alone reaches any byte budget.
ShapeVector ScaleKernels(const ShapeVector& shape, double factor) {
  ShapeVector out(shape);
  for (LayerShape& s : out) {
    if (s.kernels > 0) {
      s.kernels = std::max<std::uint32_t>(
          1, static_cast<std::uint32_t>(s.kernels * factor));
    }
  }
  return out;
}

// Shrinks `shape` until its weights fit in `budget` bytes.  Returns false
// if even the all-ones kernel floor is too big.
bool ShrinkToFit(const SuperNetSpec& spec, ShapeVector& shape,
                 std::uint64_t budget) {
  const std::uint64_t bytes = WeightBytes(spec, shape);
  if (bytes <= budget) return true;
  double factor = static_cast<double>(budget) / static_cast<double>(bytes);
  for (int iter = 0; iter < 800; ++iter) {
    ShapeVector scaled = ScaleKernels(shape, factor);
    if (WeightBytes(spec, scaled) <= budget) {
      shape = std::move(scaled);
      return true;
    }
    factor *= 0.99;
  }
  return false;
}

// A random member of the elastic grid: a uniformly drawn depth choice per
// stage and expand choice per layer, pushed through the same shape
// derivation as real picks.
ShapeVector RandomGridShape(const SuperNetSpec& spec, std::mt19937_64& rng) {
  ElasticPick pick;
  pick.id = "grid-sample";
  pick.depth.reserve(spec.stages.size());
  for (const StageSpec& stage : spec.stages) {
    const auto i = static_cast<std::size_t>(
        Uniform01(rng) * static_cast<double>(stage.depth_choices.size()));
    pick.depth.push_back(
        stage.depth_choices[std::min(i, stage.depth_choices.size() - 1)]);
  }
  pick.expand.reserve(spec.LayerCount());
  for (const LayerSpec& layer : spec.layers) {
    const auto i = static_cast<std::size_t>(
        Uniform01(rng) * static_cast<double>(layer.expand_choices.size()));
    pick.expand.push_back(
        layer.expand_choices[std::min(i, layer.expand_choices.size() - 1)]);
  }
  return DeriveShape(spec, pick);
}

}  // namespace

std::vector<SubGraphDescriptor> BuildCandidateSet(
    const SuperNetSpec& spec, const HwConfig& hw,
    const std::vector<SubNetDescriptor>& subnets, std::size_t max_columns,
    std::uint64_t seed, double min_fill_frac) {
  ValidateHwConfig(hw);
  if (hw.pb_bytes == 0) {
    throw ConfigError(
        "candidate set: persistent buffer is empty; nothing can be cached");
  }
  if (subnets.empty()) throw ConfigError("candidate set: no subnets");
  if (max_columns == 0) throw ConfigError("candidate set: max_columns is 0");
  if (!(min_fill_frac > 0.0) || min_fill_frac > 1.0) {
    throw ConfigError("candidate set: fill fraction must be in (0, 1]");
  }

  // Assemble the raw pool: the shared core first (it anchors the
  // farthest-point sweep and is always admitted if it fits), then every
  // pairwise subnet intersection (i == j keeps the subnets themselves),
  // then seeded samples of the elastic grid.  Intersection-derived
  // candidates are the shapes the running-average tracker gravitates
  // toward, so they skip the fill floor that prunes the grid samples.
  std::vector<ShapeVector> pool;
  std::vector<bool> floor_exempt;
  ShapeVector core = subnets.front().shape;
  for (std::size_t i = 1; i < subnets.size(); ++i) {
    core = Intersect(core, subnets[i].shape);
  }
  pool.push_back(core);
  floor_exempt.push_back(true);
  for (std::size_t i = 0; i < subnets.size(); ++i) {
    for (std::size_t j = i; j < subnets.size(); ++j) {
      pool.push_back(Intersect(subnets[i].shape, subnets[j].shape));
      floor_exempt.push_back(true);
    }
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 4096; ++i) {
    pool.push_back(RandomGridShape(spec, rng));
    floor_exempt.push_back(false);
  }

  // Fit to the buffer, apply the fill floor, drop duplicates.  Because the
  // pool lists every exempt candidate before any grid sample, the kept
  // vector is [exempt... | grid...] and exempt_count splits it.
  const auto min_fill = static_cast<std::uint64_t>(
      min_fill_frac * static_cast<double>(hw.pb_bytes));
  std::vector<ShapeVector> kept;
  std::size_t exempt_count = 0;
  std::unordered_set<std::string> seen;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    ShapeVector& shape = pool[p];
    if (!ShrinkToFit(spec, shape, hw.pb_bytes)) continue;
    if (!floor_exempt[p] && WeightBytes(spec, shape) < min_fill) continue;
    std::string key = ShapeKey(shape);
    if (!seen.insert(std::move(key)).second) continue;
    kept.push_back(std::move(shape));
    if (floor_exempt[p]) ++exempt_count;
  }
  if (kept.empty()) {
    throw ConfigError("candidate set: no candidate fits a " +
                      std::to_string(hw.pb_bytes) +
                      "-byte persistent buffer");
  }

  // Column order: every surviving intersection-derived candidate first, in
  // pool order (core, then pairwise intersections) -- this is what makes a
  // buffer big enough for every subnet actually keep every subnet -- then
  // grid samples by farthest-point distance from everything already
  // admitted.  Both parts are deterministic with ties to the lowest index,
  // so a narrower build is a strict prefix of a wider one.
  std::vector<EncodedVector> encoded;
  encoded.reserve(kept.size());
  for (const auto& shape : kept) encoded.push_back(EncodeShape(shape));
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t i = 0; i < encoded[a].size(); ++i) {
      const double diff = encoded[a][i] - encoded[b][i];
      d += diff * diff;
    }
    return d;
  };

  const std::size_t want = std::min(max_columns, kept.size());
  std::vector<std::size_t> order;
  order.reserve(want);
  std::vector<double> min_d2(kept.size(),
                             std::numeric_limits<double>::infinity());
  std::vector<bool> taken(kept.size(), false);
  for (std::size_t i = 0; i < exempt_count && order.size() < want; ++i) {
    order.push_back(i);
    taken[i] = true;
  }
  if (!order.empty()) {
    for (std::size_t i = exempt_count; i < kept.size(); ++i) {
      for (std::size_t s : order) min_d2[i] = std::min(min_d2[i], dist2(i, s));
    }
  }
  std::size_t last = kept.size();
  while (order.size() < want) {
    std::size_t best = kept.size();
    double best_d2 = -1.0;
    for (std::size_t i = exempt_count; i < kept.size(); ++i) {
      if (taken[i]) continue;
      if (last < kept.size()) min_d2[i] = std::min(min_d2[i], dist2(i, last));
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    order.push_back(best);
    taken[best] = true;
    last = best;
  }

  std::vector<SubGraphDescriptor> out;
  out.reserve(order.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    std::string id = std::to_string(rank);
    while (id.size() < 3) id.insert(id.begin(), '0');
    out.push_back(MakeSubGraph(spec, "g" + id, std::move(kept[order[rank]])));
  }
  return out;
}

}  // namespace sgs
