// Precomputed subnet x subgraph latency table.
//
// Serving decisions need the latency of every (servable subnet, cached
// subgraph) pair in constant time, so all pairs are costed offline into a
// dense row-major matrix keyed by id.  A fingerprint of the hardware
// parameters and supernet geometry is stored alongside the entries so a
// table built for a different model or board is rejected instead of
// silently returning wrong numbers.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgs/accel.hpp"
#include "sgs/supernet.hpp"

namespace sgs {

class LatencyTable {
 public:
  LatencyTable() = default;
  // Takes ownership of ids and entries; entries are row-major with
  // rows = subnets and cols = subgraphs.  Throws ConfigError on duplicate
  // ids or a size mismatch.
  LatencyTable(std::uint64_t fingerprint, std::vector<std::string> subnet_ids,
               std::vector<std::string> subgraph_ids,
               std::vector<double> entries_s);

  std::size_t Rows() const { return subnet_ids_.size(); }
  std::size_t Cols() const { return subgraph_ids_.size(); }
  std::uint64_t Fingerprint() const { return fingerprint_; }
  const std::vector<std::string>& SubnetIds() const { return subnet_ids_; }
  const std::vector<std::string>& SubgraphIds() const { return subgraph_ids_; }

  // O(1) id-keyed lookup; throws LookupError on an unknown id.
  double Lookup(const std::string& subnet_id,
                const std::string& subgraph_id) const;
  std::size_t SubnetIndex(const std::string& subnet_id) const;
  std::size_t SubgraphIndex(const std::string& subgraph_id) const;
  double At(std::size_t row, std::size_t col) const;

 private:
  std::uint64_t fingerprint_ = 0;
  std::vector<std::string> subnet_ids_;
  std::vector<std::string> subgraph_ids_;
  std::vector<double> entries_s_;
  std::unordered_map<std::string, std::size_t> subnet_index_;
  std::unordered_map<std::string, std::size_t> subgraph_index_;
};

// Costs every (subnet, subgraph) pair with the analytic model.  Entries
// are pure serve latency; cache-fill time is charged by the replay loop,
// not baked into the table.
LatencyTable BuildLatencyTable(const SuperNetSpec& spec, const HwConfig& hw,
                               const std::vector<SubNetDescriptor>& subnets,
                               const std::vector<SubGraphDescriptor>& subgraphs);

// Throws StaleTableError unless the table's fingerprint matches the given
// hardware + supernet pair.
void CheckFresh(const LatencyTable& table, const HwConfig& hw,
                const SuperNetSpec& spec);

// Plain-text persistence ("sgsim-table v1").  Doubles are written with 17
// significant digits so a save/load round trip is exact and repeated runs
// are byte-identical.  LoadTable throws FormatError on malformed input.
void SaveTable(const std::filesystem::path& path, const LatencyTable& table);
LatencyTable LoadTable(const std::filesystem::path& path);

// Spreadsheet-friendly export: header row of subgraph ids, one row per
// subnet, entries in seconds.
void ExportTableCsv(const std::filesystem::path& path,
                    const LatencyTable& table);

// The no-cache placeholder: an all-zero subgraph named "none" that hits
// nothing.  Used for runs without a persistent buffer.
SubGraphDescriptor EmptySubGraph(const SuperNetSpec& spec);

// Builds the cacheable-subgraph columns for a table.
//
// The pool mixes structure-aware candidates with elastic-grid samples: the
// shared core (element-wise intersection of every subnet), all pairwise
// subnet intersections (which keep the subnets themselves), and seeded
// random members of the elastic choice grid.  Anything larger than the
// persistent buffer gets its kernel counts uniformly scaled down (floored)
// until it fits; grid samples smaller than min_fill_frac of the buffer are
// dropped as a waste of capacity, while intersection-derived candidates
// are kept at any size.  Columns are ordered with every surviving
// intersection-derived candidate first (core, then pairwise
// intersections), so a buffer large enough for every subnet keeps every
// subnet; remaining slots go to grid samples by a farthest-point sweep
// over the encoded vectors.  Pool and sweep are deterministic for a given
// seed, so the first k columns are identical for any two calls differing
// only in max_columns.  Ids are assigned g000, g001, ... in selection
// order.
//
// Throws ConfigError if the buffer is zero-sized, min_fill_frac is outside
// (0, 1], or no candidate fits.
std::vector<SubGraphDescriptor> BuildCandidateSet(
    const SuperNetSpec& spec, const HwConfig& hw,
    const std::vector<SubNetDescriptor>& subnets, std::size_t max_columns,
    std::uint64_t seed, double min_fill_frac = 0.5);

}  // namespace sgs
