// Cache-state-aware query scheduler.
//
// Each query carries an accuracy target and a latency target; the active
// policy decides which one is a hard constraint and which is optimized.
// Subnet selection reads the precomputed latency table at the currently
// cached subgraph's column, so the schedule reacts to what is resident.
// Every `window` queries the scheduler re-picks the cached subgraph: it
// keeps a running mean of the last `window` served subnet encodings (the
// "average net") and caches the candidate subgraph closest to that mean in
// Euclidean distance, betting that recent traffic predicts near-future
// traffic.  Swapping the cache costs a weight fetch for the bytes not
// already resident, charged to the next served query.
#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "sgs/supernet.hpp"
#include "sgs/table.hpp"

namespace sgs {

enum class Policy {
  kStrictAccuracy,  // accuracy >= target is hard; minimize latency
  kStrictLatency,   // latency <= target is hard; maximize accuracy
};

Policy ParsePolicy(const std::string& name);  // "strict_accuracy" | "strict_latency"
std::string PolicyName(Policy policy);

struct QueryRequest {
  double accuracy_target = 0.0;
  double latency_target_s = 0.0;
};

struct SchedulerConfig {
  Policy policy = Policy::kStrictAccuracy;
  // Queries per cache decision AND the averaging window length.  0 keeps
  // the initial cache forever (state-unaware baseline).
  std::size_t window = 10;
  std::uint64_t seed = 0;        // seeds the initial random cache pick
  std::string initial_cache;     // subgraph id; empty = seeded random pick
};

// Outcome of the primal selection step, shared by both policies.
struct SubnetChoice {
  std::size_t index = 0;
  // True when no subnet satisfied the hard constraint and the fallback
  // (most accurate / fastest subnet) was served instead.
  bool violated = false;
};

// Picks the subnet for one query given each subnet's latency at the current
// cache state.  Ties break to the lowest index.  Throws ConfigError on
// empty or mismatched inputs.
SubnetChoice SelectSubnet(const std::vector<double>& latency_s,
                          const std::vector<double>& accuracy, Policy policy,
                          const QueryRequest& query);

// Index of the candidate encoding closest (Euclidean) to `average`; ties
// break to the lowest index.  Throws ConfigError on empty candidates and
// StructuralError on dimension mismatch.
std::size_t SelectCache(const EncodedVector& average,
                        const std::vector<EncodedVector>& candidates);

// What one served query looked like, as the scheduler saw it.
struct StepResult {
  std::string subnet_id;
  std::string subgraph_id;        // cache the query ran against
  double table_latency_s = 0.0;   // pure serve latency from the table
  std::uint64_t cache_fill_bytes = 0;  // weight fetch charged to this query
  bool violated = false;
  // Set when this step's trailing cache decision changed the resident
  // subgraph; the fetch it implies lands on the NEXT query's bill.
  bool cache_updated = false;
  std::string new_subgraph_id;  // non-empty iff cache_updated
};

class Scheduler {
 public:
  // `table` rows/cols must match the descriptor ids in order; throws
  // ConfigError otherwise.  The initial cache fill (its full weight bytes)
  // is charged to the first query.
  Scheduler(const SuperNetSpec& spec,
            std::vector<SubNetDescriptor> subnets,
            std::vector<SubGraphDescriptor> subgraphs,
            const LatencyTable& table, SchedulerConfig config);

  StepResult Step(const QueryRequest& query);

  const std::string& CachedSubgraphId() const;
  // Running mean of the last `window` served subnet encodings (zeros
  // before the first query, matching a cold start).
  EncodedVector AverageEncoding() const;

 private:
  void RetargetCache(std::size_t next_cache);

  const SuperNetSpec& spec_;
  std::vector<SubNetDescriptor> subnets_;
  std::vector<SubGraphDescriptor> subgraphs_;
  const LatencyTable& table_;
  SchedulerConfig config_;

  std::vector<double> accuracy_;
  std::vector<EncodedVector> subnet_encoding_;
  std::vector<EncodedVector> subgraph_encoding_;

  std::size_t cache_index_ = 0;
  std::uint64_t pending_fill_bytes_ = 0;
  std::deque<std::size_t> history_;  // served subnet indices, newest last
  std::uint64_t served_count_ = 0;
};

}  // namespace sgs
