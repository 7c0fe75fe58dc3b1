// Trace generation, trace replay, and result reporting.
//
// A trace is a sequence of (accuracy target, latency target) pairs.  Replay
// drives the scheduler over a trace and prices every served query with the
// analytic model: serve latency from the table, plus the weight-fetch time
// and energy of any cache swap charged to the query that follows it.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgs/accel.hpp"
#include "sgs/sched.hpp"
#include "sgs/supernet.hpp"
#include "sgs/table.hpp"

namespace sgs {

using Trace = std::vector<QueryRequest>;

// How a trace's targets are drawn.  Accuracy bounds come from the subnet
// population (span widened by accuracy_margin, clamped to [0,1]); latency
// bounds come from the table's entry range scaled by latency_low /
// latency_high.
//   uniform:       both targets i.i.d. uniform over their full ranges.
//   accuracy_only: accuracy targets uniform, latency targets pinned at
//                  the loosest bound so only accuracy ever binds.
//   latency_only:  the mirror image.
//   bursty:        alternating burst_len-long phases of demanding
//                  (high accuracy, tight latency) and relaxed queries.
struct TraceConfig {
  std::string mix = "uniform";
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  double accuracy_margin = 0.02;
  double latency_low = 0.8;
  double latency_high = 1.2;
  std::size_t burst_len = 50;
};

Trace GenerateTrace(const std::vector<SubNetDescriptor>& subnets,
                    const LatencyTable& table, const TraceConfig& config);

// trace.csv: "query_index,accuracy_target,latency_target_s", 17
// significant digits, one row per query.
void SaveTraceCsv(const std::filesystem::path& path, const Trace& trace);
Trace LoadTraceCsv(const std::filesystem::path& path);

// Everything recorded about one served query.
struct ServingRecord {
  std::size_t query_index = 0;
  double accuracy_target = 0.0;
  double latency_target_s = 0.0;
  std::string subnet_id;
  std::string subgraph_id;
  double table_latency_s = 0.0;
  std::uint64_t cache_fill_bytes = 0;
  double cache_fill_s = 0.0;
  double served_latency_s = 0.0;  // table latency + fill time
  double served_accuracy = 0.0;
  bool violated = false;
  double hit_ratio = 0.0;
  double energy_j = 0.0;  // serve traffic + fill traffic
};

// Runs the scheduler over the trace.  The table must have been built for
// exactly this hardware + supernet (StaleTableError otherwise) and for
// these descriptor lists.
std::vector<ServingRecord> Replay(const SuperNetSpec& spec, const HwConfig& hw,
                                  const std::vector<SubNetDescriptor>& subnets,
                                  const std::vector<SubGraphDescriptor>& subgraphs,
                                  const LatencyTable& table, const Trace& trace,
                                  const SchedulerConfig& sched);

struct Summary {
  std::size_t queries = 0;
  double mean_latency_s = 0.0;
  double p50_latency_s = 0.0;
  double p95_latency_s = 0.0;
  double p99_latency_s = 0.0;
  double mean_accuracy = 0.0;
  double violation_rate = 0.0;     // fallback served (constraint unmet)
  double latency_attainment = 0.0; // served latency <= latency target
  double mean_hit_ratio = 0.0;
  double total_energy_j = 0.0;
  std::uint64_t total_fill_bytes = 0;
  std::size_t cache_switches = 0;  // fills after the initial one
};

// Percentiles use the nearest-rank method on sorted served latencies.
// An empty record list aggregates to an all-zero summary.
Summary Aggregate(const std::vector<ServingRecord>& records);

// records.csv with one column per ServingRecord field, 17 significant
// digits for doubles.  A save/load round trip reproduces the records.
void SaveRecordsCsv(const std::filesystem::path& path,
                    const std::vector<ServingRecord>& records);
std::vector<ServingRecord> LoadRecordsCsv(const std::filesystem::path& path);

// summary.json: the Summary fields plus a caller-supplied "run" object
// carrying configuration provenance (seeds, policy, fixture paths, ...).
void SaveSummaryJson(const std::filesystem::path& path, const Summary& summary,
                     const std::string& run_meta_json);

}  // namespace sgs
