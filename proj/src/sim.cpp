#include "sgs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "sgs/errors.hpp"

namespace sgs {

namespace {

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double UniformIn(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * Uniform01(rng);
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Trace GenerateTrace(const std::vector<SubNetDescriptor>& subnets,
                    const LatencyTable& table, const TraceConfig& config) {
  if (subnets.empty()) throw ConfigError("trace: no subnets");
  if (config.count == 0) throw ConfigError("trace: count is 0");
  if (table.Rows() == 0 || table.Cols() == 0) {
    throw ConfigError("trace: empty latency table");
  }

  double acc_min = subnets.front().accuracy;
  double acc_max = acc_min;
  for (const auto& sn : subnets) {
    acc_min = std::min(acc_min, sn.accuracy);
    acc_max = std::max(acc_max, sn.accuracy);
  }
  acc_min = std::max(0.0, acc_min - config.accuracy_margin);
  acc_max = std::min(1.0, acc_max + config.accuracy_margin);

  double lat_min = table.At(0, 0);
  double lat_max = lat_min;
  for (std::size_t r = 0; r < table.Rows(); ++r) {
    for (std::size_t c = 0; c < table.Cols(); ++c) {
      lat_min = std::min(lat_min, table.At(r, c));
      lat_max = std::max(lat_max, table.At(r, c));
    }
  }
  lat_min *= config.latency_low;
  lat_max *= config.latency_high;

  std::mt19937_64 rng(config.seed);
  Trace trace;
  trace.reserve(config.count);
  const double acc_span = acc_max - acc_min;
  const double lat_span = lat_max - lat_min;

  for (std::size_t q = 0; q < config.count; ++q) {
    double af = 0.0;  // accuracy-target position inside its range
    double lf = 0.0;  // latency-target position: 0 = tightest, 1 = loosest
    if (config.mix == "uniform") {
      af = Uniform01(rng);
      lf = Uniform01(rng);
    } else if (config.mix == "accuracy_only") {
      af = Uniform01(rng);
      lf = 1.0;  // latency never binds
    } else if (config.mix == "latency_only") {
      af = 0.0;  // accuracy never binds
      lf = Uniform01(rng);
    } else if (config.mix == "bursty") {
      if (config.burst_len == 0) throw ConfigError("trace: burst_len is 0");
      // Demanding phases want high accuracy AND tight latency.
      const bool high = (q / config.burst_len) % 2 == 1;
      af = high ? UniformIn(rng, 0.6, 1.0) : UniformIn(rng, 0.0, 0.4);
      lf = high ? UniformIn(rng, 0.0, 0.4) : UniformIn(rng, 0.6, 1.0);
    } else {
      throw ConfigError(
          "trace: unknown mix '" + config.mix +
          "' (expected uniform, accuracy_only, latency_only, or bursty)");
    }
    QueryRequest req;
    req.accuracy_target = acc_min + af * acc_span;
    req.latency_target_s = lat_min + lf * lat_span;
    trace.push_back(req);
  }
  return trace;
}

void SaveTraceCsv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << "query_index,accuracy_target,latency_target_s\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << FormatDouble(trace[i].accuracy_target) << ','
        << FormatDouble(trace[i].latency_target_s) << "\n";
  }
}

Trace LoadTraceCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) ||
      line != "query_index,accuracy_target,latency_target_s") {
    throw FormatError(where + ": bad or missing trace header");
  }
  Trace trace;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx, acc, lat;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, acc, ',') ||
        !std::getline(ss, lat)) {
      throw FormatError(where + ": row " + std::to_string(row) +
                        ": expected 3 comma-separated fields");
    }
    QueryRequest req;
    try {
      req.accuracy_target = std::stod(acc);
      req.latency_target_s = std::stod(lat);
    } catch (const std::logic_error&) {
      throw FormatError(where + ": row " + std::to_string(row) +
                        ": non-numeric target");
    }
    trace.push_back(req);
    ++row;
  }
  if (trace.empty()) throw FormatError(where + ": no queries");
  return trace;
}

std::vector<ServingRecord> Replay(
    const SuperNetSpec& spec, const HwConfig& hw,
    const std::vector<SubNetDescriptor>& subnets,
    const std::vector<SubGraphDescriptor>& subgraphs,
    const LatencyTable& table, const Trace& trace,
    const SchedulerConfig& sched_config) {
  CheckFresh(table, hw, spec);
  if (trace.empty()) throw ConfigError("replay: empty trace");

  std::unordered_map<std::string, const SubNetDescriptor*> subnet_by_id;
  for (const auto& sn : subnets) subnet_by_id.emplace(sn.id, &sn);
  std::unordered_map<std::string, const SubGraphDescriptor*> subgraph_by_id;
  for (const auto& g : subgraphs) subgraph_by_id.emplace(g.id, &g);

  Scheduler scheduler(spec, subnets, subgraphs, table, sched_config);
  std::vector<ServingRecord> records;
  records.reserve(trace.size());
  for (std::size_t q = 0; q < trace.size(); ++q) {
    const StepResult step = scheduler.Step(trace[q]);
    const SubNetDescriptor& sn = *subnet_by_id.at(step.subnet_id);
    const SubGraphDescriptor& g = *subgraph_by_id.at(step.subgraph_id);
    const QueryCost cost = CostQuery(spec, hw, sn.shape, g.shape);

    ServingRecord rec;
    rec.query_index = q;
    rec.accuracy_target = trace[q].accuracy_target;
    rec.latency_target_s = trace[q].latency_target_s;
    rec.subnet_id = step.subnet_id;
    rec.subgraph_id = step.subgraph_id;
    rec.table_latency_s = step.table_latency_s;
    rec.cache_fill_bytes = step.cache_fill_bytes;
    rec.cache_fill_s = CacheFillSeconds(hw, step.cache_fill_bytes);
    rec.served_latency_s = rec.table_latency_s + rec.cache_fill_s;
    rec.served_accuracy = sn.accuracy;
    rec.violated = step.violated;
    rec.hit_ratio = HitRatio(sn.shape, g.shape);
    rec.energy_j = cost.energy_j + CacheFillEnergy(hw, step.cache_fill_bytes);
    records.push_back(std::move(rec));
  }
  return records;
}

Summary Aggregate(const std::vector<ServingRecord>& records) {
  if (records.empty()) return Summary{};  // zero queries, all-zero metrics
  Summary s;
  s.queries = records.size();

  std::vector<double> latencies;
  latencies.reserve(records.size());
  bool first_fill_seen = false;
  for (const auto& r : records) {
    latencies.push_back(r.served_latency_s);
    s.mean_latency_s += r.served_latency_s;
    s.mean_accuracy += r.served_accuracy;
    s.mean_hit_ratio += r.hit_ratio;
    s.total_energy_j += r.energy_j;
    s.total_fill_bytes += r.cache_fill_bytes;
    if (r.violated) s.violation_rate += 1.0;
    if (r.served_latency_s <= r.latency_target_s) s.latency_attainment += 1.0;
    if (r.cache_fill_bytes > 0) {
      if (first_fill_seen) ++s.cache_switches;
      first_fill_seen = true;
    }
  }
  const double n = static_cast<double>(records.size());
  s.mean_latency_s /= n;
  s.mean_accuracy /= n;
  s.mean_hit_ratio /= n;
  s.violation_rate /= n;
  s.latency_attainment /= n;

  std::sort(latencies.begin(), latencies.end());
  auto nearest_rank = [&](double pct) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(latencies.size())));
    return latencies[std::min(latencies.size() - 1,
                              rank == 0 ? 0 : rank - 1)];
  };
  s.p50_latency_s = nearest_rank(50.0);
  s.p95_latency_s = nearest_rank(95.0);
  s.p99_latency_s = nearest_rank(99.0);
  return s;
}

void SaveRecordsCsv(const std::filesystem::path& path,
                    const std::vector<ServingRecord>& records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << "query_index,accuracy_target,latency_target_s,subnet_id,subgraph_id,"
         "table_latency_s,cache_fill_bytes,cache_fill_s,served_latency_s,"
         "served_accuracy,violated,hit_ratio,energy_j\n";
  for (const auto& r : records) {
    out << r.query_index << ',' << FormatDouble(r.accuracy_target) << ','
        << FormatDouble(r.latency_target_s) << ',' << r.subnet_id << ','
        << r.subgraph_id << ',' << FormatDouble(r.table_latency_s) << ','
        << r.cache_fill_bytes << ',' << FormatDouble(r.cache_fill_s) << ','
        << FormatDouble(r.served_latency_s) << ','
        << FormatDouble(r.served_accuracy) << ',' << (r.violated ? 1 : 0)
        << ',' << FormatDouble(r.hit_ratio) << ',' << FormatDouble(r.energy_j)
        << "\n";
  }
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

std::vector<ServingRecord> LoadRecordsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::string where = path.string();
  std::string line;
  const std::string header =
      "query_index,accuracy_target,latency_target_s,subnet_id,subgraph_id,"
      "table_latency_s,cache_fill_bytes,cache_fill_s,served_latency_s,"
      "served_accuracy,violated,hit_ratio,energy_j";
  if (!std::getline(in, line) || line != header) {
    throw FormatError(where + ": bad or missing records header");
  }
  std::vector<ServingRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> f;
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 13) {
      throw FormatError(where + ": row " + std::to_string(row) +
                        ": expected 13 fields, got " +
                        std::to_string(f.size()));
    }
    ServingRecord r;
    try {
      r.query_index = std::stoull(f[0]);
      r.accuracy_target = std::stod(f[1]);
      r.latency_target_s = std::stod(f[2]);
      r.subnet_id = f[3];
      r.subgraph_id = f[4];
      r.table_latency_s = std::stod(f[5]);
      r.cache_fill_bytes = std::stoull(f[6]);
      r.cache_fill_s = std::stod(f[7]);
      r.served_latency_s = std::stod(f[8]);
      r.served_accuracy = std::stod(f[9]);
      r.violated = std::stoi(f[10]) != 0;
      r.hit_ratio = std::stod(f[11]);
      r.energy_j = std::stod(f[12]);
    } catch (const std::logic_error&) {
      throw FormatError(where + ": row " + std::to_string(row) +
                        ": non-numeric field");
    }
    records.push_back(std::move(r));
    ++row;
  }
  if (records.empty()) throw FormatError(where + ": no records");
  return records;
}

void SaveSummaryJson(const std::filesystem::path& path, const Summary& summary,
                     const std::string& run_meta_json) {
  nlohmann::json j;
  j["queries"] = summary.queries;
  j["mean_latency_s"] = summary.mean_latency_s;
  j["p50_latency_s"] = summary.p50_latency_s;
  j["p95_latency_s"] = summary.p95_latency_s;
  j["p99_latency_s"] = summary.p99_latency_s;
  j["mean_accuracy"] = summary.mean_accuracy;
  j["violation_rate"] = summary.violation_rate;
  j["latency_attainment"] = summary.latency_attainment;
  j["mean_hit_ratio"] = summary.mean_hit_ratio;
  j["total_energy_j"] = summary.total_energy_j;
  j["total_fill_bytes"] = summary.total_fill_bytes;
  j["cache_switches"] = summary.cache_switches;
  if (!run_meta_json.empty()) {
    try {
      j["run"] = nlohmann::json::parse(run_meta_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("summary run meta: ") + e.what());
    }
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << j.dump(2) << "\n";
}

}  // namespace sgs
