// sgsim: command-line front end for the weight-shared serving simulator.
//
// Subcommands mirror the pipeline stages:
//   gen     derive servable subnet descriptors from a fixture
//   table   build the candidate subgraph set and the latency table
//   sim     generate/replay a query trace through the scheduler
//   dse     sweep hardware parameters and report latency savings
//   report  emit plot-ready per-layer and per-query CSVs
//
// Every command takes --out (default: $SGSIM_OUT, else the current
// directory).  All randomness funnels through each command's --seed; the
// distinct random uses (trace, candidates, scheduler) draw decorrelated
// sub-seeds from it, so reruns with identical flags are byte-identical.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgs/accel.hpp"
#include "sgs/dse.hpp"
#include "sgs/errors.hpp"
#include "sgs/io.hpp"
#include "sgs/sched.hpp"
#include "sgs/sim.hpp"
#include "sgs/supernet.hpp"
#include "sgs/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// SplitMix64 step: decorrelates the per-purpose sub-seeds drawn from one
// user-facing seed.
std::uint64_t SubSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

fs::path ResolveOutDir(const std::string& flag) {
  fs::path dir;
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv("SGSIM_OUT")) {
    dir = env;
  } else {
    dir = ".";
  }
  fs::create_directories(dir);
  return dir;
}

void DumpJson(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw sgs::FormatError("cannot open '" + path.string() + "' for write");
  }
  out << j.dump(2) << "\n";
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shared flag bundles -------------------------------------------------------

struct GenArgs {
  std::string fixture;
  std::string out;
};

struct TableArgs {
  std::string fixture;
  std::string hw;
  std::string out;
  std::size_t max_columns = 100;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

struct SimArgs {
  std::string fixture;
  std::string hw;
  std::string table;
  std::string subgraphs;
  std::string trace;
  std::string out;
  bool no_cache = false;
  std::string mix = "uniform";
  std::size_t queries = 1000;
  std::string policy = "strict_accuracy";
  std::size_t window = 10;
  std::vector<std::size_t> window_sweep;
  std::string initial_cache;
  std::uint64_t seed = 0;
};

struct DseArgs {
  std::string fixture;
  std::string hw;
  std::string grid;
  std::string trace;
  std::string out;
  std::vector<double> pb_grid;
  std::vector<double> bw_grid;
  std::vector<double> flops_grid;
  std::string mix = "uniform";
  std::size_t queries = 500;
  std::string policy = "strict_accuracy";
  std::size_t window = 10;
  std::size_t max_columns = 100;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

struct ReportArgs {
  std::string fixture;
  std::string hw;
  std::string records;
  std::string subnet;
  std::string out;
};

// gen -----------------------------------------------------------------------

int RunGen(const GenArgs& args) {
  const sgs::FixtureBundle fx = sgs::LoadFixture(args.fixture);
  const std::vector<sgs::SubNetDescriptor> subnets =
      sgs::EnumerateSubnets(fx.spec, fx.picks);
  const fs::path out_dir = ResolveOutDir(args.out);
  const fs::path out_file = out_dir / "subnets.json";
  sgs::SaveSubnets(out_file, subnets);
  std::cout << "fixture '" << fx.spec.name << "': " << subnets.size()
            << " subnets over " << fx.spec.LayerCount() << " layers\n";
  for (const auto& sn : subnets) {
    std::cout << "  " << sn.id << "  accuracy " << sn.accuracy << "  "
              << sn.weight_bytes << " bytes\n";
  }
  std::cout << "wrote " << out_file.string() << "\n";
  return 0;
}

// table ---------------------------------------------------------------------

int RunTable(const TableArgs& args) {
  const sgs::FixtureBundle fx = sgs::LoadFixture(args.fixture);
  const sgs::HwConfig hw = sgs::LoadHwConfig(args.hw);
  const std::vector<sgs::SubNetDescriptor> subnets =
      sgs::EnumerateSubnets(fx.spec, fx.picks);
  const std::vector<sgs::SubGraphDescriptor> candidates =
      sgs::BuildCandidateSet(fx.spec, hw, subnets, args.max_columns,
                             SubSeed(args.seed, 1), args.alpha);
  const sgs::LatencyTable table =
      sgs::BuildLatencyTable(fx.spec, hw, subnets, candidates);

  const fs::path out_dir = ResolveOutDir(args.out);
  sgs::SaveTable(out_dir / "table.txt", table);
  sgs::ExportTableCsv(out_dir / "table.csv", table);
  sgs::SaveSubgraphs(out_dir / "subgraphs.json", candidates);

  std::uint64_t min_bytes = candidates.front().weight_bytes;
  std::uint64_t max_bytes = min_bytes;
  for (const auto& g : candidates) {
    min_bytes = std::min(min_bytes, g.weight_bytes);
    max_bytes = std::max(max_bytes, g.weight_bytes);
  }
  std::cout << "candidate set: " << candidates.size() << " subgraphs, "
            << min_bytes << ".." << max_bytes << " bytes (PB " << hw.pb_bytes
            << ")\n";
  std::cout << "table: " << table.Rows() << "x" << table.Cols()
            << ", fingerprint " << table.Fingerprint() << "\n";
  std::cout << "wrote " << (out_dir / "table.txt").string() << ", "
            << (out_dir / "table.csv").string() << ", "
            << (out_dir / "subgraphs.json").string() << "\n";
  return 0;
}

// sim -----------------------------------------------------------------------

json SchedMetaJson(const sgs::SchedulerConfig& sched, const SimArgs& args,
                   std::uint64_t fingerprint) {
  json run;
  run["policy"] = sgs::PolicyName(sched.policy);
  run["window"] = sched.window;
  run["scheduler_seed"] = sched.seed;
  run["initial_cache"] = sched.initial_cache;
  run["table_fingerprint"] = fingerprint;
  run["fixture"] = args.fixture;
  run["hw"] = args.hw;
  run["seed"] = args.seed;
  return run;
}

int RunSim(const SimArgs& args) {
  const sgs::FixtureBundle fx = sgs::LoadFixture(args.fixture);
  const sgs::HwConfig hw = sgs::LoadHwConfig(args.hw);
  const std::vector<sgs::SubNetDescriptor> subnets =
      sgs::EnumerateSubnets(fx.spec, fx.picks);

  std::vector<sgs::SubGraphDescriptor> subgraphs;
  sgs::LatencyTable table;
  if (args.no_cache) {
    subgraphs.push_back(sgs::EmptySubGraph(fx.spec));
    table = sgs::BuildLatencyTable(fx.spec, hw, subnets, subgraphs);
  } else {
    if (args.table.empty()) {
      throw sgs::ConfigError("sim: pass --table FILE or --no-cache");
    }
    table = sgs::LoadTable(args.table);
    sgs::CheckFresh(table, hw, fx.spec);
    fs::path sub_path = args.subgraphs.empty()
                            ? fs::path(args.table).parent_path() /
                                  "subgraphs.json"
                            : fs::path(args.subgraphs);
    subgraphs = sgs::LoadSubgraphs(sub_path);
  }

  const fs::path out_dir = ResolveOutDir(args.out);
  sgs::Trace trace;
  if (!args.trace.empty()) {
    trace = sgs::LoadTraceCsv(args.trace);
  } else {
    sgs::TraceConfig tc;
    tc.mix = args.mix;
    tc.count = args.queries;
    tc.seed = SubSeed(args.seed, 2);
    trace = sgs::GenerateTrace(subnets, table, tc);
    sgs::SaveTraceCsv(out_dir / "trace.csv", trace);
    json meta;
    meta["mix"] = tc.mix;
    meta["count"] = tc.count;
    meta["seed"] = tc.seed;
    meta["accuracy_margin"] = tc.accuracy_margin;
    meta["latency_low"] = tc.latency_low;
    meta["latency_high"] = tc.latency_high;
    DumpJson(out_dir / "trace.meta.json", meta);
  }

  sgs::SchedulerConfig sched;
  sched.policy = sgs::ParsePolicy(args.policy);
  sched.seed = SubSeed(args.seed, 3);
  sched.initial_cache = args.no_cache ? "none" : args.initial_cache;

  if (!args.window_sweep.empty()) {
    for (const std::size_t q : args.window_sweep) {
      sched.window = q;
      const auto records = sgs::Replay(fx.spec, hw, subnets, subgraphs, table,
                                       trace, sched);
      const sgs::Summary summary = sgs::Aggregate(records);
      const fs::path path =
          out_dir / ("summary_q" + std::to_string(q) + ".json");
      sgs::SaveSummaryJson(
          path, summary,
          SchedMetaJson(sched, args, table.Fingerprint()).dump());
      std::cout << "Q=" << q << ": mean latency "
                << FormatDouble(summary.mean_latency_s) << " s, violations "
                << summary.violation_rate << ", hit ratio "
                << summary.mean_hit_ratio << " -> " << path.string() << "\n";
    }
    return 0;
  }

  sched.window = args.no_cache ? 0 : args.window;
  const auto records =
      sgs::Replay(fx.spec, hw, subnets, subgraphs, table, trace, sched);
  const sgs::Summary summary = sgs::Aggregate(records);
  sgs::SaveRecordsCsv(out_dir / "records.csv", records);
  const json run = SchedMetaJson(sched, args, table.Fingerprint());
  DumpJson(out_dir / "records.meta.json", run);
  sgs::SaveSummaryJson(out_dir / "summary.json", summary, run.dump());
  std::cout << records.size() << " queries: mean latency "
            << FormatDouble(summary.mean_latency_s) << " s, p99 "
            << FormatDouble(summary.p99_latency_s) << " s, violations "
            << summary.violation_rate << ", mean hit ratio "
            << summary.mean_hit_ratio << "\n";
  std::cout << "wrote " << (out_dir / "records.csv").string() << ", "
            << (out_dir / "summary.json").string() << "\n";
  return 0;
}

// dse -----------------------------------------------------------------------

int RunDse(const DseArgs& args) {
  const sgs::FixtureBundle fx = sgs::LoadFixture(args.fixture);
  const sgs::HwConfig hw = sgs::LoadHwConfig(args.hw);
  const std::vector<sgs::SubNetDescriptor> subnets =
      sgs::EnumerateSubnets(fx.spec, fx.picks);

  sgs::DseConfig config;
  // Grid file first, inline flags override.
  if (!args.grid.empty()) {
    std::ifstream in(args.grid);
    if (!in) throw sgs::FormatError("cannot open '" + args.grid + "'");
    json grid;
    try {
      grid = json::parse(in);
    } catch (const json::parse_error& e) {
      throw sgs::FormatError(args.grid + ": " + e.what());
    }
    if (grid.contains("pb_bytes")) {
      config.pb_grid = grid["pb_bytes"].get<std::vector<std::uint64_t>>();
    }
    if (grid.contains("bandwidth_bytes_per_s")) {
      config.bandwidth_grid =
          grid["bandwidth_bytes_per_s"].get<std::vector<double>>();
    }
    if (grid.contains("flops_per_s")) {
      config.flops_grid = grid["flops_per_s"].get<std::vector<double>>();
    }
  }
  if (!args.pb_grid.empty()) {
    config.pb_grid.clear();
    for (const double v : args.pb_grid) {
      config.pb_grid.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (!args.bw_grid.empty()) config.bandwidth_grid = args.bw_grid;
  if (!args.flops_grid.empty()) config.flops_grid = args.flops_grid;
  // Unswept dimensions fall back to the base hardware point.
  if (config.pb_grid.empty()) config.pb_grid = {hw.pb_bytes};
  if (config.bandwidth_grid.empty()) {
    config.bandwidth_grid = {hw.bandwidth_bytes_per_s};
  }
  if (config.flops_grid.empty()) config.flops_grid = {hw.peak_flops_per_s};

  config.sched.policy = sgs::ParsePolicy(args.policy);
  config.sched.window = args.window;
  config.sched.seed = SubSeed(args.seed, 3);
  config.max_columns = args.max_columns;
  config.min_fill_frac = args.alpha;
  config.candidate_seed = SubSeed(args.seed, 1);

  const fs::path out_dir = ResolveOutDir(args.out);
  sgs::Trace trace;
  if (!args.trace.empty()) {
    trace = sgs::LoadTraceCsv(args.trace);
  } else {
    // Target bounds come from the base hardware's no-cache table so every
    // grid point replays the identical trace.
    const std::vector<sgs::SubGraphDescriptor> none{
        sgs::EmptySubGraph(fx.spec)};
    const sgs::LatencyTable base_table =
        sgs::BuildLatencyTable(fx.spec, hw, subnets, none);
    sgs::TraceConfig tc;
    tc.mix = args.mix;
    tc.count = args.queries;
    tc.seed = SubSeed(args.seed, 2);
    trace = sgs::GenerateTrace(subnets, base_table, tc);
    sgs::SaveTraceCsv(out_dir / "trace.csv", trace);
  }

  const std::vector<sgs::DsePoint> points =
      sgs::RunDse(fx.spec, hw, subnets, trace, config);
  sgs::SaveDseCsv(out_dir / "dse.csv", points);
  std::cout << points.size() << " grid points -> "
            << (out_dir / "dse.csv").string() << "\n";
  for (const auto& p : points) {
    std::cout << "  pb " << p.pb_bytes << "  bw "
              << FormatDouble(p.bw_bytes_per_s) << "  flops "
              << FormatDouble(p.flops_per_s) << "  save "
              << FormatDouble(p.time_save_pct) << "%\n";
  }
  return 0;
}

// report --------------------------------------------------------------------

int RunReport(const ReportArgs& args) {
  const sgs::FixtureBundle fx = sgs::LoadFixture(args.fixture);
  const sgs::HwConfig hw = sgs::LoadHwConfig(args.hw);
  const std::vector<sgs::SubNetDescriptor> subnets =
      sgs::EnumerateSubnets(fx.spec, fx.picks);

  sgs::ShapeVector core = subnets.front().shape;
  for (std::size_t i = 1; i < subnets.size(); ++i) {
    core = sgs::Intersect(core, subnets[i].shape);
  }
  const sgs::ShapeVector none;

  // Per-layer roofline rows for one subnet, bare vs shared-core cached.
  const sgs::SubNetDescriptor* focus = &subnets.back();
  if (!args.subnet.empty()) {
    focus = nullptr;
    for (const auto& sn : subnets) {
      if (sn.id == args.subnet) focus = &sn;
    }
    if (focus == nullptr) {
      throw sgs::LookupError("unknown subnet id '" + args.subnet + "'");
    }
  }
  const sgs::QueryCost bare = sgs::CostQuery(fx.spec, hw, focus->shape, none);
  const sgs::QueryCost cached = sgs::CostQuery(fx.spec, hw, focus->shape, core);

  const fs::path out_dir = ResolveOutDir(args.out);
  {
    std::ofstream out(out_dir / "roofline.csv");
    if (!out) {
      throw sgs::FormatError("cannot open '" +
                             (out_dir / "roofline.csv").string() +
                             "' for write");
    }
    out << "layer,ai_no_cache,ai_cached,bound_no_cache,bound_cached,"
           "latency_no_cache_s,latency_cached_s\n";
    for (std::size_t i = 0; i < fx.spec.LayerCount(); ++i) {
      const auto bound_name = [](sgs::Bound b) {
        return b == sgs::Bound::kMemory ? "memory" : "compute";
      };
      out << fx.spec.layers[i].name << ','
          << FormatDouble(bare.layers[i].arithmetic_intensity) << ','
          << FormatDouble(cached.layers[i].arithmetic_intensity) << ','
          << bound_name(bare.layers[i].bound) << ','
          << bound_name(cached.layers[i].bound) << ','
          << FormatDouble(bare.layers[i].latency_s) << ','
          << FormatDouble(cached.layers[i].latency_s) << "\n";
    }
  }

  // Per-subnet caching effect.
  {
    std::ofstream out(out_dir / "subnet_summary.csv");
    out << "subnet_id,accuracy,weight_bytes,latency_none_s,latency_core_s,"
           "latency_reduction_pct,energy_none_j,energy_core_j,"
           "energy_save_pct,hit_ratio_core\n";
    for (const auto& sn : subnets) {
      const sgs::QueryCost c0 = sgs::CostQuery(fx.spec, hw, sn.shape, none);
      const sgs::QueryCost c1 = sgs::CostQuery(fx.spec, hw, sn.shape, core);
      out << sn.id << ',' << FormatDouble(sn.accuracy) << ','
          << sn.weight_bytes << ',' << FormatDouble(c0.latency_s) << ','
          << FormatDouble(c1.latency_s) << ','
          << FormatDouble(100.0 * (c0.latency_s - c1.latency_s) /
                          c0.latency_s)
          << ',' << FormatDouble(c0.energy_j) << ','
          << FormatDouble(c1.energy_j) << ','
          << FormatDouble(100.0 * (c0.energy_j - c1.energy_j) / c0.energy_j)
          << ',' << FormatDouble(sgs::HitRatio(sn.shape, core)) << "\n";
    }
  }

  // Per-query scatter rows, if a replay is available.
  if (!args.records.empty()) {
    const auto records = sgs::LoadRecordsCsv(args.records);
    std::ofstream out(out_dir / "scatter.csv");
    out << "query_index,accuracy_target,latency_target_s,served_accuracy,"
           "served_latency_s,violated\n";
    for (const auto& r : records) {
      out << r.query_index << ',' << FormatDouble(r.accuracy_target) << ','
          << FormatDouble(r.latency_target_s) << ','
          << FormatDouble(r.served_accuracy) << ','
          << FormatDouble(r.served_latency_s) << ',' << (r.violated ? 1 : 0)
          << "\n";
    }
  }

  std::cout << "wrote " << (out_dir / "roofline.csv").string() << " (subnet "
            << focus->id << ") and "
            << (out_dir / "subnet_summary.csv").string();
  if (!args.records.empty()) {
    std::cout << " and " << (out_dir / "scatter.csv").string();
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weight-shared supernet serving simulator"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand(
      "gen", "derive servable subnet descriptors from a fixture");
  gen->add_option("--fixture", gen_args.fixture, "supernet fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_args.out, "output directory");

  TableArgs table_args;
  CLI::App* table = app.add_subcommand(
      "table", "build the candidate set and latency table");
  table->add_option("--fixture", table_args.fixture, "supernet fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  table->add_option("--hw", table_args.hw, "hardware config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  table->add_option("--max-columns", table_args.max_columns,
                    "max candidate subgraphs");
  table->add_option("--alpha", table_args.alpha,
                    "min candidate size as a fraction of PB");
  table->add_option("--seed", table_args.seed, "master seed");
  table->add_option("--out", table_args.out, "output directory");

  SimArgs sim_args;
  CLI::App* sim =
      app.add_subcommand("sim", "replay a query trace through the scheduler");
  sim->add_option("--fixture", sim_args.fixture, "supernet fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--hw", sim_args.hw, "hardware config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--table", sim_args.table, "latency table file");
  sim->add_option("--subgraphs", sim_args.subgraphs,
                  "candidate descriptors JSON (default: next to --table)");
  sim->add_flag("--no-cache", sim_args.no_cache,
                "serve with no persistent buffer (baseline)");
  sim->add_option("--trace", sim_args.trace, "replay this trace.csv")
      ->check(CLI::ExistingFile);
  sim->add_option("--mix", sim_args.mix,
                  "generated-trace mix: uniform|accuracy_only|latency_only|"
                  "bursty");
  sim->add_option("--queries", sim_args.queries, "generated-trace length");
  sim->add_option("--policy", sim_args.policy,
                  "strict_accuracy | strict_latency");
  sim->add_option("--window", sim_args.window,
                  "queries per cache decision (0 = static cache)");
  sim->add_option("--window-sweep", sim_args.window_sweep,
                  "emit one summary per window value")
      ->delimiter(',');
  sim->add_option("--initial-cache", sim_args.initial_cache,
                  "initial subgraph id (default: seeded random)");
  sim->add_option("--seed", sim_args.seed, "master seed");
  sim->add_option("--out", sim_args.out, "output directory");

  DseArgs dse_args;
  CLI::App* dse = app.add_subcommand(
      "dse", "sweep hardware parameters and report latency savings");
  dse->add_option("--fixture", dse_args.fixture, "supernet fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  dse->add_option("--hw", dse_args.hw, "base hardware config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  dse->add_option("--grid", dse_args.grid, "grid JSON file")
      ->check(CLI::ExistingFile);
  dse->add_option("--pb-grid", dse_args.pb_grid, "PB sizes in bytes")
      ->delimiter(',');
  dse->add_option("--bw-grid", dse_args.bw_grid, "bandwidths in bytes/s")
      ->delimiter(',');
  dse->add_option("--flops-grid", dse_args.flops_grid, "throughputs in FLOP/s")
      ->delimiter(',');
  dse->add_option("--trace", dse_args.trace, "replay this trace.csv")
      ->check(CLI::ExistingFile);
  dse->add_option("--mix", dse_args.mix, "generated-trace mix");
  dse->add_option("--queries", dse_args.queries, "generated-trace length");
  dse->add_option("--policy", dse_args.policy,
                  "strict_accuracy | strict_latency");
  dse->add_option("--window", dse_args.window, "queries per cache decision");
  dse->add_option("--max-columns", dse_args.max_columns,
                  "max candidate subgraphs per grid point");
  dse->add_option("--alpha", dse_args.alpha,
                  "min candidate size as a fraction of PB");
  dse->add_option("--seed", dse_args.seed, "master seed");
  dse->add_option("--out", dse_args.out, "output directory");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand(
      "report", "emit plot-ready per-layer and per-query CSVs");
  report->add_option("--fixture", report_args.fixture, "supernet fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--hw", report_args.hw, "hardware config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--records", report_args.records,
                     "records.csv from a sim run (enables scatter.csv)")
      ->check(CLI::ExistingFile);
  report->add_option("--subnet", report_args.subnet,
                     "subnet id for the roofline rows (default: last)");
  report->add_option("--out", report_args.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return RunGen(gen_args);
    if (table->parsed()) return RunTable(table_args);
    if (sim->parsed()) return RunSim(sim_args);
    if (dse->parsed()) return RunDse(dse_args);
    if (report->parsed()) return RunReport(report_args);
  } catch (const sgs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
