#include "sgs/dse.hpp"

#include <cstdio>
#include <fstream>

#include "sgs/errors.hpp"
#include "sgs/table.hpp"

namespace sgs {

namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double MeanLatencyNoPb(const SuperNetSpec& spec, const HwConfig& hw,
                       const std::vector<SubNetDescriptor>& subnets,
                       const Trace& trace, const SchedulerConfig& sched) {
  const std::vector<SubGraphDescriptor> none{EmptySubGraph(spec)};
  const LatencyTable table = BuildLatencyTable(spec, hw, subnets, none);
  SchedulerConfig fixed = sched;
  fixed.window = 0;  // nothing to manage without a buffer
  fixed.initial_cache = "none";
  return Aggregate(Replay(spec, hw, subnets, none, table, trace, fixed))
      .mean_latency_s;
}

double MeanLatencyWithPb(const SuperNetSpec& spec, const HwConfig& hw,
                         const std::vector<SubNetDescriptor>& subnets,
                         const Trace& trace, const DseConfig& config) {
  const std::vector<SubGraphDescriptor> candidates =
      BuildCandidateSet(spec, hw, subnets, config.max_columns,
                        config.candidate_seed, config.min_fill_frac);
  const LatencyTable table = BuildLatencyTable(spec, hw, subnets, candidates);
  return Aggregate(
             Replay(spec, hw, subnets, candidates, table, trace, config.sched))
      .mean_latency_s;
}

}  // namespace

std::vector<DsePoint> RunDse(const SuperNetSpec& spec, const HwConfig& base_hw,
                             const std::vector<SubNetDescriptor>& subnets,
                             const Trace& trace, const DseConfig& config) {
  if (config.pb_grid.empty() || config.bandwidth_grid.empty() ||
      config.flops_grid.empty()) {
    throw ConfigError("dse: all three grids must be non-empty");
  }

  std::vector<DsePoint> points;
  points.reserve(config.pb_grid.size() * config.bandwidth_grid.size() *
                 config.flops_grid.size());
  for (const std::uint64_t pb : config.pb_grid) {
    for (const double bw : config.bandwidth_grid) {
      for (const double flops : config.flops_grid) {
        HwConfig hw = base_hw;
        hw.pb_bytes = pb;
        hw.bandwidth_bytes_per_s = bw;
        hw.peak_flops_per_s = flops;
        ValidateHwConfig(hw);

        DsePoint point;
        point.pb_bytes = pb;
        point.bw_bytes_per_s = bw;
        point.flops_per_s = flops;
        point.mean_latency_nopb =
            MeanLatencyNoPb(spec, hw, subnets, trace, config.sched);
        point.mean_latency_pb =
            pb == 0 ? point.mean_latency_nopb
                    : MeanLatencyWithPb(spec, hw, subnets, trace, config);
        point.time_save_pct =
            100.0 * (point.mean_latency_nopb - point.mean_latency_pb) /
            point.mean_latency_nopb;
        points.push_back(point);
      }
    }
  }
  return points;
}

void SaveDseCsv(const std::filesystem::path& path,
                const std::vector<DsePoint>& points) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for write");
  out << "pb_bytes,bw_bytes_per_s,flops_per_s,mean_latency_pb,"
         "mean_latency_nopb,time_save_pct\n";
  for (const DsePoint& p : points) {
    out << p.pb_bytes << ',' << FormatDouble(p.bw_bytes_per_s) << ','
        << FormatDouble(p.flops_per_s) << ','
        << FormatDouble(p.mean_latency_pb) << ','
        << FormatDouble(p.mean_latency_nopb) << ','
        << FormatDouble(p.time_save_pct) << "\n";
  }
}

}  // namespace sgs
