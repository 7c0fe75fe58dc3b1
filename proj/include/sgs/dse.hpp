// Hardware design-space sweep.
//
// For every point on a (persistent-buffer size x bandwidth x peak-FLOPs)
// grid, replays the same trace twice -- once with the scheduler managing
// the buffer, once with no buffer at all -- and reports the mean-latency
// saving.  A zero-byte buffer point degenerates to the no-buffer run and
// reports exactly 0% saving.
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sgs/accel.hpp"
#include "sgs/sched.hpp"
#include "sgs/sim.hpp"
#include "sgs/supernet.hpp"

namespace sgs {

struct DseConfig {
  std::vector<std::uint64_t> pb_grid;
  std::vector<double> bandwidth_grid;
  std::vector<double> flops_grid;
  SchedulerConfig sched;
  std::size_t max_columns = 100;
  std::uint64_t candidate_seed = 0;
  double min_fill_frac = 0.5;
};

struct DsePoint {
  std::uint64_t pb_bytes = 0;
  double bw_bytes_per_s = 0.0;
  double flops_per_s = 0.0;
  double mean_latency_pb = 0.0;
  double mean_latency_nopb = 0.0;
  double time_save_pct = 0.0;
};

// Sweeps the full cross product of the three grids.  `base_hw` supplies
// the parameters a grid leaves untouched (and the energy coefficient).
// Grids must be non-empty and their values positive (pb may be 0).
std::vector<DsePoint> RunDse(const SuperNetSpec& spec, const HwConfig& base_hw,
                             const std::vector<SubNetDescriptor>& subnets,
                             const Trace& trace, const DseConfig& config);

// dse.csv: "pb_bytes,bw_bytes_per_s,flops_per_s,mean_latency_pb,
// mean_latency_nopb,time_save_pct".
void SaveDseCsv(const std::filesystem::path& path,
                const std::vector<DsePoint>& points);

}  // namespace sgs
