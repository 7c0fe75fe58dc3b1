#include "sgs/dse.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sgs/errors.hpp"
#include "sgs/io.hpp"
#include "sgs/sim.hpp"
#include "sgs/table.hpp"
#include "test_util.hpp"

using namespace sgs;
using namespace sgs::test;

namespace {

namespace fs = std::filesystem;

struct Sweep {
  FixtureBundle bundle;
  HwConfig hw;
  std::vector<SubNetDescriptor> subnets;
  Trace trace;
};

Sweep MakeSweep() {
  Sweep s{LoadBundle("mobv3ws.json"), LoadHw("hw_edge_small.json"), {}, {}};
  s.subnets = EnumerateSubnets(s.bundle.spec, s.bundle.picks);
  // trace targets derive from a no-cache table so every grid point can
  // replay the identical query stream
  std::vector<SubGraphDescriptor> none = {EmptySubGraph(s.bundle.spec)};
  LatencyTable base = BuildLatencyTable(s.bundle.spec, s.hw, s.subnets, none);
  TraceConfig tcfg;
  tcfg.count = 150;
  tcfg.seed = 41;
  s.trace = GenerateTrace(s.subnets, base, tcfg);
  return s;
}

}  // namespace

TEST_CASE("the sweep walks the full grid cross product") {
  Sweep s = MakeSweep();
  DseConfig cfg;
  cfg.pb_grid = {0, 1500000, 3000000};
  cfg.bandwidth_grid = {9.6e9, 19.2e9};
  cfg.flops_grid = {1.296e12};
  cfg.max_columns = 16;
  cfg.candidate_seed = 5;
  cfg.sched.window = 10;
  cfg.sched.seed = 6;
  std::vector<DsePoint> points =
      RunDse(s.bundle.spec, s.hw, s.subnets, s.trace, cfg);
  REQUIRE(points.size() == 6);

  for (const DsePoint& p : points) {
    if (p.pb_bytes == 0) {
      // no buffer degenerates to the baseline: exactly zero saving
      CHECK(p.mean_latency_pb == p.mean_latency_nopb);
      CHECK(p.time_save_pct == 0.0);
    } else {
      CHECK(p.mean_latency_pb <= p.mean_latency_nopb);
      CHECK(p.time_save_pct >= 0.0);
    }
    CHECK(p.mean_latency_nopb > 0.0);
  }

  // the baseline depends on bandwidth alone here, not on the buffer
  for (const DsePoint& a : points) {
    for (const DsePoint& b : points) {
      if (a.bw_bytes_per_s == b.bw_bytes_per_s &&
          a.flops_per_s == b.flops_per_s) {
        CHECK(a.mean_latency_nopb == b.mean_latency_nopb);
      }
    }
  }

  // a working buffer must show real savings on this overlap-heavy family
  bool some_saving = false;
  for (const DsePoint& p : points) {
    if (p.pb_bytes == 3000000 && p.time_save_pct > 5.0) some_saving = true;
  }
  CHECK(some_saving);
}

TEST_CASE("sweep output lands in the csv schema") {
  Sweep s = MakeSweep();
  DseConfig cfg;
  cfg.pb_grid = {0, 3000000};
  cfg.bandwidth_grid = {19.2e9};
  cfg.flops_grid = {1.296e12};
  cfg.max_columns = 8;
  std::vector<DsePoint> points =
      RunDse(s.bundle.spec, s.hw, s.subnets, s.trace, cfg);
  fs::path p = fs::temp_directory_path() / "sgsim_test_dse.csv";
  SaveDseCsv(p, points);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "pb_bytes,bw_bytes_per_s,flops_per_s,mean_latency_pb,"
        "mean_latency_nopb,time_save_pct");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == points.size());
  fs::remove(p);
}

TEST_CASE("the sweep validates its grids") {
  Sweep s = MakeSweep();
  DseConfig cfg;
  cfg.pb_grid = {};
  cfg.bandwidth_grid = {19.2e9};
  cfg.flops_grid = {1.296e12};
  CHECK_THROWS_AS(RunDse(s.bundle.spec, s.hw, s.subnets, s.trace, cfg),
                  ConfigError);
  cfg.pb_grid = {1000000};
  cfg.bandwidth_grid = {-1.0};
  CHECK_THROWS_AS(RunDse(s.bundle.spec, s.hw, s.subnets, s.trace, cfg),
                  ConfigError);
}
