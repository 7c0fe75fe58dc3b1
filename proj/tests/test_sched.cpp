#include "sgs/sched.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "sgs/errors.hpp"
#include "sgs/table.hpp"
#include "test_util.hpp"

using namespace sgs;
using namespace sgs::test;

namespace {

// Straight-line re-statement of the selection contract, kept independent
// of the library implementation.
SubnetChoice OracleSelect(const std::vector<double>& lat,
                          const std::vector<double>& acc, Policy policy,
                          const QueryRequest& q) {
  const std::size_t n = lat.size();
  std::size_t best = n;
  if (policy == Policy::kStrictAccuracy) {
    for (std::size_t i = 0; i < n; ++i) {
      if (acc[i] < q.accuracy_target) continue;
      if (best == n || lat[i] < lat[best]) best = i;
    }
    if (best != n) return {best, false};
    for (std::size_t i = 0; i < n; ++i) {
      if (best == n || acc[i] > acc[best]) best = i;
    }
    return {best, true};
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (lat[i] > q.latency_target_s) continue;
    if (best == n || acc[i] > acc[best]) best = i;
  }
  if (best != n) return {best, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (best == n || lat[i] < lat[best]) best = i;
  }
  return {best, true};
}

std::size_t OracleCache(const EncodedVector& avg,
                        const std::vector<EncodedVector>& cands) {
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < avg.size(); ++j) {
      double diff = cands[i][j] - avg[j];
      d += diff * diff;
    }
    if (best_d < 0.0 || d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("policy names parse both ways") {
  CHECK(ParsePolicy("strict_accuracy") == Policy::kStrictAccuracy);
  CHECK(ParsePolicy("strict_latency") == Policy::kStrictLatency);
  CHECK(PolicyName(Policy::kStrictAccuracy) == "strict_accuracy");
  CHECK(PolicyName(Policy::kStrictLatency) == "strict_latency");
  CHECK_THROWS_AS(ParsePolicy("strictest"), ConfigError);
}

TEST_CASE("accuracy-first selection on a three-subnet menu") {
  std::vector<double> lat = {0.005, 0.007, 0.009};
  std::vector<double> acc = {0.70, 0.75, 0.80};
  QueryRequest q{0.72, 0.0};
  SubnetChoice got = SelectSubnet(lat, acc, Policy::kStrictAccuracy, q);
  CHECK(got.index == 1);  // fastest among the accurate enough
  CHECK_FALSE(got.violated);
  q.accuracy_target = 0.85;  // unattainable: fall back to most accurate
  got = SelectSubnet(lat, acc, Policy::kStrictAccuracy, q);
  CHECK(got.index == 2);
  CHECK(got.violated);
}

TEST_CASE("latency-first selection on a three-subnet menu") {
  std::vector<double> lat = {0.005, 0.007, 0.009};
  std::vector<double> acc = {0.70, 0.75, 0.80};
  QueryRequest q{0.0, 0.008};
  SubnetChoice got = SelectSubnet(lat, acc, Policy::kStrictLatency, q);
  CHECK(got.index == 1);  // most accurate among the fast enough
  CHECK_FALSE(got.violated);
  q.latency_target_s = 0.004;  // unattainable: fall back to fastest
  got = SelectSubnet(lat, acc, Policy::kStrictLatency, q);
  CHECK(got.index == 0);
  CHECK(got.violated);
}

TEST_CASE("selection matches the exhaustive oracle on tie-rich instances") {
  std::mt19937_64 rng(31);
  const double lat_menu[] = {0.001, 0.002, 0.003, 0.004};
  const double acc_menu[] = {0.70, 0.75, 0.80, 0.85};
  for (int i = 0; i < 10000; ++i) {
    std::size_t n = 1 + rng() % 8;
    std::vector<double> lat(n), acc(n);
    for (std::size_t j = 0; j < n; ++j) {
      lat[j] = lat_menu[rng() % 4];
      acc[j] = acc_menu[rng() % 4];
    }
    QueryRequest q;
    q.accuracy_target =
        acc_menu[rng() % 4] + (static_cast<int>(rng() % 3) - 1) * 0.01;
    q.latency_target_s =
        lat_menu[rng() % 4] + (static_cast<int>(rng() % 3) - 1) * 0.0005;
    Policy policy =
        rng() % 2 == 0 ? Policy::kStrictAccuracy : Policy::kStrictLatency;
    SubnetChoice want = OracleSelect(lat, acc, policy, q);
    SubnetChoice got = SelectSubnet(lat, acc, policy, q);
    REQUIRE(got.index == want.index);
    REQUIRE(got.violated == want.violated);
  }
}

TEST_CASE("selection rejects empty and mismatched menus") {
  QueryRequest q{0.5, 0.5};
  CHECK_THROWS_AS(SelectSubnet({}, {}, Policy::kStrictAccuracy, q),
                  ConfigError);
  CHECK_THROWS_AS(SelectSubnet({0.1}, {0.5, 0.6}, Policy::kStrictAccuracy, q),
                  ConfigError);
}

TEST_CASE("cache selection matches the brute-force argmin with ties") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 10000; ++i) {
    std::size_t dim = 2 * (1 + rng() % 4);
    std::size_t n = 1 + rng() % 12;
    EncodedVector avg(dim);
    for (double& v : avg) v = static_cast<double>(rng() % 8);
    std::vector<EncodedVector> cands(n, EncodedVector(dim));
    for (EncodedVector& cand : cands) {
      for (double& v : cand) v = static_cast<double>(rng() % 8);
    }
    if (n > 2 && rng() % 2 == 0) cands[n - 1] = cands[n / 2];  // force ties
    CHECK(SelectCache(avg, cands) == OracleCache(avg, cands));
  }
}

TEST_CASE("cache selection error paths") {
  CHECK_THROWS_AS(SelectCache({1.0, 2.0}, {}), ConfigError);
  CHECK_THROWS_AS(SelectCache({1.0, 2.0}, {{1.0, 2.0}, {1.0}}),
                  StructuralError);
}

namespace {

struct Rig {
  SuperNetSpec spec;
  HwConfig hw;
  std::vector<SubNetDescriptor> subnets;
  std::vector<SubGraphDescriptor> subgraphs;
  LatencyTable table;
};

Rig MakeRig() {
  Rig rig;
  rig.spec = TinySpec();
  rig.hw = TinyHw();
  ShapeVector maximal = MaximalShape(rig.spec);
  ShapeVector mid = maximal;
  ShapeVector small = maximal;
  for (std::size_t i = 0; i < maximal.size(); ++i) {
    mid[i].kernels = (3 * maximal[i].kernels + 3) / 4;
    small[i].kernels = (maximal[i].kernels + 1) / 2;
    small[i].channels = (maximal[i].channels + 1) / 2;
  }
  rig.subnets = {
      {"s0", small, 0.70, WeightBytes(rig.spec, small)},
      {"s1", mid, 0.75, WeightBytes(rig.spec, mid)},
      {"s2", maximal, 0.80, WeightBytes(rig.spec, maximal)},
  };
  rig.subgraphs = {
      EmptySubGraph(rig.spec),
      MakeSubGraph(rig.spec, "g-small", small),
      MakeSubGraph(rig.spec, "g-mid", mid),
      MakeSubGraph(rig.spec, "g-max", maximal),
  };
  rig.table = BuildLatencyTable(rig.spec, rig.hw, rig.subnets, rig.subgraphs);
  return rig;
}

}  // namespace

TEST_CASE("the initial cache fill lands on the first query") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 0;
  cfg.initial_cache = "g-mid";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  CHECK(sched.CachedSubgraphId() == "g-mid");
  QueryRequest q{0.0, 1.0};  // trivially satisfiable
  StepResult first = sched.Step(q);
  CHECK(first.cache_fill_bytes == rig.subgraphs[2].weight_bytes);
  CHECK(first.subgraph_id == "g-mid");
  StepResult second = sched.Step(q);
  CHECK(second.cache_fill_bytes == 0);
  CHECK_FALSE(second.cache_updated);
  CHECK(second.new_subgraph_id.empty());
}

TEST_CASE("window zero pins the initial cache forever") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 0;
  cfg.initial_cache = "g-small";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  QueryRequest q{0.8, 1.0};
  for (int i = 0; i < 25; ++i) {
    StepResult r = sched.Step(q);
    CHECK(r.subgraph_id == "g-small");
    CHECK_FALSE(r.cache_updated);
  }
}

TEST_CASE("the cache retargets on the window boundary") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 4;
  cfg.initial_cache = "g-small";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  QueryRequest demanding{0.80, 1.0};  // always serves s2 (maximal)
  for (int i = 0; i < 3; ++i) {
    StepResult r = sched.Step(demanding);
    CHECK_FALSE(r.cache_updated);
  }
  StepResult fourth = sched.Step(demanding);
  CHECK(fourth.cache_updated);
  // four straight maximal queries pull the average onto s2's encoding
  CHECK(fourth.new_subgraph_id == "g-max");
  CHECK(sched.CachedSubgraphId() == "g-max");
  // the swap bill is the non-resident bytes, charged to the next query
  StepResult fifth = sched.Step(demanding);
  std::uint64_t expected_fill =
      rig.subgraphs[3].weight_bytes -
      OverlapBytes(rig.spec, rig.subgraphs[3].shape, rig.subgraphs[1].shape);
  CHECK(fifth.cache_fill_bytes == expected_fill);
  CHECK(fifth.subgraph_id == "g-max");
}

TEST_CASE("the running average tracks the last window of encodings") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 2;
  cfg.initial_cache = "g-small";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  EncodedVector zeros(2 * rig.spec.layers.size(), 0.0);
  CHECK(sched.AverageEncoding() == zeros);
  sched.Step({0.70, 1.0});  // serves s0 under accuracy-first
  sched.Step({0.80, 1.0});  // serves s2
  EncodedVector avg = sched.AverageEncoding();
  EncodedVector e0 = Encode(rig.spec, rig.subnets[0].shape);
  EncodedVector e2 = Encode(rig.spec, rig.subnets[2].shape);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(avg[i] == doctest::Approx((e0[i] + e2[i]) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("subnet choice reads the column of the resident subgraph") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 0;
  cfg.initial_cache = "g-max";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  StepResult r = sched.Step({0.75, 1.0});
  CHECK(r.subnet_id == "s1");
  CHECK(r.table_latency_s == rig.table.Lookup("s1", "g-max"));
}

TEST_CASE("violated queries are flagged and served the fallback") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 0;
  cfg.initial_cache = "none";
  Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
  StepResult r = sched.Step({0.99, 1.0});
  CHECK(r.violated);
  CHECK(r.subnet_id == "s2");  // most accurate available
}

TEST_CASE("a seeded scheduler replays identically") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.window = 3;
  cfg.seed = 77;  // empty initial_cache: seeded random pick
  std::vector<QueryRequest> queries;
  std::mt19937_64 rng(33);
  for (int i = 0; i < 60; ++i) {
    queries.push_back({0.70 + 0.01 * (rng() % 11), 1.0});
  }
  auto run = [&]() {
    Scheduler sched(rig.spec, rig.subnets, rig.subgraphs, rig.table, cfg);
    std::vector<StepResult> results;
    for (const QueryRequest& q : queries) results.push_back(sched.Step(q));
    return results;
  };
  std::vector<StepResult> a = run();
  std::vector<StepResult> b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].subnet_id == b[i].subnet_id);
    CHECK(a[i].subgraph_id == b[i].subgraph_id);
    CHECK(a[i].cache_fill_bytes == b[i].cache_fill_bytes);
    CHECK(a[i].table_latency_s == b[i].table_latency_s);
  }
}

TEST_CASE("scheduler construction validates table agreement") {
  Rig rig = MakeRig();
  SchedulerConfig cfg;
  cfg.initial_cache = "none";
  std::vector<SubNetDescriptor> reordered = {rig.subnets[1], rig.subnets[0],
                                             rig.subnets[2]};
  CHECK_THROWS_AS(
      Scheduler(rig.spec, reordered, rig.subgraphs, rig.table, cfg),
      ConfigError);
  SchedulerConfig bad_cache = cfg;
  bad_cache.initial_cache = "g-imaginary";
  CHECK_THROWS_AS(
      Scheduler(rig.spec, rig.subnets, rig.subgraphs, rig.table, bad_cache),
      LookupError);
}
