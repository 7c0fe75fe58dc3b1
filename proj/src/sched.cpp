#include "sgs/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sgs/errors.hpp"

namespace sgs {

Policy ParsePolicy(const std::string& name) {
  if (name == "strict_accuracy") return Policy::kStrictAccuracy;
  if (name == "strict_latency") return Policy::kStrictLatency;
  throw ConfigError("unknown policy '" + name +
                    "' (expected strict_accuracy or strict_latency)");
}

std::string PolicyName(Policy policy) {
  return policy == Policy::kStrictAccuracy ? "strict_accuracy"
                                           : "strict_latency";
}

SubnetChoice SelectSubnet(const std::vector<double>& latency_s,
                          const std::vector<double>& accuracy, Policy policy,
                          const QueryRequest& query) {
  if (latency_s.empty()) throw ConfigError("select subnet: no subnets");
  if (latency_s.size() != accuracy.size()) {
    throw ConfigError("select subnet: " + std::to_string(latency_s.size()) +
                      " latencies vs " + std::to_string(accuracy.size()) +
                      " accuracies");
  }

  const std::size_t n = latency_s.size();
  SubnetChoice choice;
  bool found = false;
  if (policy == Policy::kStrictAccuracy) {
    // Fastest subnet meeting the accuracy floor; failing that, the most
    // accurate subnet overall.
    for (std::size_t i = 0; i < n; ++i) {
      if (accuracy[i] < query.accuracy_target) continue;
      if (!found || latency_s[i] < latency_s[choice.index]) {
        choice.index = i;
        found = true;
      }
    }
    if (!found) {
      choice.violated = true;
      for (std::size_t i = 1; i < n; ++i) {
        if (accuracy[i] > accuracy[choice.index]) choice.index = i;
      }
    }
  } else {
    // Most accurate subnet under the latency ceiling; failing that, the
    // fastest subnet overall.
    for (std::size_t i = 0; i < n; ++i) {
      if (latency_s[i] > query.latency_target_s) continue;
      if (!found || accuracy[i] > accuracy[choice.index]) {
        choice.index = i;
        found = true;
      }
    }
    if (!found) {
      choice.violated = true;
      for (std::size_t i = 1; i < n; ++i) {
        if (latency_s[i] < latency_s[choice.index]) choice.index = i;
      }
    }
  }
  return choice;
}

std::size_t SelectCache(const EncodedVector& average,
                        const std::vector<EncodedVector>& candidates) {
  if (candidates.empty()) throw ConfigError("select cache: no candidates");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].size() != average.size()) {
      throw StructuralError("select cache: candidate " + std::to_string(i) +
                            " has dimension " +
                            std::to_string(candidates[i].size()) +
                            ", average has " +
                            std::to_string(average.size()));
    }
    double d2 = 0.0;
    for (std::size_t j = 0; j < average.size(); ++j) {
      const double diff = candidates[i][j] - average[j];
      d2 += diff * diff;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Scheduler::Scheduler(const SuperNetSpec& spec,
                     std::vector<SubNetDescriptor> subnets,
                     std::vector<SubGraphDescriptor> subgraphs,
                     const LatencyTable& table, SchedulerConfig config)
    : spec_(spec),
      subnets_(std::move(subnets)),
      subgraphs_(std::move(subgraphs)),
      table_(table),
      config_(std::move(config)) {
  if (subnets_.empty()) throw ConfigError("scheduler: no subnets");
  if (subgraphs_.empty()) throw ConfigError("scheduler: no subgraphs");
  if (table_.Rows() != subnets_.size() || table_.Cols() != subgraphs_.size()) {
    throw ConfigError("scheduler: table is " + std::to_string(table_.Rows()) +
                      "x" + std::to_string(table_.Cols()) + ", descriptors " +
                      std::to_string(subnets_.size()) + "x" +
                      std::to_string(subgraphs_.size()));
  }
  for (std::size_t i = 0; i < subnets_.size(); ++i) {
    if (table_.SubnetIds()[i] != subnets_[i].id) {
      throw ConfigError("scheduler: table row " + std::to_string(i) + " is '" +
                        table_.SubnetIds()[i] + "', descriptor is '" +
                        subnets_[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < subgraphs_.size(); ++i) {
    if (table_.SubgraphIds()[i] != subgraphs_[i].id) {
      throw ConfigError("scheduler: table col " + std::to_string(i) + " is '" +
                        table_.SubgraphIds()[i] + "', descriptor is '" +
                        subgraphs_[i].id + "'");
    }
  }

  accuracy_.reserve(subnets_.size());
  subnet_encoding_.reserve(subnets_.size());
  for (const auto& sn : subnets_) {
    accuracy_.push_back(sn.accuracy);
    subnet_encoding_.push_back(Encode(spec_, sn.shape));
  }
  subgraph_encoding_.reserve(subgraphs_.size());
  for (const auto& g : subgraphs_) {
    subgraph_encoding_.push_back(Encode(spec_, g.shape));
  }

  if (!config_.initial_cache.empty()) {
    cache_index_ = table_.SubgraphIndex(config_.initial_cache);
  } else {
    std::mt19937_64 rng(config_.seed);
    cache_index_ = static_cast<std::size_t>(rng() % subgraphs_.size());
  }
  // Cold start: the initial resident set has to be fetched too.
  pending_fill_bytes_ = subgraphs_[cache_index_].weight_bytes;
}

const std::string& Scheduler::CachedSubgraphId() const {
  return subgraphs_[cache_index_].id;
}

EncodedVector Scheduler::AverageEncoding() const {
  EncodedVector avg(spec_.LayerCount() * 2, 0.0);
  if (history_.empty()) return avg;
  for (std::size_t idx : history_) {
    const EncodedVector& enc = subnet_encoding_[idx];
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += enc[j];
  }
  const double inv = 1.0 / static_cast<double>(history_.size());
  for (double& v : avg) v *= inv;
  return avg;
}

void Scheduler::RetargetCache(std::size_t next_cache) {
  if (next_cache == cache_index_) return;
  // Only the bytes not shared with the outgoing resident set move.
  const std::uint64_t shared = OverlapBytes(
      spec_, subgraphs_[next_cache].shape, subgraphs_[cache_index_].shape);
  pending_fill_bytes_ += subgraphs_[next_cache].weight_bytes - shared;
  cache_index_ = next_cache;
}

StepResult Scheduler::Step(const QueryRequest& query) {
  std::vector<double> latency_s(subnets_.size());
  for (std::size_t i = 0; i < subnets_.size(); ++i) {
    latency_s[i] = table_.At(i, cache_index_);
  }
  const SubnetChoice choice =
      SelectSubnet(latency_s, accuracy_, config_.policy, query);

  StepResult result;
  result.subnet_id = subnets_[choice.index].id;
  result.subgraph_id = subgraphs_[cache_index_].id;
  result.table_latency_s = latency_s[choice.index];
  result.violated = choice.violated;
  result.cache_fill_bytes = pending_fill_bytes_;
  pending_fill_bytes_ = 0;

  if (config_.window > 0) {
    history_.push_back(choice.index);
    while (history_.size() > config_.window) history_.pop_front();
    ++served_count_;
    if (served_count_ % config_.window == 0) {
      const std::size_t previous = cache_index_;
      RetargetCache(SelectCache(AverageEncoding(), subgraph_encoding_));
      if (cache_index_ != previous) {
        result.cache_updated = true;
        result.new_subgraph_id = subgraphs_[cache_index_].id;
      }
    }
  }
  return result;
}

}  // namespace sgs
