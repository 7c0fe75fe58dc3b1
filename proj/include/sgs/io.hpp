// JSON loaders for the on-disk inputs: supernet fixtures (layer geometry,
// stage structure, servable picks) and hardware descriptions.  All loaders
// throw FormatError naming the file and offending field.
#pragma once

#include <filesystem>
#include <vector>

#include "sgs/accel.hpp"
#include "sgs/supernet.hpp"

namespace sgs {

// A supernet fixture: the weight-sharing search space plus the trained
// picks that are actually served.
struct FixtureBundle {
  SuperNetSpec spec;
  std::vector<ElasticPick> picks;
};

FixtureBundle LoadFixture(const std::filesystem::path& path);
HwConfig LoadHwConfig(const std::filesystem::path& path);

// Descriptor persistence (JSON arrays).  Shapes serialize as [K, C] pairs
// per layer; a save/load round trip reproduces the descriptors exactly.
void SaveSubnets(const std::filesystem::path& path,
                 const std::vector<SubNetDescriptor>& subnets);
std::vector<SubNetDescriptor> LoadSubnets(const std::filesystem::path& path);
void SaveSubgraphs(const std::filesystem::path& path,
                   const std::vector<SubGraphDescriptor>& subgraphs);
std::vector<SubGraphDescriptor> LoadSubgraphs(
    const std::filesystem::path& path);

}  // namespace sgs
