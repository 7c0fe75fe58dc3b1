#include "sgs/supernet.hpp"

#include <cstdint>
#include <random>

#include "doctest.h"
#include "sgs/errors.hpp"
#include "test_util.hpp"

using namespace sgs;
using namespace sgs::test;

TEST_CASE("layer weight bytes multiply out all dimensions") {
  LayerSpec layer;
  layer.kernels = 3;
  layer.channels = 2;
  layer.kernel_h = 2;
  layer.kernel_w = 2;
  layer.weight_elem_bytes = 2;
  CHECK(LayerWeightBytes(layer, {3, 2}) == 3u * 2u * 2u * 2u * 2u);
  CHECK(LayerWeightBytes(layer, {1, 1}) == 8u);
  CHECK(LayerWeightBytes(layer, {0, 0}) == 0u);
}

TEST_CASE("supernet weight bytes sum the layers") {
  SuperNetSpec spec = TinySpec();
  ShapeVector maximal = MaximalShape(spec);
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    expected += LayerWeightBytes(spec.layers[i], maximal[i]);
  }
  CHECK(WeightBytes(spec, maximal) == expected);
  // a: 8*3*9, b: 16*8*9, c: 32*16, d: 10*32*2
  CHECK(WeightBytes(spec, maximal) == 216u + 1152u + 512u + 640u);
}

TEST_CASE("shape validation rejects length and bound violations") {
  SuperNetSpec spec = TinySpec();
  ShapeVector ok = MaximalShape(spec);
  CHECK_NOTHROW(ValidateShape(spec, ok));
  ShapeVector short_vec(ok.begin(), ok.end() - 1);
  CHECK_THROWS_AS(ValidateShape(spec, short_vec), StructuralError);
  ShapeVector oversize = ok;
  oversize[1].kernels += 1;
  CHECK_THROWS_AS(ValidateShape(spec, oversize), ValidationError);
  ShapeVector dropped = ok;
  dropped[2] = {0, 0};
  CHECK_NOTHROW(ValidateShape(spec, dropped));
}

TEST_CASE("encode and decode round-trip random shapes") {
  SuperNetSpec spec = TinySpec();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    ShapeVector shape = RandomShape(spec, rng);
    EncodedVector enc = Encode(spec, shape);
    REQUIRE(enc.size() == 2 * shape.size());
    for (std::size_t l = 0; l < shape.size(); ++l) {
      CHECK(enc[2 * l] == static_cast<double>(shape[l].kernels));
      CHECK(enc[2 * l + 1] == static_cast<double>(shape[l].channels));
    }
    CHECK(DecodeShape(enc) == shape);
    CHECK(EncodeShape(shape) == enc);
  }
}

TEST_CASE("intersection is a lattice meet") {
  SuperNetSpec spec = TinySpec();
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    ShapeVector a = RandomShape(spec, rng);
    ShapeVector b = RandomShape(spec, rng);
    ShapeVector c = RandomShape(spec, rng);
    ShapeVector ab = Intersect(a, b);
    CHECK(ab == Intersect(b, a));
    CHECK(Intersect(a, a) == a);
    CHECK(Intersect(Intersect(a, b), c) == Intersect(a, Intersect(b, c)));
    CHECK(Covers(a, ab));
    CHECK(Covers(b, ab));
    // covering is exactly "meet returns the smaller operand"
    CHECK(Covers(a, b) == (Intersect(a, b) == b));
  }
}

TEST_CASE("overlap bytes never exceed either operand's weight") {
  SuperNetSpec spec = TinySpec();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    ShapeVector a = RandomShape(spec, rng);
    ShapeVector b = RandomShape(spec, rng);
    std::uint64_t overlap = OverlapBytes(spec, a, b);
    CHECK(overlap == WeightBytes(spec, Intersect(a, b)));
    CHECK(overlap <= WeightBytes(spec, a));
    CHECK(overlap <= WeightBytes(spec, b));
    CHECK(OverlapBytes(spec, a, a) == WeightBytes(spec, a));
  }
}

namespace {

// Two-stage elastic spec with channel tracking:
//   layer 0 "in"  8x4, fraction drives layer 1's channels
//   layer 1 "mid" 6x8, stage "s1" block 0
//   layer 2 "out" 5x6, stage "s1" block 1, channels track layer 1
SuperNetSpec ElasticSpec() {
  SuperNetSpec spec;
  spec.name = "elastic";
  LayerSpec in;
  in.name = "in";
  in.kernels = 8;
  in.channels = 4;
  in.expand_choices = {0.5, 1.0};
  LayerSpec mid;
  mid.name = "mid";
  mid.kernels = 6;
  mid.channels = 8;
  mid.channel_source = 0;
  mid.expand_choices = {0.3, 0.5, 1.0};
  LayerSpec out;
  out.name = "out";
  out.kernels = 5;
  out.channels = 6;
  out.channel_source = 1;
  out.expand_choices = {0.5, 1.0};
  spec.layers = {in, mid, out};
  StageSpec s1;
  s1.name = "s1";
  s1.blocks = {{1}, {2}};
  s1.depth_choices = {1, 2};
  spec.stages = {s1};
  return spec;
}

}  // namespace

TEST_CASE("derived shapes scale kernels and track source channels") {
  SuperNetSpec spec = ElasticSpec();
  ElasticPick pick;
  pick.id = "p";
  pick.depth = {2};
  pick.expand = {0.5, 0.5, 1.0};
  ShapeVector shape = DeriveShape(spec, pick);
  // in: K = round(0.5*8) = 4, C = 4 (no source)
  CHECK(shape[0] == LayerShape{4, 4});
  // mid: K = round(0.5*6) = 3, C = round(0.5*8) = 4 from layer 0's fraction
  CHECK(shape[1] == LayerShape{3, 4});
  // out: K = 5, C = round(0.5*6) = 3 from layer 1's fraction
  CHECK(shape[2] == LayerShape{5, 3});
}

TEST_CASE("half counts round away from zero and clamp at one") {
  SuperNetSpec spec = ElasticSpec();
  ElasticPick pick;
  pick.id = "p";
  pick.depth = {2};
  pick.expand = {1.0, 0.3, 1.0};
  ShapeVector shape = DeriveShape(spec, pick);
  // mid: K = round(0.3*6) = round(1.8) = 2
  CHECK(shape[1].kernels == 2);
  pick.expand = {0.5, 0.5, 0.5};
  shape = DeriveShape(spec, pick);
  // out: K = round(0.5*5) = round(2.5) = 3 (half away from zero)
  CHECK(shape[2].kernels == 3);
}

TEST_CASE("depth pruning zeroes trailing blocks") {
  SuperNetSpec spec = ElasticSpec();
  ElasticPick pick;
  pick.id = "p";
  pick.depth = {1};
  pick.expand = {1.0, 1.0, 1.0};
  ShapeVector shape = DeriveShape(spec, pick);
  CHECK(shape[1] == LayerShape{6, 8});
  CHECK(shape[2] == LayerShape{0, 0});
  CHECK(WeightBytes(spec, shape) == 8u * 4u + 6u * 8u);
}

TEST_CASE("derivation rejects off-grid picks") {
  SuperNetSpec spec = ElasticSpec();
  ElasticPick pick;
  pick.id = "bad-depth";
  pick.depth = {3};  // not a depth choice
  pick.expand = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(DeriveShape(spec, pick), ValidationError);
  pick.depth = {2};
  pick.expand = {0.7, 1.0, 1.0};  // not an expand choice of layer 0
  CHECK_THROWS_AS(DeriveShape(spec, pick), ValidationError);
  pick.expand = {1.0, 1.0};  // wrong length
  CHECK_THROWS_AS(DeriveShape(spec, pick), StructuralError);
}

TEST_CASE("derivation rejects channels tracking a pruned layer") {
  // layer 1 lives in a prunable stage; layer 2 stays active but sources it
  SuperNetSpec spec = ElasticSpec();
  spec.stages[0].blocks = {{1}};  // only "mid" is staged
  spec.stages[0].depth_choices = {0, 1};
  ElasticPick pick;
  pick.id = "dangling";
  pick.depth = {0};
  pick.expand = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(DeriveShape(spec, pick), ValidationError);
}

TEST_CASE("a pick dominating another derives a covering shape") {
  SuperNetSpec spec = ElasticSpec();
  std::mt19937_64 rng(14);
  auto random_pick = [&](const ElasticPick* lower) {
    ElasticPick pick;
    pick.id = "r";
    std::uint32_t d_lo = lower ? lower->depth[0] : spec.stages[0].depth_choices.front();
    std::vector<std::uint32_t> depths;
    for (std::uint32_t d : spec.stages[0].depth_choices) {
      if (d >= d_lo) depths.push_back(d);
    }
    pick.depth = {depths[rng() % depths.size()]};
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      double lo = lower ? lower->expand[i] : 0.0;
      std::vector<double> allowed;
      for (double f : spec.layers[i].expand_choices) {
        if (f >= lo) allowed.push_back(f);
      }
      pick.expand.push_back(allowed[rng() % allowed.size()]);
    }
    return pick;
  };
  for (int i = 0; i < 300; ++i) {
    ElasticPick small = random_pick(nullptr);
    ElasticPick big = random_pick(&small);
    CHECK(Covers(DeriveShape(spec, big), DeriveShape(spec, small)));
  }
}

TEST_CASE("maximal shape covers every derivable pick") {
  FixtureBundle bundle = LoadBundle("resnet50ws.json");
  ShapeVector maximal = MaximalShape(bundle.spec);
  for (const ElasticPick& pick : bundle.picks) {
    CHECK(Covers(maximal, DeriveShape(bundle.spec, pick)));
  }
}

TEST_CASE("bundled fixtures enumerate with exact byte counts") {
  FixtureBundle res = LoadBundle("resnet50ws.json");
  std::vector<SubNetDescriptor> subnets =
      EnumerateSubnets(res.spec, res.picks);
  REQUIRE(subnets.size() == 6);
  CHECK(subnets[0].id == "sn0");
  CHECK(subnets[0].weight_bytes == 7598933u);
  CHECK(subnets[5].id == "sn5");
  CHECK(subnets[5].weight_bytes == 23454912u);
  // the maximal pick IS the maximal shape
  CHECK(subnets[5].shape == MaximalShape(res.spec));
  for (const SubNetDescriptor& sn : subnets) {
    CHECK(sn.weight_bytes == WeightBytes(res.spec, sn.shape));
    CHECK_NOTHROW(ValidateShape(res.spec, sn.shape));
  }
}

TEST_CASE("subgraph factory fills id bytes and validates") {
  SuperNetSpec spec = TinySpec();
  ShapeVector shape = MaximalShape(spec);
  shape[0] = {4, 3};
  SubGraphDescriptor g = MakeSubGraph(spec, "g1", shape);
  CHECK(g.id == "g1");
  CHECK(g.weight_bytes == WeightBytes(spec, shape));
  ShapeVector bad = shape;
  bad[1].channels = 99;
  CHECK_THROWS_AS(MakeSubGraph(spec, "g2", bad), ValidationError);
}
