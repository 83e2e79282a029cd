#include "factorplan/factor_space.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "test_util.hpp"

namespace factorplan {
namespace {

using testutil::config_of;
using testutil::cross_product_oracle;
using testutil::random_space;
using testutil::uniform_space;

TEST(ParseSpace, RealRobotShape) {
  // 5 factors x 4 values, the shape used for the real-robot arithmetic.
  const char* text = R"({
    "name": "robot",
    "factors": [
      {"name": "object_position", "base": "center",
       "values": [{"id": "center"}, {"id": "down"}, {"id": "up"}, {"id": "left"}]},
      {"name": "object_type", "base": "metal",
       "values": [{"id": "metal"}, {"id": "wooden"}, {"id": "gray"}, {"id": "plastic"}]},
      {"name": "container_type", "base": "tin",
       "values": [{"id": "tin"}, {"id": "plate"}, {"id": "bowl"}, {"id": "cup"}]},
      {"name": "table_height", "base": "default",
       "values": [{"id": "default"}, {"id": "higher"}, {"id": "lower5"}, {"id": "lower8"}]},
      {"name": "table_texture", "base": "dark",
       "values": [{"id": "dark"}, {"id": "brown"}, {"id": "gift"}, {"id": "marble"}]}
    ]})";
  const FactorSpace space = parse_space(text);
  EXPECT_EQ(space.num_factors(), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(space.factor(i).num_values(), 4);
  }
  EXPECT_EQ(space.combination_count(), 1024u);
  EXPECT_EQ(space.base_config(), config_of({0, 0, 0, 0, 0}));
}

TEST(ParseSpace, SingletonSpaceIsValid) {
  const FactorSpace space =
      parse_space(R"({"name": "one", "factors": [{"name": "f", "base": "v",
                      "values": [{"id": "v"}]}]})");
  EXPECT_EQ(space.num_factors(), 1);
  EXPECT_EQ(space.combination_count(), 1u);
}

TEST(ParseSpace, UnknownBaseNamesTheFactor) {
  try {
    parse_space(R"({"name": "s", "factors": [{"name": "height", "base": "missing",
                    "values": [{"id": "a"}, {"id": "b"}]}]})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
}

TEST(ParseSpace, OutOfRangeBaseIndexNamesTheFactor) {
  FactorDef factor;
  factor.name = "height";
  for (int v = 0; v < 4; ++v) {
    factor.values.push_back(FactorValue{"v" + std::to_string(v), "", {}, {}});
  }
  factor.base_index = 4;
  try {
    FactorSpace space("s", {factor});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("height"), std::string::npos);
  }
}

TEST(ParseSpace, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(parse_space(R"({"name": "s", "factors": []})"), ValidationError);
  EXPECT_THROW(parse_space(R"({"name": "s", "factors": [
      {"name": "a", "base": "x", "values": [{"id": "x"}]},
      {"name": "a", "base": "y", "values": [{"id": "y"}]}]})"),
               ValidationError);
  EXPECT_THROW(parse_space(R"({"name": "s", "factors": [
      {"name": "a", "base": "x", "values": [{"id": "x"}, {"id": "x"}]}]})"),
               ValidationError);
}

TEST(ParseSpace, RejectsUnknownFields) {
  EXPECT_THROW(parse_space(R"({"name": "s", "bogus": 1, "factors": [
      {"name": "a", "base": "x", "values": [{"id": "x"}]}]})"),
               ValidationError);
  EXPECT_THROW(parse_space(R"({"name": "s", "factors": [
      {"name": "a", "base": "x", "values": [{"id": "x", "extra": 2}]}]})"),
               ValidationError);
}

TEST(ParseSpace, RejectsNonUnitQuaternion) {
  EXPECT_THROW(parse_space(R"({"name": "s", "factors": [
      {"name": "a", "base": "x",
       "values": [{"id": "x", "quaternion": [1.0, 0.1, 0.0, 0.0]}]}]})"),
               ValidationError);
}

TEST(ParseSpace, RoundTripIsIdentity) {
  const char* text = R"({
    "name": "cam",
    "factors": [
      {"name": "pos", "base": "p0",
       "values": [{"id": "p0", "embedding": [0.0, 0.0, 0.0]},
                  {"id": "p1", "label": "shifted", "embedding": [0.1, -0.2, 0.3]}]},
      {"name": "rot", "base": "q0",
       "values": [{"id": "q0", "quaternion": [1.0, 0.0, 0.0, 0.0]},
                  {"id": "q1", "quaternion": [0.0, 1.0, 0.0, 0.0]}]}
    ]})";
  const FactorSpace space = parse_space(text);
  const FactorSpace reparsed = parse_space(space_to_json(space).dump());
  EXPECT_EQ(space_to_json(space), space_to_json(reparsed));
  EXPECT_EQ(space_spec_hash(space), space_spec_hash(reparsed));
}

TEST(ParseSpace, HashChangesWithContent) {
  const FactorSpace a = uniform_space(2, 3);
  const FactorSpace b = uniform_space(2, 4);
  EXPECT_NE(space_spec_hash(a), space_spec_hash(b));
}

TEST(HammingDistance, BasicCases) {
  EXPECT_EQ(hamming_distance(config_of({1, 2, 3}), config_of({1, 2, 3})), 0);
  EXPECT_EQ(hamming_distance(config_of({0, 0, 0, 0, 0}), config_of({0, 0, 1, 0, 0})), 1);
  // f* vs an all-new-values combination differs everywhere.
  EXPECT_EQ(hamming_distance(config_of({0, 0, 0, 0, 0}), config_of({1, 2, 3, 1, 2})), 5);
  EXPECT_THROW(hamming_distance(config_of({0}), config_of({0, 1})), ValidationError);
}

TEST(HammingDistance, MetricAxiomsOnRandomTriples) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const FactorSpace space = random_space(rng, 5, 6);
    auto draw = [&] {
      FactorConfig config;
      for (int i = 0; i < space.num_factors(); ++i) {
        config.assignment.push_back(static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(space.factor(i).num_values()))));
      }
      return config;
    };
    const FactorConfig a = draw();
    const FactorConfig b = draw();
    const FactorConfig c = draw();
    EXPECT_EQ(hamming_distance(a, a), 0);
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
    EXPECT_EQ(hamming_distance(a, b) == 0, a == b);
  }
}

TEST(EnumerateAll, CountsAndUniqueness) {
  const FactorSpace space = uniform_space(2, 10);
  const auto configs = enumerate_all(space);
  EXPECT_EQ(configs.size(), 100u);
  const std::set<FactorConfig> unique(configs.begin(), configs.end());
  EXPECT_EQ(unique.size(), 100u);
}

TEST(EnumerateAll, SingleFactorEmitsValuesInOrder) {
  const FactorSpace space = uniform_space(1, 3);
  const auto configs = enumerate_all(space);
  ASSERT_EQ(configs.size(), 3u);
  EXPECT_EQ(configs[0], config_of({0}));
  EXPECT_EQ(configs[1], config_of({1}));
  EXPECT_EQ(configs[2], config_of({2}));
}

TEST(EnumerateAll, MatchesNestedLoopOracle) {
  const FactorSpace space = uniform_space(3, 4);
  const auto configs = enumerate_all(space);
  EXPECT_EQ(configs.size(), 64u);
  EXPECT_EQ(configs, cross_product_oracle(space));
}

TEST(EnumerateAll, LastFactorVariesFastest) {
  const FactorSpace space = uniform_space(2, 3);
  const auto configs = enumerate_all(space);
  ASSERT_EQ(configs.size(), 9u);
  EXPECT_EQ(configs[0], config_of({0, 0}));
  EXPECT_EQ(configs[1], config_of({0, 1}));
  EXPECT_EQ(configs[3], config_of({1, 0}));
}

TEST(EnumerateAll, EveryConfigValidatesAndCountMatchesProduct) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FactorSpace space = random_space(rng, 4, 5);
    const auto configs = enumerate_all(space);
    EXPECT_EQ(configs.size(), space.combination_count());
    for (const FactorConfig& config : configs) {
      EXPECT_NO_THROW(space.validate_config(config));
    }
  }
}

TEST(EnumerateAll, OverflowIsRejected) {
  const FactorSpace space = uniform_space(41, 3);  // 3^41 > 2^64
  EXPECT_THROW(space.combination_count(), ValidationError);
  EXPECT_THROW(enumerate_all(space), ValidationError);
}

TEST(ValidateConfig, RejectsMismatch) {
  const FactorSpace space = uniform_space(2, 3);
  EXPECT_THROW(space.validate_config(config_of({0})), ValidationError);
  EXPECT_THROW(space.validate_config(config_of({0, 3})), ValidationError);
  EXPECT_NO_THROW(space.validate_config(config_of({2, 2})));
}

}  // namespace
}  // namespace factorplan
