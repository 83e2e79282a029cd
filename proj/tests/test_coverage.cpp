#include "factorplan/coverage.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "factorplan/strategies.hpp"
#include "test_util.hpp"

namespace factorplan {
namespace {

using testutil::config_of;
using testutil::cross_product_oracle;
using testutil::random_space;
using testutil::uniform_space;

// Brute-force oracle: walk all of F^N, keep combos whose every value appears
// somewhere in the input and which are not themselves inputs.
std::vector<FactorConfig> compositional_oracle(const std::vector<FactorConfig>& configs,
                                               const FactorSpace& space) {
  const std::set<FactorConfig> seen(configs.begin(), configs.end());
  std::vector<std::set<int>> values(static_cast<std::size_t>(space.num_factors()));
  for (const FactorConfig& config : configs) {
    for (int i = 0; i < space.num_factors(); ++i) {
      values[static_cast<std::size_t>(i)].insert(config[i]);
    }
  }
  std::vector<FactorConfig> result;
  for (const FactorConfig& candidate : cross_product_oracle(space)) {
    if (seen.contains(candidate)) continue;
    bool all_seen = true;
    for (int i = 0; i < space.num_factors(); ++i) {
      if (!values[static_cast<std::size_t>(i)].contains(candidate[i])) {
        all_seen = false;
        break;
      }
    }
    if (all_seen) result.push_back(candidate);
  }
  return result;
}

std::vector<FactorConfig> random_config_subset(const FactorSpace& space, SplitMix64& rng,
                                               std::uint64_t count) {
  std::vector<FactorConfig> configs;
  for (std::uint64_t c = 0; c < count; ++c) {
    FactorConfig config;
    for (int i = 0; i < space.num_factors(); ++i) {
      config.assignment.push_back(static_cast<int>(
          rng.next_below(static_cast<std::uint64_t>(space.factor(i).num_values()))));
    }
    configs.push_back(std::move(config));
  }
  return configs;
}

TEST(CoverageReport, FullStairCoversEveryValue) {
  const FactorSpace space = uniform_space(5, 4);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kStair, GeneratePlanParams{}, 160, 12);
  const CoverageReport report = coverage_report(plan.configs(), space);
  for (const double coverage : report.per_factor_value_coverage) {
    EXPECT_DOUBLE_EQ(coverage, 1.0);
  }
  EXPECT_EQ(report.combos_seen.size(), 16u);
  EXPECT_EQ(report.total_combos, 1024u);
  EXPECT_EQ(report.compositional_count, 1024u - 16u);
}

TEST(CoverageReport, NoVariationSeesOnlyBase) {
  const FactorSpace space = uniform_space(3, 4);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kNoVariation, GeneratePlanParams{}, 10, 0);
  const CoverageReport report = coverage_report(plan.configs(), space);
  for (const double coverage : report.per_factor_value_coverage) {
    EXPECT_DOUBLE_EQ(coverage, 0.25);
  }
  EXPECT_EQ(report.combos_seen, std::set<FactorConfig>{space.base_config()});
  EXPECT_EQ(report.compositional_count, 0u);
}

TEST(CoverageReport, MatchesRecountOracleOnRandomSubsets) {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const FactorSpace space = uniform_space(3, 4);
    const auto configs = random_config_subset(space, rng, 10);
    const CoverageReport report = coverage_report(configs, space);

    // Independent recount.
    for (int i = 0; i < space.num_factors(); ++i) {
      std::set<int> values;
      for (const FactorConfig& config : configs) values.insert(config[i]);
      EXPECT_DOUBLE_EQ(report.per_factor_value_coverage[static_cast<std::size_t>(i)],
                       values.size() / 4.0);
    }
    const std::set<FactorConfig> unique(configs.begin(), configs.end());
    EXPECT_EQ(report.combos_seen, unique);
    EXPECT_EQ(report.compositional_count, compositional_oracle(configs, space).size());

    std::uint64_t cells_seen = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        std::set<std::pair<int, int>> pairs;
        for (const FactorConfig& config : unique) pairs.insert({config[i], config[j]});
        cells_seen += pairs.size();
      }
    }
    EXPECT_DOUBLE_EQ(report.pair_coverage, static_cast<double>(cells_seen) / (3 * 16));
  }
}

TEST(CoverageReport, CompositionalBoundInvariant) {
  SplitMix64 rng(91);
  for (int trial = 0; trial < 40; ++trial) {
    const FactorSpace space = random_space(rng, 3, 4);
    const auto configs = random_config_subset(space, rng, 1 + rng.next_below(12));
    const CoverageReport report = coverage_report(configs, space);
    EXPECT_LE(report.compositional_count,
              report.total_combos - report.combos_seen.size());
  }
}

TEST(CompositionalSet, BaseOnlyHasNoComposableCombos) {
  const FactorSpace space = uniform_space(3, 4);
  EXPECT_TRUE(compositional_set({space.base_config()}, space).empty());
}

TEST(CompositionalSet, FullDiagonalOnTwoByThree) {
  const FactorSpace space = uniform_space(2, 3);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kDiagonal, GeneratePlanParams{}, 30, 9);
  const auto set = compositional_set(plan.configs(), space);
  // 9 combos total, 3 seen, all values covered: 6 compositional.
  EXPECT_EQ(set.size(), 6u);
  const auto oracle = compositional_oracle(plan.configs(), space);
  EXPECT_EQ(std::set<FactorConfig>(set.begin(), set.end()),
            std::set<FactorConfig>(oracle.begin(), oracle.end()));
}

TEST(CompositionalSet, MatchesOracleOnRandomInstances) {
  SplitMix64 rng(207);
  for (int trial = 0; trial < 200; ++trial) {
    const FactorSpace space = random_space(rng, 3, 4);
    const auto configs = random_config_subset(space, rng, 1 + rng.next_below(10));
    const auto actual = compositional_set(configs, space);
    const auto expected = compositional_oracle(configs, space);
    EXPECT_EQ(std::set<FactorConfig>(actual.begin(), actual.end()),
              std::set<FactorConfig>(expected.begin(), expected.end()));
    // Disjointness from the input.
    for (const FactorConfig& config : actual) {
      EXPECT_EQ(std::count(configs.begin(), configs.end(), config), 0);
    }
  }
}

TEST(CompositionalSet, FullCoveragePlansLeaveOnlyUnseenCombos) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    for (const Strategy strategy : {Strategy::kL, Strategy::kStair, Strategy::kDiagonal}) {
      for (const int k : {2, 3, 4}) {
        const FactorSpace space = uniform_space(3, k);
        const CollectionPlan plan =
            generate_plan(space, strategy, GeneratePlanParams{}, 5000, rng.next());
        const auto set = compositional_set(plan.configs(), space);
        EXPECT_EQ(set.size(), space.combination_count() - plan.entries.size());
      }
    }
  }
}

TEST(PairwiseGrid, RealRobotGridArithmetic) {
  const FactorSpace space = uniform_space(5, 4);
  std::set<FactorConfig> all_cells;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const auto grid = pairwise_grid(space, i, j);
      EXPECT_EQ(grid.size(), 9u);
      for (const FactorConfig& config : grid) {
        EXPECT_TRUE(all_cells.insert(config).second) << "grids overlap";
      }
    }
  }
  EXPECT_EQ(all_cells.size(), 90u);

  // Every grid config is compositional for the full L plan.
  const CollectionPlan plan =
      generate_plan(space, Strategy::kL, GeneratePlanParams{}, 160, 77);
  const auto comp = compositional_set(plan.configs(), space);
  const std::set<FactorConfig> comp_set(comp.begin(), comp.end());
  for (const FactorConfig& config : all_cells) {
    EXPECT_TRUE(comp_set.contains(config));
  }
}

TEST(PairwiseGrid, SingleValueFactorGivesEmptyGrid) {
  std::vector<FactorDef> factors;
  FactorDef a;
  a.name = "a";
  a.values = {FactorValue{"only", "only", {}, {}}};
  FactorDef b;
  b.name = "b";
  b.values = {FactorValue{"x", "x", {}, {}}, FactorValue{"y", "y", {}, {}}};
  factors.push_back(a);
  factors.push_back(b);
  const FactorSpace space("s", factors);
  EXPECT_TRUE(pairwise_grid(space, 0, 1).empty());
}

TEST(PairwiseGrid, TwoByThreeIsComplementOfLCross) {
  const FactorSpace space = uniform_space(2, 3);
  const auto grid = pairwise_grid(space, 0, 1);
  ASSERT_EQ(grid.size(), 4u);
  // All of F^N minus the 5 configs within Hamming distance 1 of base.
  const FactorConfig base = space.base_config();
  std::set<FactorConfig> expected;
  for (const FactorConfig& config : enumerate_all(space)) {
    if (hamming_distance(config, base) > 1) expected.insert(config);
  }
  EXPECT_EQ(std::set<FactorConfig>(grid.begin(), grid.end()), expected);
}

TEST(PairwiseGrid, RowMajorOrderByFirstFactor) {
  const FactorSpace space = uniform_space(2, 3);
  const auto grid = pairwise_grid(space, 0, 1);
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0], config_of({1, 1}));
  EXPECT_EQ(grid[1], config_of({1, 2}));
  EXPECT_EQ(grid[2], config_of({2, 1}));
  EXPECT_EQ(grid[3], config_of({2, 2}));
}

TEST(PairwiseGrid, InvalidPairRejected) {
  const FactorSpace space = uniform_space(3, 3);
  EXPECT_THROW(pairwise_grid(space, 0, 0), ValidationError);
  EXPECT_THROW(pairwise_grid(space, 0, 3), ValidationError);
}

TEST(EvalSample, CoversWholeSpaceWhenLargeEnough) {
  const FactorSpace space = uniform_space(2, 10);
  const auto samples = eval_sample(space, 100, 3);
  EXPECT_EQ(samples.size(), 100u);
  EXPECT_EQ(std::set<FactorConfig>(samples.begin(), samples.end()).size(), 100u);
  EXPECT_EQ(samples, enumerate_all(space));
}

TEST(EvalSample, SingleSampleIsValid) {
  const FactorSpace space = uniform_space(3, 4);
  const auto samples = eval_sample(space, 1, 9);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_NO_THROW(space.validate_config(samples[0]));
}

TEST(EvalSample, DistinctAndSeedSensitive) {
  const FactorSpace space = uniform_space(5, 10);
  const auto a = eval_sample(space, 100, 1);
  const auto b = eval_sample(space, 100, 2);
  EXPECT_EQ(std::set<FactorConfig>(a.begin(), a.end()).size(), 100u);
  EXPECT_EQ(std::set<FactorConfig>(b.begin(), b.end()).size(), 100u);
  EXPECT_NE(a, b);
  EXPECT_EQ(a, eval_sample(space, 100, 1));
}

}  // namespace
}  // namespace factorplan
