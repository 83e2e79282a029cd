#include "factorplan/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "factorplan/budgeting.hpp"
#include "factorplan/coverage.hpp"
#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "test_util.hpp"

namespace factorplan {
namespace {

using testutil::config_of;
using testutil::random_space;
using testutil::uniform_space;

GeneralizationModel make_model(double p_exact, double p_compose, double p_unseen) {
  GeneralizationModel model;
  model.p_exact = p_exact;
  model.p_compose = p_compose;
  model.p_unseen_value = p_unseen;
  return model;
}

TEST(SuccessProb, ExactMatchScoresPExact) {
  const FactorSpace space = uniform_space(3, 4);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kStair, GeneratePlanParams{}, 100, 2);
  const GeneralizationModel model = make_model(0.9, 0.5, 0.1);
  EXPECT_DOUBLE_EQ(success_prob(model, plan, space.base_config()), 0.9);
}

TEST(SuccessProb, AllOrNothingModelZeroesUnseenCombos) {
  const FactorSpace space = uniform_space(3, 4);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kStair, GeneratePlanParams{}, 100, 2);
  const GeneralizationModel model = make_model(1.0, 0.0, 0.0);
  const std::vector<FactorConfig> plan_configs = plan.configs();
  const std::set<FactorConfig> seen(plan_configs.begin(), plan_configs.end());
  for (const FactorConfig& config : enumerate_all(space)) {
    EXPECT_DOUBLE_EQ(success_prob(model, plan, config), seen.contains(config) ? 1.0 : 0.0);
  }
}

TEST(SuccessProb, CaseLadderOnLPlan) {
  // N=2, k=3 full L plan covers all values; a both-values-seen combo scores
  // p_compose, a combo with an unseen value scores p_compose * p_unseen.
  const FactorSpace space = uniform_space(2, 3);
  CollectionPlan plan;
  plan.strategy = Strategy::kL;
  plan.deduped = true;
  for (const auto& assignment :
       {std::vector<int>{0, 0}, {1, 0}, {2, 0}, {0, 1}}) {
    plan.entries.push_back(PlanEntry{config_of(assignment), 10});
  }
  // Values seen: factor 0 all of {0,1,2}; factor 1 only {0,1}.
  const GeneralizationModel model = make_model(1.0, 0.6, 0.2);
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({1, 1})), 0.6);
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({1, 2})), 0.6 * 0.2);
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({0, 0})), 1.0);
}

TEST(SuccessProb, PairPenaltyHitsOnlyUnseenPairs) {
  const FactorSpace space = uniform_space(2, 3);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kL, GeneratePlanParams{}, 100, 5);
  GeneralizationModel model = make_model(1.0, 0.6, 0.2);
  model.pair_penalty[{0, 1}] = 0.5;
  // L never pairs two non-base values, so any such combo takes the penalty.
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({1, 1})), 0.6 * 0.5);
  // Pairs present in the plan are not penalized.
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({1, 0})), 1.0);
}

TEST(SuccessProb, DemoSaturationScalesExactBranch) {
  const FactorSpace space = uniform_space(2, 3);
  CollectionPlan plan;
  plan.strategy = Strategy::kNoVariation;
  plan.entries.push_back(PlanEntry{space.base_config(), 100});
  GeneralizationModel model = make_model(1.0, 0.6, 0.2);
  model.demo_saturation = 100.0;
  EXPECT_DOUBLE_EQ(success_prob(model, plan, space.base_config()), 0.5);
  // Non-exact branches are not scaled.
  EXPECT_DOUBLE_EQ(success_prob(model, plan, config_of({1, 0})), 0.6 * 0.2);
}

TEST(SuccessProb, InvalidConfigRejected) {
  const FactorSpace space = uniform_space(3, 3);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kStair, GeneratePlanParams{}, 100, 0);
  const GeneralizationModel model = make_model(1, 1, 1);
  EXPECT_THROW(success_prob(model, plan, config_of({0, 0})), ValidationError);
}

TEST(ModelValidation, RangesAndWarnings) {
  GeneralizationModel model = make_model(1.1, 0.5, 0.1);
  EXPECT_THROW(model.validate(), ValidationError);
  model = make_model(0.5, 0.9, 0.1);
  EXPECT_FALSE(model.validate().empty());  // p_exact < p_compose warns
  model = make_model(0.9, 0.5, 0.1);
  EXPECT_TRUE(model.validate().empty());
  model.demo_saturation = -1.0;
  EXPECT_THROW(model.validate(), ValidationError);
}

TEST(ExpectedObjective, PerfectComposerWithFullValueCoverage) {
  const FactorSpace space = uniform_space(3, 4);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kStair, GeneratePlanParams{}, 100, 3);
  const GeneralizationModel model = make_model(1.0, 1.0, 0.3);
  const EvaluationResult result =
      expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
  EXPECT_DOUBLE_EQ(result.expected_success, 1.0);
}

TEST(ExpectedObjective, MemorizerScoresSeenFraction) {
  const FactorSpace space = uniform_space(3, 4);
  for (const Strategy strategy : {Strategy::kStair, Strategy::kDiagonal, Strategy::kL}) {
    const CollectionPlan plan =
        generate_plan(space, strategy, GeneratePlanParams{}, 100, 9);
    const GeneralizationModel model = make_model(1.0, 0.0, 0.0);
    const EvaluationResult result =
        expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
    EXPECT_DOUBLE_EQ(result.expected_success,
                     static_cast<double>(plan.entries.size()) / 64.0);
  }
}

TEST(ExpectedObjective, MonteCarloAgreesWithExact) {
  const FactorSpace space = uniform_space(2, 10);
  const CollectionPlan plan = plan_at_rate(space, Strategy::kL, 20, 100, 6);
  const GeneralizationModel model = make_model(0.95, 0.8, 0.1);
  const EvaluationResult exact =
      expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
  const EvaluationResult mc =
      expected_objective(model, plan, space, EvalMethod::kMonteCarlo, 10000, 17);
  ASSERT_TRUE(mc.standard_error.has_value());
  EXPECT_LE(std::abs(mc.expected_success - exact.expected_success),
            3.0 * *mc.standard_error + 1e-12);
  EXPECT_FALSE(exact.standard_error.has_value());
}

TEST(ExpectedObjective, CompositionalMeanNeverUsesUnseenBranch) {
  // On the compositional set, every value is seen, so with p_unseen = 0 the
  // restricted mean must still equal p_compose.
  const FactorSpace space = uniform_space(3, 3);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kDiagonal, GeneratePlanParams{}, 100, 8);
  const GeneralizationModel model = make_model(1.0, 0.7, 0.0);
  const EvaluationResult result =
      expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
  ASSERT_TRUE(result.compositional_success.has_value());
  EXPECT_DOUBLE_EQ(*result.compositional_success, 0.7);
  EXPECT_EQ(result.compositional_samples, 27u - 3u);
}

TEST(ExpectedObjective, EmptyCompositionalSetIsUndefined) {
  const FactorSpace space = uniform_space(2, 2);
  const CollectionPlan plan =
      generate_plan(space, Strategy::kNoVariation, GeneratePlanParams{}, 10, 0);
  const GeneralizationModel model = make_model(1.0, 0.5, 0.1);
  const EvaluationResult result =
      expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
  EXPECT_FALSE(result.compositional_success.has_value());
}

TEST(ExpectedObjective, ExactModeSizeCap) {
  const FactorSpace space = uniform_space(8, 10);  // 10^8 combos
  const CollectionPlan plan =
      generate_plan(space, Strategy::kNoVariation, GeneratePlanParams{}, 10, 0);
  const GeneralizationModel model = make_model(1.0, 0.5, 0.1);
  EXPECT_THROW(expected_objective(model, plan, space, EvalMethod::kExact, 0, 0),
               ValidationError);
  // Monte Carlo still works on the oversized space.
  const EvaluationResult result =
      expected_objective(model, plan, space, EvalMethod::kMonteCarlo, 1000, 3);
  EXPECT_GE(result.expected_success, 0.0);
}

TEST(ExpectedObjective, MonotoneInModelParameters) {
  SplitMix64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const FactorSpace space = random_space(rng, 3, 4);
    const Strategy strategy = Strategy::kStair;
    const CollectionPlan plan =
        generate_plan(space, strategy, GeneratePlanParams{}, 10000, rng.next());
    const double base_params[3] = {0.8, 0.5, 0.2};
    const GeneralizationModel base_model =
        make_model(base_params[0], base_params[1], base_params[2]);
    const double base_value =
        expected_objective(base_model, plan, space, EvalMethod::kExact, 0, 0)
            .expected_success;
    for (int p = 0; p < 3; ++p) {
      double bumped[3] = {base_params[0], base_params[1], base_params[2]};
      bumped[p] = std::min(1.0, bumped[p] + 0.15);
      const GeneralizationModel model = make_model(bumped[0], bumped[1], bumped[2]);
      const double value =
          expected_objective(model, plan, space, EvalMethod::kExact, 0, 0)
              .expected_success;
      EXPECT_GE(value, base_value - 1e-12) << "parameter " << p;
    }
  }
}

TEST(ExpectedObjective, MonteCarloVsExactOnRandomInstances) {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const FactorSpace space = random_space(rng, 3, 5);
    const Strategy strategy =
        rng.next_below(2) == 0 ? Strategy::kStair : Strategy::kL;
    const CollectionPlan plan =
        generate_plan(space, strategy, GeneratePlanParams{}, 10000, rng.next());
    const GeneralizationModel model =
        make_model(0.5 + rng.next_unit() * 0.5, rng.next_unit(), rng.next_unit() * 0.5);
    const EvaluationResult exact =
        expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
    const EvaluationResult mc =
        expected_objective(model, plan, space, EvalMethod::kMonteCarlo, 4000, rng.next());
    EXPECT_LE(std::abs(mc.expected_success - exact.expected_success),
              4.0 * std::max(*mc.standard_error, 1e-9));
  }
}

TEST(CompareStrategies, SingleCellMatchesDirectEvaluation) {
  const FactorSpace space = uniform_space(2, 10);
  const GeneralizationModel model = make_model(0.95, 0.8, 0.1);
  const auto rows = compare_strategies(space, model, {20}, 100, {Strategy::kL}, {4},
                                       EvalMethod::kExact, 0);
  ASSERT_EQ(rows.size(), 1u);
  const CollectionPlan plan = plan_at_rate(space, Strategy::kL, 20, 100, 4);
  const EvaluationResult direct =
      expected_objective(model, plan, space, EvalMethod::kExact, 0, 0);
  EXPECT_DOUBLE_EQ(rows[0].mean_success, direct.expected_success);
  EXPECT_EQ(rows[0].seed_count, 1);
  EXPECT_DOUBLE_EQ(rows[0].stderr_success, 0.0);
}

TEST(CompareStrategies, CoverageStrategiesBeatRandomAtValueBudget) {
  // At budget sum(k_i), full value coverage separates Stair/L/Diagonal from
  // Random whenever composing beats missing values.
  const FactorSpace space = uniform_space(3, 6);
  const GeneralizationModel model = make_model(0.95, 0.8, 0.1);
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  const auto rows = compare_strategies(
      space, model, {18}, 1000,
      {Strategy::kStair, Strategy::kL, Strategy::kDiagonal, Strategy::kRandom}, seeds,
      EvalMethod::kExact, 0);
  ASSERT_EQ(rows.size(), 4u);
  double random_mean = 0.0;
  for (const auto& row : rows) {
    if (row.strategy == Strategy::kRandom) random_mean = row.mean_success;
  }
  for (const auto& row : rows) {
    if (row.strategy != Strategy::kRandom) {
      EXPECT_GT(row.mean_success, random_mean) << to_string(row.strategy);
    }
  }
}

TEST(CompareStrategies, DemoSweepWithSaturationIsNondecreasing) {
  const FactorSpace space = uniform_space(5, 10);
  GeneralizationModel model = make_model(0.95, 0.8, 0.1);
  model.demo_saturation = 200.0;
  double previous = -1.0;
  for (const int demos : {250, 500, 1000}) {
    const auto rows = compare_strategies(space, model, {50}, demos, {Strategy::kStair},
                                         {0, 1, 2}, EvalMethod::kExact, 0);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_GE(rows[0].mean_success, previous);
    previous = rows[0].mean_success;
  }
}

TEST(CompareStrategies, SingleFactorExpandsPerFactor) {
  const FactorSpace space = uniform_space(3, 4);
  const GeneralizationModel model = make_model(0.9, 0.6, 0.1);
  const auto rows = compare_strategies(space, model, {5}, 100,
                                       {Strategy::kSingleFactor}, {0, 1},
                                       EvalMethod::kExact, 0);
  ASSERT_EQ(rows.size(), 3u);
  std::set<int> indices;
  for (const auto& row : rows) indices.insert(row.single_factor_index);
  EXPECT_EQ(indices, (std::set<int>{0, 1, 2}));
}

TEST(CompareStrategies, RowsSortedByStrategyThenBudget) {
  const FactorSpace space = uniform_space(2, 6);
  const GeneralizationModel model = make_model(0.9, 0.6, 0.1);
  // Deliberately unsorted inputs.
  const auto rows = compare_strategies(space, model, {12, 6}, 100,
                                       {Strategy::kStair, Strategy::kDiagonal}, {0},
                                       EvalMethod::kExact, 0);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].strategy, Strategy::kDiagonal);
  EXPECT_EQ(rows[0].change_budget, 6);
  EXPECT_EQ(rows[1].strategy, Strategy::kDiagonal);
  EXPECT_EQ(rows[1].change_budget, 12);
  EXPECT_EQ(rows[2].strategy, Strategy::kStair);
  EXPECT_EQ(rows[3].change_budget, 12);
}

TEST(CompareStrategies, DeterministicAcrossRuns) {
  const FactorSpace space = uniform_space(3, 5);
  const GeneralizationModel model = make_model(0.9, 0.7, 0.2);
  const auto a = compare_strategies(space, model, {8, 15}, 200,
                                    {Strategy::kStair, Strategy::kRandom}, {1, 2},
                                    EvalMethod::kMonteCarlo, 2000);
  const auto b = compare_strategies(space, model, {8, 15}, 200,
                                    {Strategy::kStair, Strategy::kRandom}, {1, 2},
                                    EvalMethod::kMonteCarlo, 2000);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_success, b[i].mean_success);
    EXPECT_EQ(a[i].stderr_success, b[i].stderr_success);
  }
  EXPECT_EQ(comparison_csv(a, model, space, EvalMethod::kMonteCarlo, 2000),
            comparison_csv(b, model, space, EvalMethod::kMonteCarlo, 2000));
}

TEST(ModelJson, RoundTripAndValidation) {
  const FactorSpace space = uniform_space(3, 4);
  const nlohmann::json doc = {
      {"p_exact", 0.9},
      {"p_compose", 0.6},
      {"p_unseen_value", 0.1},
      {"demo_saturation", 150.0},
      {"pair_penalties",
       {{{"factors", {"f0", "f2"}}, {"multiplier", 0.5}}}},
  };
  const GeneralizationModel model = model_from_json(doc, space);
  EXPECT_DOUBLE_EQ(model.p_exact, 0.9);
  ASSERT_TRUE(model.demo_saturation.has_value());
  ASSERT_EQ(model.pair_penalty.size(), 1u);
  EXPECT_DOUBLE_EQ(model.pair_penalty.at({0, 2}), 0.5);
  EXPECT_EQ(model_to_json(model, space), model_to_json(model_from_json(model_to_json(model, space), space), space));

  nlohmann::json bad = doc;
  bad["bogus"] = 1;
  EXPECT_THROW(model_from_json(bad, space), ValidationError);
  bad = doc;
  bad["pair_penalties"][0]["factors"] = {"f0", "nope"};
  EXPECT_THROW(model_from_json(bad, space), ValidationError);
  bad = doc;
  bad["p_exact"] = 2.0;
  EXPECT_THROW(model_from_json(bad, space), ValidationError);
}

}  // namespace
}  // namespace factorplan
