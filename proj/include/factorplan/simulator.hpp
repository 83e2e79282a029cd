#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "factorplan/factor_space.hpp"
#include "factorplan/strategies.hpp"

namespace factorplan {

// Parametric success-probability oracle standing in for a trained policy.
// The case ladder mirrors the evaluation taxonomy: a combination seen
// verbatim in the plan succeeds with p_exact; one whose values were all seen
// individually (but not together) with p_compose; each individually-unseen
// value multiplies in p_unseen_value. pair_penalty optionally scales down
// combinations whose value pair for a given factor pair never co-occurred in
// the plan. demo_saturation m0, when set, scales the exact branch by
// d/(d+m0) for the d demos collected at that entry; it is a heuristic
// placeholder for data-scale effects, and is labeled as such in emitted
// metadata. All parameters are user-supplied; outputs are never calibrated
// claims about any particular policy.
struct GeneralizationModel {
  double p_exact = 1.0;
  double p_compose = 1.0;
  double p_unseen_value = 1.0;
  std::map<std::pair<int, int>, double> pair_penalty;  // keys normalized i < j
  std::optional<double> demo_saturation;

  // Hard errors (out-of-range parameters) throw; ordering oddities
  // (p_exact < p_compose etc.) come back as warnings.
  std::vector<std::string> validate() const;
};

GeneralizationModel model_from_json(const nlohmann::json& doc, const FactorSpace& space);
nlohmann::json model_to_json(const GeneralizationModel& model, const FactorSpace& space);

enum class EvalMethod { kExact, kMonteCarlo };

struct EvaluationResult {
  Strategy strategy = Strategy::kNoVariation;
  int change_budget = 0;
  double expected_success = 0.0;
  // Mean restricted to the compositional set of the plan; empty when that
  // set is empty (or, under Monte Carlo, never sampled).
  std::optional<double> compositional_success;
  EvalMethod method = EvalMethod::kExact;
  std::uint64_t replicates = 0;                  // Monte Carlo sample count
  std::optional<double> standard_error;          // present iff Monte Carlo
  std::optional<double> compositional_standard_error;
  std::uint64_t compositional_samples = 0;
};

// Precomputed plan lookup tables for repeated success_prob queries.
class PlanEvaluator {
 public:
  PlanEvaluator(const GeneralizationModel& model, const CollectionPlan& plan);

  double success_prob(const FactorConfig& config) const;
  // True when every value of config was seen in the plan but config itself
  // was not.
  bool is_compositional(const FactorConfig& config) const;
  bool all_values_seen(const FactorConfig& config) const;

 private:
  GeneralizationModel model_;
  int num_factors_ = 0;
  std::map<FactorConfig, int> demos_by_config_;
  std::vector<std::set<int>> seen_values_;
  // Only pairs carrying a penalty are indexed.
  std::map<std::pair<int, int>, std::set<std::pair<int, int>>> seen_value_pairs_;
};

double success_prob(const GeneralizationModel& model, const CollectionPlan& plan,
                    const FactorConfig& config);

// Expected success under uniform p(f): exact enumeration (|F^N| capped at
// 1e6) or seeded Monte Carlo with standard error. Also reports the mean over
// the plan's compositional set (exact: full restricted mean; Monte Carlo:
// mean over the sampled configs that landed in the set).
EvaluationResult expected_objective(const GeneralizationModel& model,
                                    const CollectionPlan& plan,
                                    const FactorSpace& space, EvalMethod method,
                                    std::uint64_t n_samples, std::uint64_t seed);

struct StrategyComparisonRow {
  Strategy strategy = Strategy::kNoVariation;
  int change_budget = 0;
  int seed_count = 0;
  double mean_success = 0.0;
  double stderr_success = 0.0;  // across seeds; 0 for a single seed
  std::optional<double> mean_compositional;
  int total_demos = 0;
  int single_factor_index = -1;  // >= 0 only for single_factor rows
};

// Generates plan_at_rate for every (strategy, budget, seed) cell, evaluates
// it, and aggregates across seeds. Each cell evaluates with an RNG stream
// derived from (seed, cell index), so results do not depend on evaluation
// order. Rows are sorted by (strategy, budget).
std::vector<StrategyComparisonRow> compare_strategies(
    const FactorSpace& space, const GeneralizationModel& model,
    const std::vector<int>& budgets, int total_demos,
    const std::vector<Strategy>& strategies,
    const std::vector<std::uint64_t>& seeds, EvalMethod method,
    std::uint64_t n_samples);

// CSV: strategy,budget,seed_count,mean,stderr,compositional_mean, preceded
// by '#' metadata lines (model parameters, sampling method).
std::string comparison_csv(const std::vector<StrategyComparisonRow>& rows,
                           const GeneralizationModel& model,
                           const FactorSpace& space, EvalMethod method,
                           std::uint64_t n_samples);

}  // namespace factorplan
