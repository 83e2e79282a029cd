#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factorplan/factor_space.hpp"

namespace factorplan {

// The seven collection strategies. Complete covers all of F^N; Random
// resamples whole combinations without replacement; SingleFactor sweeps one
// factor; Diagonal pairs fresh values across factors; L sweeps each factor
// from the base combination; Stair cycles one factor at a time; NoVariation
// stays at the base combination.
enum class Strategy {
  kComplete,
  kRandom,
  kSingleFactor,
  kDiagonal,
  kL,
  kStair,
  kNoVariation,
};

constexpr Strategy kAllStrategies[] = {
    Strategy::kComplete, Strategy::kRandom,  Strategy::kSingleFactor,
    Strategy::kDiagonal, Strategy::kL,       Strategy::kStair,
    Strategy::kNoVariation,
};

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct PlanEntry {
  FactorConfig config;
  int demos = 0;
};

// An ordered sequence of configurations with demonstration counts, plus the
// metadata needed to reproduce it.
struct CollectionPlan {
  Strategy strategy = Strategy::kNoVariation;
  std::uint64_t seed = 0;
  std::string space_name;
  std::string space_hash;
  bool deduped = true;
  std::vector<PlanEntry> entries;

  int num_factors() const {
    return entries.empty() ? 0 : entries.front().config.size();
  }
  int total_demos() const;
  std::vector<FactorConfig> configs() const;
};

struct GeneratePlanParams {
  std::optional<int> factor_index;            // required for SingleFactor
  std::optional<std::uint64_t> num_configs;   // required for Random
  bool dedupe = true;
};

// Generates the full plan for a strategy. Value orderings within each factor
// are permuted by seed before the strategy pattern is applied; for L, Stair
// and SingleFactor the base value is pinned first so the sequence starts at
// f*. With dedupe set, repeated configs (the first Stair cycle's copies of
// f*, each L sweep's base entry) are merged in first-occurrence order.
// Demos are split evenly across entries with the remainder on the last.
CollectionPlan generate_plan(const FactorSpace& space, Strategy strategy,
                             const GeneratePlanParams& params, int total_demos,
                             std::uint64_t seed);

// Budget-rate-limited variant: keeps the first configs_for_budget(strategy,
// space, change_budget) entries of the seeded full-strategy sequence (for
// Random, that many fresh samples). The resulting declared cost never
// exceeds change_budget.
CollectionPlan plan_at_rate(const FactorSpace& space, Strategy strategy,
                            int change_budget, int total_demos,
                            std::uint64_t seed,
                            std::optional<int> factor_index = std::nullopt);

// --- Plan documents (JSON) -------------------------------------------------
//
// {"strategy", "seed", "deduped", "space": {"name", "spec_hash"},
//  "entries": [{"config": {<factor>: <value id>, ...}, "demos": n}, ...],
//  "declared_cost", "hamming_cost"}
// Entry order is significant and preserved.

nlohmann::json plan_to_json(const CollectionPlan& plan, const FactorSpace& space);
CollectionPlan plan_from_json(const nlohmann::json& doc, const FactorSpace& space);

// Loads a plan with no space document at hand, reconstructing a skeleton
// space from the configs in the file (factor names sorted, value lists as
// observed, base unknown). Enough for cost accounting and session stepping;
// not suitable for coverage against the real domain.
struct StandalonePlan {
  CollectionPlan plan;
  FactorSpace space;
};
StandalonePlan plan_from_json_standalone(const nlohmann::json& doc);

}  // namespace factorplan
