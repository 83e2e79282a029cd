#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorplan/strategies.hpp"

namespace factorplan {

// Factor-change effort of a plan under the declared accounting convention:
// the initial configuration costs N changes, then each further entry costs 1
// for Stair/L/SingleFactor/NoVariation/Complete and N for Diagonal/Random
// (all factors resampled). hamming_total is the measured counterpart,
// N + sum of consecutive entry differences; the two bracket the true effort
// (declared undercounts L's returns to base, overcounts Random's accidental
// repeats).
struct CostLedger {
  int initial_changes = 0;                // = N
  std::vector<int> per_entry_changes;     // cost of reaching each entry after the first
  int declared_total = 0;
  int hamming_total = 0;
};

CostLedger declared_cost(const CollectionPlan& plan);
int hamming_cost(const CollectionPlan& plan);

// Largest entry count whose declared cost fits the budget:
//   budget - N + 1 for unit-cost strategies,
//   (budget - N) / N + 1 for Diagonal/Random,
// capped at the strategy's maximum entry count over the space.
// Throws if budget < N.
std::uint64_t configs_for_budget(Strategy strategy, const FactorSpace& space,
                                 int change_budget);

// Maximum entries a strategy can produce over a space (deduped sequence
// length). For SingleFactor, which depends on an unspecified factor, this is
// the largest per-factor value count.
std::uint64_t max_entries(Strategy strategy, const FactorSpace& space);

// Even split of total_demos over num_entries, remainder on the last entry.
// Throws if some entry would get zero demos.
std::vector<int> allocate_demos(int num_entries, int total_demos);

// Nominal O(k^N) change figure for covering all of F^N, reported alongside
// the convention total for Complete (the two differ by N - 1).
std::uint64_t nominal_complete_changes(const FactorSpace& space);

// CSV cost report: strategy,entries,declared_total,hamming_total,budget.
std::string cost_report_csv(const CollectionPlan& plan,
                            std::optional<int> budget = std::nullopt);

}  // namespace factorplan
