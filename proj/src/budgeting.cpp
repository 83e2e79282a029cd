#include "factorplan/budgeting.hpp"

#include <algorithm>
#include <sstream>

#include "factorplan/errors.hpp"
#include "factorplan/text_util.hpp"

namespace factorplan {

namespace {

// Declared change cost of moving to one more configuration: resampling
// strategies pay for all N factors, everything else pays a single change.
int per_entry_cost(Strategy strategy, int num_factors) {
  switch (strategy) {
    case Strategy::kDiagonal:
    case Strategy::kRandom:
      return num_factors;
    default:
      return 1;
  }
}

}  // namespace

CostLedger declared_cost(const CollectionPlan& plan) {
  if (plan.entries.empty()) {
    throw ValidationError("declared_cost: plan has no entries");
  }
  const int n = plan.num_factors();
  CostLedger ledger;
  ledger.initial_changes = n;
  const int step = per_entry_cost(plan.strategy, n);
  ledger.per_entry_changes.assign(plan.entries.size() - 1, step);
  ledger.declared_total = n + step * static_cast<int>(plan.entries.size() - 1);
  ledger.hamming_total = hamming_cost(plan);
  return ledger;
}

int hamming_cost(const CollectionPlan& plan) {
  if (plan.entries.empty()) {
    throw ValidationError("hamming_cost: plan has no entries");
  }
  int total = plan.num_factors();
  for (std::size_t i = 1; i < plan.entries.size(); ++i) {
    total += hamming_distance(plan.entries[i - 1].config, plan.entries[i].config);
  }
  return total;
}

std::uint64_t max_entries(Strategy strategy, const FactorSpace& space) {
  switch (strategy) {
    case Strategy::kNoVariation:
      return 1;
    case Strategy::kSingleFactor: {
      int best = 0;
      for (const FactorDef& factor : space.factors()) {
        best = std::max(best, factor.num_values());
      }
      return static_cast<std::uint64_t>(best);
    }
    case Strategy::kDiagonal: {
      if (!space.has_equal_value_counts()) {
        throw ValidationError(
            "diagonal requires every factor to have the same number of values");
      }
      return static_cast<std::uint64_t>(space.factor(0).num_values());
    }
    case Strategy::kL:
    case Strategy::kStair: {
      // Deduped sequence length: f* plus every non-base value once.
      std::uint64_t total = 1;
      for (const FactorDef& factor : space.factors()) {
        total += static_cast<std::uint64_t>(factor.num_values() - 1);
      }
      return total;
    }
    case Strategy::kComplete:
    case Strategy::kRandom: {
      std::uint64_t count = 1;
      for (const FactorDef& factor : space.factors()) {
        const auto k = static_cast<std::uint64_t>(factor.num_values());
        if (count > UINT64_MAX / k) return UINT64_MAX;
        count *= k;
      }
      return count;
    }
  }
  return 0;
}

std::uint64_t configs_for_budget(Strategy strategy, const FactorSpace& space,
                                 int change_budget) {
  const int n = space.num_factors();
  if (change_budget < n) {
    std::ostringstream msg;
    msg << "change budget " << change_budget << " is below the initial setup cost of "
        << n << " changes";
    throw ValidationError(msg.str());
  }
  const int step = per_entry_cost(strategy, n);
  const std::uint64_t affordable =
      1 + static_cast<std::uint64_t>((change_budget - n) / step);
  return std::min(affordable, max_entries(strategy, space));
}

std::vector<int> allocate_demos(int num_entries, int total_demos) {
  if (num_entries < 1) {
    throw ValidationError("allocate_demos: need at least one entry");
  }
  if (total_demos < num_entries) {
    std::ostringstream msg;
    msg << "cannot allocate " << total_demos << " demos over " << num_entries
        << " entries without an empty entry";
    throw ValidationError(msg.str());
  }
  const int per_entry = total_demos / num_entries;
  std::vector<int> demos(static_cast<std::size_t>(num_entries), per_entry);
  demos.back() = total_demos - per_entry * (num_entries - 1);
  return demos;
}

std::uint64_t nominal_complete_changes(const FactorSpace& space) {
  return max_entries(Strategy::kComplete, space);
}

std::string cost_report_csv(const CollectionPlan& plan, std::optional<int> budget) {
  const CostLedger ledger = declared_cost(plan);
  std::ostringstream out;
  out << "strategy,entries,declared_total,hamming_total,budget\n";
  out << to_string(plan.strategy) << ',' << plan.entries.size() << ','
      << ledger.declared_total << ',' << ledger.hamming_total << ','
      << (budget ? std::to_string(*budget) : "") << '\n';
  return out.str();
}

}  // namespace factorplan
