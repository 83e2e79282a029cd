#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factorplan/factor_space.hpp"
#include "factorplan/strategies.hpp"

namespace factorplan {

enum class MetricKind {
  kEuclidean,          // L2 over embedding vectors
  kQuaternionAngular,  // 2*acos(min(1, |dot|)), double-cover safe
  kDiscrete,           // 0 if same id, 1 otherwise
};

std::string to_string(MetricKind kind);
MetricKind metric_from_string(const std::string& name);

// Throws if the required embedding is missing, dimensions mismatch, or a
// quaternion is not unit within 1e-9.
double value_distance(const FactorValue& a, const FactorValue& b, MetricKind metric);

struct MedoidSelection {
  std::vector<int> chosen;  // ascending value indices
  double objective = 0.0;   // sum of distances to nearest medoid
};

enum class KMedoidsMode { kExact, kPam };

// Picks k_prime of the values minimizing total distance to the nearest
// chosen value. Exact mode searches all subsets (refused above 20 values)
// and breaks ties by lexicographically smallest index set. PAM is the
// classic build-then-swap heuristic taking the best improving swap per
// pass; build ties are broken by the seeded stream. forced_member, when
// set, is always part of the selection and counts toward k_prime.
MedoidSelection kmedoids(const std::vector<FactorValue>& values, int k_prime,
                         MetricKind metric, KMedoidsMode mode, std::uint64_t seed,
                         std::optional<int> forced_member = std::nullopt);

struct SelectionResult {
  FactorSpace reduced;
  std::vector<MedoidSelection> per_factor;  // indices into the original space
  std::vector<MetricKind> metrics;
  int values_per_factor = 0;  // k' before per-factor clamping
};

// Shrinks each factor's value list to the k' = floor-split value count the
// change budget admits for the strategy, keeping the k-medoids selection
// under that factor's metric. The base value is always retained and counts
// toward k'. Factors already within budget are untouched.
SelectionResult select_values_for_budget(const FactorSpace& space, Strategy strategy,
                                         int change_budget,
                                         const std::vector<MetricKind>& metrics,
                                         std::uint64_t seed = 0);

// Per-factor value count admitted by the budget for the strategy (before
// clamping to each factor's actual k_i).
int values_per_factor_for_budget(Strategy strategy, const FactorSpace& space,
                                 int change_budget);

std::string selection_report_text(const FactorSpace& original,
                                  const SelectionResult& result);

}  // namespace factorplan
