#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "factorplan/factor_space.hpp"

namespace factorplan {

struct CoverageReport {
  std::vector<double> per_factor_value_coverage;      // |seen_i| / k_i
  std::vector<std::set<std::string>> values_seen;     // per factor, value ids
  std::set<FactorConfig> combos_seen;
  // Fraction of (factor-pair, value-pair) cells seen over all pairs i < j;
  // 1.0 when N = 1 (no pairs).
  double pair_coverage = 0.0;
  std::uint64_t compositional_count = 0;  // unseen combos with every value seen
  std::uint64_t total_combos = 0;
};

CoverageReport coverage_report(const std::vector<FactorConfig>& configs,
                               const FactorSpace& space);

// The combinations whose every individual value appears in the input but
// which are not themselves in the input, in lexicographic order. Materializes
// the result; guarded against blowup past 1e7 entries.
std::vector<FactorConfig> compositional_set(const std::vector<FactorConfig>& configs,
                                            const FactorSpace& space);

// The (k_i - 1) x (k_j - 1) evaluation block for a factor pair: non-base
// values for i and j, base values elsewhere, row-major by factor i's value
// order.
std::vector<FactorConfig> pairwise_grid(const FactorSpace& space, int factor_i,
                                        int factor_j);

// n >= |F^N|: every combination exactly once, enumeration order. Otherwise n
// distinct uniform samples without replacement, seeded.
std::vector<FactorConfig> eval_sample(const FactorSpace& space, std::uint64_t n,
                                      std::uint64_t seed);

std::string coverage_report_text(const CoverageReport& report, const FactorSpace& space);
std::string coverage_report_csv(const CoverageReport& report, const FactorSpace& space);

}  // namespace factorplan
