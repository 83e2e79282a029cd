#include "factorplan/coverage.hpp"

#include <algorithm>
#include <sstream>

#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "factorplan/text_util.hpp"

namespace factorplan {

namespace {

constexpr std::uint64_t kCompositionalGuard = 10'000'000ULL;

std::vector<std::set<int>> seen_values_per_factor(const std::vector<FactorConfig>& configs,
                                                  const FactorSpace& space) {
  std::vector<std::set<int>> seen(static_cast<std::size_t>(space.num_factors()));
  for (const FactorConfig& config : configs) {
    for (int i = 0; i < space.num_factors(); ++i) {
      seen[static_cast<std::size_t>(i)].insert(config[i]);
    }
  }
  return seen;
}

}  // namespace

CoverageReport coverage_report(const std::vector<FactorConfig>& configs,
                               const FactorSpace& space) {
  for (const FactorConfig& config : configs) space.validate_config(config);
  const int n = space.num_factors();

  CoverageReport report;
  report.total_combos = space.combination_count();
  report.combos_seen.insert(configs.begin(), configs.end());

  const auto seen = seen_values_per_factor(configs, space);
  std::uint64_t seen_product = 1;
  bool product_overflow = false;
  for (int i = 0; i < n; ++i) {
    const auto& values = seen[static_cast<std::size_t>(i)];
    report.per_factor_value_coverage.push_back(
        static_cast<double>(values.size()) / space.factor(i).num_values());
    std::set<std::string> ids;
    for (const int v : values) {
      ids.insert(space.factor(i).values[static_cast<std::size_t>(v)].id);
    }
    report.values_seen.push_back(std::move(ids));
    if (!values.empty() &&
        seen_product > UINT64_MAX / static_cast<std::uint64_t>(values.size())) {
      product_overflow = true;
    } else {
      seen_product *= static_cast<std::uint64_t>(values.size());
    }
  }
  if (configs.empty()) seen_product = 0;
  if (product_overflow) {
    throw ValidationError("coverage_report: compositional count overflows 64 bits");
  }
  // Every seen combo has all of its values seen, so the difference is exact.
  report.compositional_count = seen_product - report.combos_seen.size();

  // Pair coverage over unordered factor pairs, counted once (i < j).
  std::uint64_t cells_total = 0;
  std::uint64_t cells_seen = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      cells_total += static_cast<std::uint64_t>(space.factor(i).num_values()) *
                     static_cast<std::uint64_t>(space.factor(j).num_values());
      std::set<std::pair<int, int>> pairs;
      for (const FactorConfig& config : report.combos_seen) {
        pairs.insert({config[i], config[j]});
      }
      cells_seen += pairs.size();
    }
  }
  report.pair_coverage =
      cells_total == 0 ? 1.0 : static_cast<double>(cells_seen) / static_cast<double>(cells_total);
  return report;
}

std::vector<FactorConfig> compositional_set(const std::vector<FactorConfig>& configs,
                                            const FactorSpace& space) {
  for (const FactorConfig& config : configs) space.validate_config(config);
  const int n = space.num_factors();
  const std::set<FactorConfig> seen_combos(configs.begin(), configs.end());
  const auto seen = seen_values_per_factor(configs, space);

  std::vector<std::vector<int>> seen_sorted;
  std::uint64_t product = configs.empty() ? 0 : 1;
  for (const auto& values : seen) {
    seen_sorted.emplace_back(values.begin(), values.end());
    if (!values.empty()) product *= static_cast<std::uint64_t>(values.size());
  }
  if (product > kCompositionalGuard) {
    std::ostringstream msg;
    msg << "compositional set would hold " << product - seen_combos.size()
        << " combinations; refusing to materialize past " << kCompositionalGuard;
    throw ValidationError(msg.str());
  }

  std::vector<FactorConfig> result;
  if (product == 0) return result;

  // Odometer over the seen-value lists, lexicographic in space value order.
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n), 0);
  FactorConfig config;
  config.assignment.assign(static_cast<std::size_t>(n), 0);
  while (true) {
    for (int i = 0; i < n; ++i) {
      config.assignment[static_cast<std::size_t>(i)] =
          seen_sorted[static_cast<std::size_t>(i)][cursor[static_cast<std::size_t>(i)]];
    }
    if (!seen_combos.contains(config)) result.push_back(config);
    int pos = n - 1;
    while (pos >= 0) {
      auto& c = cursor[static_cast<std::size_t>(pos)];
      if (++c < seen_sorted[static_cast<std::size_t>(pos)].size()) break;
      c = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return result;
}

std::vector<FactorConfig> pairwise_grid(const FactorSpace& space, int factor_i,
                                        int factor_j) {
  const int n = space.num_factors();
  if (factor_i < 0 || factor_i >= n || factor_j < 0 || factor_j >= n ||
      factor_i == factor_j) {
    std::ostringstream msg;
    msg << "pairwise_grid: invalid factor pair (" << factor_i << ", " << factor_j
        << ") for a space with " << n << " factors";
    throw ValidationError(msg.str());
  }
  std::vector<FactorConfig> grid;
  const FactorConfig base = space.base_config();
  for (int vi = 0; vi < space.factor(factor_i).num_values(); ++vi) {
    if (vi == space.factor(factor_i).base_index) continue;
    for (int vj = 0; vj < space.factor(factor_j).num_values(); ++vj) {
      if (vj == space.factor(factor_j).base_index) continue;
      FactorConfig config = base;
      config.assignment[static_cast<std::size_t>(factor_i)] = vi;
      config.assignment[static_cast<std::size_t>(factor_j)] = vj;
      grid.push_back(std::move(config));
    }
  }
  return grid;
}

std::vector<FactorConfig> eval_sample(const FactorSpace& space, std::uint64_t n,
                                      std::uint64_t seed) {
  if (n == 0) {
    throw ValidationError("eval_sample: n must be positive");
  }
  bool covers_space = false;
  std::uint64_t space_size = 0;
  try {
    space_size = space.combination_count();
    covers_space = n >= space_size;
  } catch (const ValidationError&) {
    covers_space = false;  // count overflows, any n is a strict subset
  }
  if (covers_space) {
    return enumerate_all(space);
  }
  SplitMix64 rng(seed);
  std::set<FactorConfig> seen;
  std::vector<FactorConfig> samples;
  while (samples.size() < n) {
    FactorConfig config;
    config.assignment.reserve(static_cast<std::size_t>(space.num_factors()));
    for (int i = 0; i < space.num_factors(); ++i) {
      config.assignment.push_back(static_cast<int>(
          rng.next_below(static_cast<std::uint64_t>(space.factor(i).num_values()))));
    }
    if (seen.insert(config).second) samples.push_back(std::move(config));
  }
  return samples;
}

std::string coverage_report_text(const CoverageReport& report, const FactorSpace& space) {
  std::ostringstream out;
  out << "space: " << space.name() << "\n";
  out << "combinations: " << report.total_combos << " total, "
      << report.combos_seen.size() << " seen, " << report.compositional_count
      << " compositional\n";
  out << "pair coverage: " << format_double(report.pair_coverage) << "\n";
  for (int i = 0; i < space.num_factors(); ++i) {
    const auto& ids = report.values_seen[static_cast<std::size_t>(i)];
    out << "factor " << space.factor(i).name << ": coverage "
        << format_double(report.per_factor_value_coverage[static_cast<std::size_t>(i)])
        << " (" << ids.size() << "/" << space.factor(i).num_values() << " values:";
    for (const std::string& id : ids) out << ' ' << id;
    out << ")\n";
  }
  return out.str();
}

std::string coverage_report_csv(const CoverageReport& report, const FactorSpace& space) {
  std::ostringstream out;
  out << "metric,factor,seen,total,fraction\n";
  for (int i = 0; i < space.num_factors(); ++i) {
    out << "value_coverage," << csv_field(space.factor(i).name) << ','
        << report.values_seen[static_cast<std::size_t>(i)].size() << ','
        << space.factor(i).num_values() << ','
        << format_double(report.per_factor_value_coverage[static_cast<std::size_t>(i)])
        << '\n';
  }
  out << "combo_coverage,," << report.combos_seen.size() << ',' << report.total_combos
      << ','
      << format_double(report.total_combos == 0
                           ? 0.0
                           : static_cast<double>(report.combos_seen.size()) /
                                 static_cast<double>(report.total_combos))
      << '\n';
  out << "pair_coverage,,,," << format_double(report.pair_coverage) << '\n';
  out << "compositional,," << report.compositional_count << ',' << report.total_combos
      << ','
      << format_double(report.total_combos == 0
                           ? 0.0
                           : static_cast<double>(report.compositional_count) /
                                 static_cast<double>(report.total_combos))
      << '\n';
  return out.str();
}

}  // namespace factorplan
