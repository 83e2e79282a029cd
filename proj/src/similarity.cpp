#include "factorplan/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "factorplan/budgeting.hpp"
#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "factorplan/text_util.hpp"

namespace factorplan {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEuclidean: return "euclidean";
    case MetricKind::kQuaternionAngular: return "quaternion_angular";
    case MetricKind::kDiscrete: return "discrete";
  }
  return "?";
}

MetricKind metric_from_string(const std::string& name) {
  if (name == "euclidean") return MetricKind::kEuclidean;
  if (name == "quaternion_angular" || name == "quaternion") {
    return MetricKind::kQuaternionAngular;
  }
  if (name == "discrete") return MetricKind::kDiscrete;
  throw ValidationError("unknown metric '" + name +
                        "' (expected euclidean, quaternion_angular, or discrete)");
}

double value_distance(const FactorValue& a, const FactorValue& b, MetricKind metric) {
  switch (metric) {
    case MetricKind::kDiscrete:
      return a.id == b.id ? 0.0 : 1.0;
    case MetricKind::kEuclidean: {
      if (!a.embedding || !b.embedding) {
        throw ValidationError("euclidean distance requires embeddings on both values ('" +
                              a.id + "', '" + b.id + "')");
      }
      if (a.embedding->size() != b.embedding->size()) {
        std::ostringstream msg;
        msg << "embedding dimension mismatch between '" << a.id << "' ("
            << a.embedding->size() << ") and '" << b.id << "' (" << b.embedding->size()
            << ")";
        throw ValidationError(msg.str());
      }
      double sum = 0.0;
      for (std::size_t d = 0; d < a.embedding->size(); ++d) {
        const double diff = (*a.embedding)[d] - (*b.embedding)[d];
        sum += diff * diff;
      }
      return std::sqrt(sum);
    }
    case MetricKind::kQuaternionAngular: {
      if (!a.quaternion || !b.quaternion) {
        throw ValidationError("quaternion distance requires quaternions on both values ('" +
                              a.id + "', '" + b.id + "')");
      }
      for (const FactorValue* value : {&a, &b}) {
        const auto& q = *value->quaternion;
        const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if (std::abs(norm - 1.0) > 1e-9) {
          throw ValidationError("value '" + value->id + "': quaternion is not unit length");
        }
      }
      const auto& qa = *a.quaternion;
      const auto& qb = *b.quaternion;
      // Same rotation up to sign is exactly zero; acos of a rounded dot
      // product would report ~1e-8 even for identical inputs.
      bool same = true, negated = true;
      for (int d = 0; d < 4; ++d) {
        same = same && qa[d] == qb[d];
        negated = negated && qa[d] == -qb[d];
      }
      if (same || negated) return 0.0;
      double dot = 0.0;
      for (int d = 0; d < 4; ++d) dot += qa[d] * qb[d];
      // |dot| folds q and -q together (same rotation).
      return 2.0 * std::acos(std::min(1.0, std::abs(dot)));
    }
  }
  return 0.0;
}

namespace {

std::vector<double> distance_matrix(const std::vector<FactorValue>& values,
                                    MetricKind metric) {
  const std::size_t n = values.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = value_distance(values[i], values[j], metric);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  return dist;
}

double selection_objective(const std::vector<double>& dist, std::size_t n,
                           const std::vector<int>& chosen) {
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (const int m : chosen) {
      best = std::min(best, dist[p * n + static_cast<std::size_t>(m)]);
    }
    total += best;
  }
  return total;
}

MedoidSelection exact_kmedoids(const std::vector<double>& dist, std::size_t n, int k,
                               std::optional<int> forced) {
  // Lexicographic subset enumeration; strict improvement keeps the first
  // (lexicographically smallest) optimum.
  std::vector<int> subset(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;

  MedoidSelection best;
  best.objective = std::numeric_limits<double>::infinity();
  while (true) {
    const bool admissible =
        !forced || std::find(subset.begin(), subset.end(), *forced) != subset.end();
    if (admissible) {
      const double objective = selection_objective(dist, n, subset);
      if (objective < best.objective) {
        best.objective = objective;
        best.chosen = subset;
      }
    }
    // Advance to the next combination.
    int pos = k - 1;
    while (pos >= 0 &&
           subset[static_cast<std::size_t>(pos)] == static_cast<int>(n) - k + pos) {
      --pos;
    }
    if (pos < 0) break;
    ++subset[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i) {
      subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return best;
}

// SWAP phase: repeatedly take the best improving (medoid, candidate) swap
// until none improves. forced medoids never leave.
MedoidSelection swap_descent(const std::vector<double>& dist, std::size_t n,
                             std::vector<int> chosen, std::optional<int> forced) {
  std::vector<bool> is_medoid(n, false);
  for (const int m : chosen) is_medoid[static_cast<std::size_t>(m)] = true;
  double current = selection_objective(dist, n, chosen);
  while (true) {
    double best_objective = current;
    std::size_t best_mi = 0;
    std::size_t best_h = 0;
    for (std::size_t mi = 0; mi < chosen.size(); ++mi) {
      if (forced && chosen[mi] == *forced) continue;
      const int old_medoid = chosen[mi];
      for (std::size_t h = 0; h < n; ++h) {
        if (is_medoid[h]) continue;
        chosen[mi] = static_cast<int>(h);
        const double objective = selection_objective(dist, n, chosen);
        if (objective < best_objective - 1e-12) {
          best_objective = objective;
          best_mi = mi;
          best_h = h;
        }
      }
      chosen[mi] = old_medoid;
    }
    if (best_objective >= current - 1e-12) break;
    is_medoid[static_cast<std::size_t>(chosen[best_mi])] = false;
    is_medoid[best_h] = true;
    chosen[best_mi] = static_cast<int>(best_h);
    current = best_objective;
  }
  MedoidSelection result;
  result.chosen = std::move(chosen);
  std::sort(result.chosen.begin(), result.chosen.end());
  result.objective = current;
  return result;
}

constexpr int kPamRestarts = 6;

MedoidSelection pam_kmedoids(const std::vector<double>& dist, std::size_t n, int k,
                             std::optional<int> forced, std::uint64_t seed) {
  SplitMix64 rng(seed);

  // BUILD: greedily add the candidate with the largest objective decrease,
  // breaking exact ties through the seeded stream.
  std::vector<int> chosen;
  std::vector<bool> is_medoid(n, false);
  if (forced) {
    chosen.push_back(*forced);
    is_medoid[static_cast<std::size_t>(*forced)] = true;
  }
  while (static_cast<int>(chosen.size()) < k) {
    double best_objective = std::numeric_limits<double>::infinity();
    std::vector<int> ties;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      chosen.push_back(static_cast<int>(c));
      const double objective = selection_objective(dist, n, chosen);
      chosen.pop_back();
      if (objective < best_objective) {
        best_objective = objective;
        ties.assign(1, static_cast<int>(c));
      } else if (objective == best_objective) {
        ties.push_back(static_cast<int>(c));
      }
    }
    const int pick = ties[static_cast<std::size_t>(rng.next_below(ties.size()))];
    chosen.push_back(pick);
    is_medoid[static_cast<std::size_t>(pick)] = true;
  }

  MedoidSelection best = swap_descent(dist, n, chosen, forced);

  // The greedy start lands in a poor basin now and then; a few seeded random
  // starts make the descent reliable at the value-list sizes this runs on.
  for (int restart = 0; restart < kPamRestarts; ++restart) {
    std::vector<int> pool;
    for (std::size_t c = 0; c < n; ++c) {
      if (!forced || static_cast<int>(c) != *forced) pool.push_back(static_cast<int>(c));
    }
    shuffle(pool, rng);
    std::vector<int> start;
    if (forced) start.push_back(*forced);
    for (int c = 0; static_cast<int>(start.size()) < k; ++c) start.push_back(pool[static_cast<std::size_t>(c)]);
    const MedoidSelection candidate = swap_descent(dist, n, std::move(start), forced);
    if (candidate.objective < best.objective - 1e-12) best = candidate;
  }
  return best;
}

}  // namespace

MedoidSelection kmedoids(const std::vector<FactorValue>& values, int k_prime,
                         MetricKind metric, KMedoidsMode mode, std::uint64_t seed,
                         std::optional<int> forced_member) {
  const std::size_t n = values.size();
  if (k_prime < 1 || k_prime > static_cast<int>(n)) {
    std::ostringstream msg;
    msg << "k_prime " << k_prime << " out of range [1, " << n << "]";
    throw ValidationError(msg.str());
  }
  if (forced_member && (*forced_member < 0 || *forced_member >= static_cast<int>(n))) {
    throw ValidationError("forced member index out of range");
  }
  if (mode == KMedoidsMode::kExact && n > 20) {
    std::ostringstream msg;
    msg << "exact k-medoids refused for " << n << " values (subset search past 20 blows up)";
    throw ValidationError(msg.str());
  }
  const std::vector<double> dist = distance_matrix(values, metric);
  MedoidSelection result = mode == KMedoidsMode::kExact
                               ? exact_kmedoids(dist, n, k_prime, forced_member)
                               : pam_kmedoids(dist, n, k_prime, forced_member, seed);
  return result;
}

int values_per_factor_for_budget(Strategy strategy, const FactorSpace& space,
                                 int change_budget) {
  const int n = space.num_factors();
  const std::uint64_t entries = configs_for_budget(strategy, space, change_budget);
  std::uint64_t k_prime = 0;
  switch (strategy) {
    case Strategy::kL:
    case Strategy::kStair:
      // 1 + N(k'-1) entries cover k' values per factor.
      k_prime = (entries - 1) / static_cast<std::uint64_t>(n) + 1;
      break;
    case Strategy::kDiagonal:
    case Strategy::kRandom:
      k_prime = entries;
      break;
    case Strategy::kComplete: {
      // Largest t with t^N <= entries.
      k_prime = 1;
      while (true) {
        const std::uint64_t next = k_prime + 1;
        std::uint64_t power = 1;
        bool overflow = false;
        for (int i = 0; i < n; ++i) {
          if (power > entries / next) {
            overflow = true;
            break;
          }
          power *= next;
        }
        if (overflow || power > entries) break;
        k_prime = next;
      }
      break;
    }
    case Strategy::kNoVariation:
      k_prime = 1;
      break;
    case Strategy::kSingleFactor:
      throw ValidationError(
          "single_factor has no equal per-factor budget split; select values with "
          "another strategy");
  }
  int max_k = 0;
  for (const FactorDef& factor : space.factors()) {
    max_k = std::max(max_k, factor.num_values());
  }
  return static_cast<int>(std::min<std::uint64_t>(k_prime, static_cast<std::uint64_t>(max_k)));
}

SelectionResult select_values_for_budget(const FactorSpace& space, Strategy strategy,
                                         int change_budget,
                                         const std::vector<MetricKind>& metrics,
                                         std::uint64_t seed) {
  const int n = space.num_factors();
  if (static_cast<int>(metrics.size()) != n) {
    std::ostringstream msg;
    msg << "expected one metric per factor (" << n << "), got " << metrics.size();
    throw ValidationError(msg.str());
  }
  const int k_prime = values_per_factor_for_budget(strategy, space, change_budget);

  SelectionResult result{space, {}, metrics, k_prime};
  std::vector<FactorDef> reduced;
  for (int i = 0; i < n; ++i) {
    const FactorDef& factor = space.factor(i);
    const int target = std::min(k_prime, factor.num_values());
    MedoidSelection selection;
    if (target == factor.num_values()) {
      for (int v = 0; v < factor.num_values(); ++v) selection.chosen.push_back(v);
      selection.objective = 0.0;
    } else {
      const KMedoidsMode mode =
          factor.num_values() <= 20 ? KMedoidsMode::kExact : KMedoidsMode::kPam;
      selection = kmedoids(factor.values, target, metrics[static_cast<std::size_t>(i)],
                           mode, mix_seed(seed, static_cast<std::uint64_t>(i)),
                           factor.base_index);
    }
    FactorDef def;
    def.name = factor.name;
    for (const int v : selection.chosen) {
      def.values.push_back(factor.values[static_cast<std::size_t>(v)]);
      if (v == factor.base_index) {
        def.base_index = static_cast<int>(def.values.size()) - 1;
      }
    }
    reduced.push_back(std::move(def));
    result.per_factor.push_back(std::move(selection));
  }
  result.reduced = FactorSpace(space.name(), std::move(reduced));
  return result;
}

std::string selection_report_text(const FactorSpace& original,
                                  const SelectionResult& result) {
  std::ostringstream out;
  out << "space: " << original.name() << ", values per factor under budget: "
      << result.values_per_factor << "\n";
  for (int i = 0; i < original.num_factors(); ++i) {
    const auto& selection = result.per_factor[static_cast<std::size_t>(i)];
    out << "factor " << original.factor(i).name << " ["
        << to_string(result.metrics[static_cast<std::size_t>(i)]) << "]: kept";
    for (const int v : selection.chosen) {
      out << ' ' << original.factor(i).values[static_cast<std::size_t>(v)].id;
    }
    out << " (objective " << format_double(selection.objective) << ")\n";
  }
  return out.str();
}

}  // namespace factorplan
