#include "factorplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "factorplan/budgeting.hpp"
#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"
#include "factorplan/text_util.hpp"

namespace factorplan {

namespace {

constexpr std::uint64_t kExactEnumerationCap = 1'000'000ULL;

void check_probability(double value, const std::string& name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream msg;
    msg << name << " must lie in [0, 1], got " << value;
    throw ValidationError(msg.str());
  }
}

}  // namespace

std::vector<std::string> GeneralizationModel::validate() const {
  check_probability(p_exact, "p_exact");
  check_probability(p_compose, "p_compose");
  check_probability(p_unseen_value, "p_unseen_value");
  for (const auto& [pair, multiplier] : pair_penalty) {
    std::ostringstream name;
    name << "pair_penalty[" << pair.first << "," << pair.second << "]";
    if (pair.first >= pair.second || pair.first < 0) {
      throw ValidationError(name.str() + ": pair keys must satisfy 0 <= i < j");
    }
    check_probability(multiplier, name.str());
  }
  if (demo_saturation && *demo_saturation < 0.0) {
    throw ValidationError("demo_saturation must be nonnegative");
  }
  std::vector<std::string> warnings;
  if (p_exact < p_compose) {
    warnings.push_back("p_exact < p_compose: seen combinations score below composed ones");
  }
  if (p_compose < p_unseen_value) {
    warnings.push_back("p_compose < p_unseen_value: unusual ordering");
  }
  return warnings;
}

PlanEvaluator::PlanEvaluator(const GeneralizationModel& model, const CollectionPlan& plan)
    : model_(model) {
  if (plan.entries.empty()) {
    throw ValidationError("cannot evaluate an empty plan");
  }
  model_.validate();
  num_factors_ = plan.num_factors();
  seen_values_.assign(static_cast<std::size_t>(num_factors_), {});
  for (const PlanEntry& entry : plan.entries) {
    demos_by_config_[entry.config] += entry.demos;
    for (int i = 0; i < num_factors_; ++i) {
      seen_values_[static_cast<std::size_t>(i)].insert(entry.config[i]);
    }
  }
  for (const auto& [pair, multiplier] : model_.pair_penalty) {
    (void)multiplier;
    if (pair.second >= num_factors_) {
      std::ostringstream msg;
      msg << "pair_penalty[" << pair.first << "," << pair.second
          << "]: factor index out of range for a plan with " << num_factors_ << " factors";
      throw ValidationError(msg.str());
    }
    auto& seen_pairs = seen_value_pairs_[pair];
    for (const auto& [config, demos] : demos_by_config_) {
      (void)demos;
      seen_pairs.insert({config[pair.first], config[pair.second]});
    }
  }
}

bool PlanEvaluator::all_values_seen(const FactorConfig& config) const {
  for (int i = 0; i < num_factors_; ++i) {
    if (!seen_values_[static_cast<std::size_t>(i)].contains(config[i])) return false;
  }
  return true;
}

bool PlanEvaluator::is_compositional(const FactorConfig& config) const {
  return !demos_by_config_.contains(config) && all_values_seen(config);
}

double PlanEvaluator::success_prob(const FactorConfig& config) const {
  if (config.size() != num_factors_) {
    std::ostringstream msg;
    msg << "config has " << config.size() << " factors, plan has " << num_factors_;
    throw ValidationError(msg.str());
  }
  const auto exact = demos_by_config_.find(config);
  if (exact != demos_by_config_.end()) {
    double p = model_.p_exact;
    if (model_.demo_saturation) {
      const double d = exact->second;
      p *= d / (d + *model_.demo_saturation);
    }
    return p;
  }
  double penalty = 1.0;
  for (const auto& [pair, multiplier] : model_.pair_penalty) {
    const auto& seen_pairs = seen_value_pairs_.at(pair);
    if (!seen_pairs.contains({config[pair.first], config[pair.second]})) {
      penalty *= multiplier;
    }
  }
  int unseen = 0;
  for (int i = 0; i < num_factors_; ++i) {
    if (!seen_values_[static_cast<std::size_t>(i)].contains(config[i])) ++unseen;
  }
  double p = model_.p_compose * penalty;
  if (unseen > 0) p *= std::pow(model_.p_unseen_value, unseen);
  return p;
}

double success_prob(const GeneralizationModel& model, const CollectionPlan& plan,
                    const FactorConfig& config) {
  return PlanEvaluator(model, plan).success_prob(config);
}

EvaluationResult expected_objective(const GeneralizationModel& model,
                                    const CollectionPlan& plan, const FactorSpace& space,
                                    EvalMethod method, std::uint64_t n_samples,
                                    std::uint64_t seed) {
  for (const PlanEntry& entry : plan.entries) space.validate_config(entry.config);
  const PlanEvaluator evaluator(model, plan);

  EvaluationResult result;
  result.strategy = plan.strategy;
  result.method = method;

  if (method == EvalMethod::kExact) {
    const std::uint64_t count = space.combination_count();
    if (count > kExactEnumerationCap) {
      std::ostringstream msg;
      msg << "exact evaluation needs |F^N| <= " << kExactEnumerationCap << ", space has "
          << count;
      throw ValidationError(msg.str());
    }
    double sum = 0.0;
    double compositional_sum = 0.0;
    std::uint64_t compositional_count = 0;
    for_each_config(space, [&](const FactorConfig& config) {
      const double p = evaluator.success_prob(config);
      sum += p;
      if (evaluator.is_compositional(config)) {
        compositional_sum += p;
        ++compositional_count;
      }
    });
    result.expected_success = sum / static_cast<double>(count);
    result.compositional_samples = compositional_count;
    if (compositional_count > 0) {
      result.compositional_success =
          compositional_sum / static_cast<double>(compositional_count);
    }
    return result;
  }

  if (n_samples < 2) {
    throw ValidationError("monte_carlo needs at least 2 samples");
  }
  SplitMix64 rng(seed);
  double sum = 0.0;
  double sum_squares = 0.0;
  double compositional_sum = 0.0;
  double compositional_squares = 0.0;
  std::uint64_t compositional_count = 0;
  FactorConfig config;
  config.assignment.assign(static_cast<std::size_t>(space.num_factors()), 0);
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    for (int i = 0; i < space.num_factors(); ++i) {
      config.assignment[static_cast<std::size_t>(i)] = static_cast<int>(
          rng.next_below(static_cast<std::uint64_t>(space.factor(i).num_values())));
    }
    const double p = evaluator.success_prob(config);
    sum += p;
    sum_squares += p * p;
    if (evaluator.is_compositional(config)) {
      compositional_sum += p;
      compositional_squares += p * p;
      ++compositional_count;
    }
  }
  const auto n = static_cast<double>(n_samples);
  result.expected_success = sum / n;
  result.replicates = n_samples;
  const double variance =
      std::max(0.0, (sum_squares - n * result.expected_success * result.expected_success) /
                        (n - 1.0));
  result.standard_error = std::sqrt(variance / n);
  result.compositional_samples = compositional_count;
  if (compositional_count > 0) {
    const auto cn = static_cast<double>(compositional_count);
    const double cmean = compositional_sum / cn;
    result.compositional_success = cmean;
    if (compositional_count > 1) {
      const double cvar =
          std::max(0.0, (compositional_squares - cn * cmean * cmean) / (cn - 1.0));
      result.compositional_standard_error = std::sqrt(cvar / cn);
    }
  }
  return result;
}

std::vector<StrategyComparisonRow> compare_strategies(
    const FactorSpace& space, const GeneralizationModel& model,
    const std::vector<int>& budgets, int total_demos,
    const std::vector<Strategy>& strategies, const std::vector<std::uint64_t>& seeds,
    EvalMethod method, std::uint64_t n_samples) {
  if (seeds.empty()) {
    throw ValidationError("compare_strategies needs at least one seed");
  }
  if (budgets.empty()) {
    throw ValidationError("compare_strategies needs at least one budget");
  }
  model.validate();

  // Expand single_factor into one cell group per factor; other strategies
  // get a single group with no factor index.
  struct CellGroup {
    Strategy strategy;
    std::optional<int> factor_index;
  };
  std::vector<CellGroup> groups;
  for (const Strategy strategy : strategies) {
    if (strategy == Strategy::kSingleFactor) {
      for (int i = 0; i < space.num_factors(); ++i) {
        groups.push_back({strategy, i});
      }
    } else {
      groups.push_back({strategy, std::nullopt});
    }
  }

  std::vector<StrategyComparisonRow> rows;
  std::uint64_t cell_index = 0;
  for (const CellGroup& group : groups) {
    for (const int budget : budgets) {
      StrategyComparisonRow row;
      row.strategy = group.strategy;
      row.change_budget = budget;
      row.total_demos = total_demos;
      row.seed_count = static_cast<int>(seeds.size());

      std::vector<double> means;
      std::vector<double> compositional_means;
      for (const std::uint64_t seed : seeds) {
        const CollectionPlan plan = plan_at_rate(space, group.strategy, budget,
                                                 total_demos, seed, group.factor_index);
        // Derived per-cell stream: results do not depend on evaluation order.
        const std::uint64_t eval_seed = mix_seed(seed, cell_index);
        const EvaluationResult eval =
            expected_objective(model, plan, space, method, n_samples, eval_seed);
        means.push_back(eval.expected_success);
        if (eval.compositional_success) {
          compositional_means.push_back(*eval.compositional_success);
        }
      }
      ++cell_index;

      double sum = 0.0;
      for (const double m : means) sum += m;
      row.mean_success = sum / static_cast<double>(means.size());
      if (means.size() > 1) {
        double ss = 0.0;
        for (const double m : means) ss += (m - row.mean_success) * (m - row.mean_success);
        row.stderr_success = std::sqrt(ss / static_cast<double>(means.size() - 1)) /
                             std::sqrt(static_cast<double>(means.size()));
      }
      if (!compositional_means.empty()) {
        double csum = 0.0;
        for (const double m : compositional_means) csum += m;
        row.mean_compositional = csum / static_cast<double>(compositional_means.size());
      }
      if (group.factor_index) row.single_factor_index = *group.factor_index;
      rows.push_back(std::move(row));
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const StrategyComparisonRow& a, const StrategyComparisonRow& b) {
              return std::tie(a.strategy, a.single_factor_index, a.change_budget) <
                     std::tie(b.strategy, b.single_factor_index, b.change_budget);
            });
  return rows;
}

GeneralizationModel model_from_json(const nlohmann::json& doc, const FactorSpace& space) {
  using nlohmann::json;
  if (!doc.is_object()) {
    throw ValidationError("model: expected a JSON object");
  }
  static const std::set<std::string> known = {"p_exact", "p_compose", "p_unseen_value",
                                              "pair_penalties", "demo_saturation"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ValidationError("model: unknown field '" + it.key() + "'");
    }
  }
  GeneralizationModel model;
  for (const auto& [key, target] : std::initializer_list<std::pair<const char*, double*>>{
           {"p_exact", &model.p_exact},
           {"p_compose", &model.p_compose},
           {"p_unseen_value", &model.p_unseen_value}}) {
    if (!doc.contains(key) || !doc[key].is_number()) {
      throw ValidationError(std::string("model.") + key + ": missing or not a number");
    }
    *target = doc[key].get<double>();
  }
  if (doc.contains("demo_saturation")) {
    if (!doc["demo_saturation"].is_number()) {
      throw ValidationError("model.demo_saturation: expected a number");
    }
    model.demo_saturation = doc["demo_saturation"].get<double>();
  }
  if (doc.contains("pair_penalties")) {
    const json& penalties = doc["pair_penalties"];
    if (!penalties.is_array()) {
      throw ValidationError("model.pair_penalties: expected an array");
    }
    for (std::size_t p = 0; p < penalties.size(); ++p) {
      const json& item = penalties[p];
      const std::string path = "model.pair_penalties[" + std::to_string(p) + "]";
      if (!item.is_object() || !item.contains("factors") || !item.contains("multiplier") ||
          !item["factors"].is_array() || item["factors"].size() != 2 ||
          !item["multiplier"].is_number()) {
        throw ValidationError(path + ": expected {factors: [name, name], multiplier}");
      }
      int indices[2];
      for (int s = 0; s < 2; ++s) {
        if (!item["factors"][s].is_string()) {
          throw ValidationError(path + ".factors: expected factor names");
        }
        const std::string name = item["factors"][s].get<std::string>();
        indices[s] = space.factor_index(name);
        if (indices[s] < 0) {
          throw ValidationError(path + ".factors: unknown factor '" + name + "'");
        }
      }
      if (indices[0] == indices[1]) {
        throw ValidationError(path + ".factors: a pair needs two distinct factors");
      }
      const std::pair<int, int> key{std::min(indices[0], indices[1]),
                                    std::max(indices[0], indices[1])};
      if (!model.pair_penalty.emplace(key, item["multiplier"].get<double>()).second) {
        throw ValidationError(path + ": duplicate factor pair");
      }
    }
  }
  model.validate();
  return model;
}

nlohmann::json model_to_json(const GeneralizationModel& model, const FactorSpace& space) {
  nlohmann::json doc;
  doc["p_exact"] = model.p_exact;
  doc["p_compose"] = model.p_compose;
  doc["p_unseen_value"] = model.p_unseen_value;
  if (model.demo_saturation) doc["demo_saturation"] = *model.demo_saturation;
  if (!model.pair_penalty.empty()) {
    nlohmann::json penalties = nlohmann::json::array();
    for (const auto& [pair, multiplier] : model.pair_penalty) {
      penalties.push_back(nlohmann::json{
          {"factors", {space.factor(pair.first).name, space.factor(pair.second).name}},
          {"multiplier", multiplier}});
    }
    doc["pair_penalties"] = std::move(penalties);
  }
  return doc;
}

std::string comparison_csv(const std::vector<StrategyComparisonRow>& rows,
                           const GeneralizationModel& model, const FactorSpace& space,
                           EvalMethod method, std::uint64_t n_samples) {
  std::ostringstream out;
  out << "# space: " << space.name() << " (" << space_spec_hash(space) << ")\n";
  out << "# model: p_exact=" << format_double(model.p_exact)
      << " p_compose=" << format_double(model.p_compose)
      << " p_unseen_value=" << format_double(model.p_unseen_value) << "\n";
  if (!model.pair_penalty.empty()) {
    out << "# pair penalties:";
    for (const auto& [pair, multiplier] : model.pair_penalty) {
      out << ' ' << space.factor(pair.first).name << '*' << space.factor(pair.second).name
          << '=' << format_double(multiplier);
    }
    out << "\n";
  }
  if (model.demo_saturation) {
    out << "# demo_saturation: m0=" << format_double(*model.demo_saturation)
        << " (heuristic placeholder for data-scale effects, not a fitted quantity)\n";
  }
  out << "# method: " << (method == EvalMethod::kExact ? "exact" : "monte_carlo");
  if (method == EvalMethod::kMonteCarlo) out << " n=" << n_samples;
  out << "\n";
  out << "strategy,budget,seed_count,mean,stderr,compositional_mean\n";
  for (const StrategyComparisonRow& row : rows) {
    std::string label = to_string(row.strategy);
    if (row.single_factor_index >= 0) {
      label += "[" + space.factor(row.single_factor_index).name + "]";
    }
    out << csv_field(label) << ',' << row.change_budget << ',' << row.seed_count << ','
        << format_double(row.mean_success) << ',' << format_double(row.stderr_success)
        << ','
        << (row.mean_compositional ? format_double(*row.mean_compositional) : "") << '\n';
  }
  return out.str();
}

}  // namespace factorplan
