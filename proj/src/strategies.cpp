#include "factorplan/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>

#include "factorplan/budgeting.hpp"
#include "factorplan/errors.hpp"
#include "factorplan/rng.hpp"

namespace factorplan {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kComplete: return "complete";
    case Strategy::kRandom: return "random";
    case Strategy::kSingleFactor: return "single_factor";
    case Strategy::kDiagonal: return "diagonal";
    case Strategy::kL: return "l";
    case Strategy::kStair: return "stair";
    case Strategy::kNoVariation: return "no_variation";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& name) {
  std::string normalized;
  for (const char c : name) {
    normalized += (c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (const Strategy strategy : kAllStrategies) {
    if (normalized == to_string(strategy)) return strategy;
  }
  throw ValidationError("unknown strategy '" + name +
                        "' (expected one of complete, random, single_factor, "
                        "diagonal, l, stair, no_variation)");
}

int CollectionPlan::total_demos() const {
  int total = 0;
  for (const PlanEntry& entry : entries) total += entry.demos;
  return total;
}

std::vector<FactorConfig> CollectionPlan::configs() const {
  std::vector<FactorConfig> result;
  result.reserve(entries.size());
  for (const PlanEntry& entry : entries) result.push_back(entry.config);
  return result;
}

namespace {

std::uint64_t saturating_combination_count(const FactorSpace& space) {
  std::uint64_t count = 1;
  for (const FactorDef& factor : space.factors()) {
    const auto k = static_cast<std::uint64_t>(factor.num_values());
    if (count > UINT64_MAX / k) return UINT64_MAX;
    count *= k;
  }
  return count;
}

// Per-factor value-index orderings after the seeded permutation. For L,
// Stair and SingleFactor the base value is pinned first so every sequence
// starts at f*; Diagonal permutes freely so its pairing is fully random.
std::vector<std::vector<int>> seeded_value_orders(const FactorSpace& space,
                                                  Strategy strategy,
                                                  SplitMix64& rng) {
  std::vector<std::vector<int>> orders;
  orders.reserve(static_cast<std::size_t>(space.num_factors()));
  for (int i = 0; i < space.num_factors(); ++i) {
    const FactorDef& factor = space.factor(i);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(factor.num_values()));
    if (strategy == Strategy::kDiagonal) {
      for (int v = 0; v < factor.num_values(); ++v) order.push_back(v);
      shuffle(order, rng);
    } else {
      order.push_back(factor.base_index);
      std::vector<int> rest;
      for (int v = 0; v < factor.num_values(); ++v) {
        if (v != factor.base_index) rest.push_back(v);
      }
      shuffle(rest, rng);
      order.insert(order.end(), rest.begin(), rest.end());
    }
    orders.push_back(std::move(order));
  }
  return orders;
}

std::vector<FactorConfig> dedupe_first_occurrence(const std::vector<FactorConfig>& configs) {
  std::vector<FactorConfig> unique;
  std::set<FactorConfig> seen;
  for (const FactorConfig& config : configs) {
    if (seen.insert(config).second) unique.push_back(config);
  }
  return unique;
}

// The full seeded config sequence for a strategy, before demo allocation.
// random_count bounds the Random stream; other strategies ignore it.
std::vector<FactorConfig> strategy_sequence(const FactorSpace& space, Strategy strategy,
                                            std::optional<int> factor_index,
                                            std::uint64_t random_count,
                                            std::uint64_t seed, bool dedupe) {
  const int n = space.num_factors();
  SplitMix64 rng(seed);
  std::vector<FactorConfig> sequence;

  switch (strategy) {
    case Strategy::kComplete:
      sequence = enumerate_all(space);
      break;
    case Strategy::kNoVariation:
      sequence.push_back(space.base_config());
      break;
    case Strategy::kSingleFactor: {
      if (!factor_index) {
        throw ValidationError("single_factor requires a factor index");
      }
      if (*factor_index < 0 || *factor_index >= n) {
        std::ostringstream msg;
        msg << "single_factor: factor index " << *factor_index << " out of range [0, "
            << n << ")";
        throw ValidationError(msg.str());
      }
      const auto orders = seeded_value_orders(space, strategy, rng);
      const int i = *factor_index;
      FactorConfig config = space.base_config();
      for (const int v : orders[static_cast<std::size_t>(i)]) {
        config.assignment[static_cast<std::size_t>(i)] = v;
        sequence.push_back(config);
      }
      break;
    }
    case Strategy::kDiagonal: {
      if (!space.has_equal_value_counts()) {
        throw ValidationError(
            "diagonal requires every factor to have the same number of values");
      }
      const auto orders = seeded_value_orders(space, strategy, rng);
      const int k = space.factor(0).num_values();
      for (int j = 0; j < k; ++j) {
        FactorConfig config;
        config.assignment.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          config.assignment.push_back(orders[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        sequence.push_back(std::move(config));
      }
      break;
    }
    case Strategy::kL: {
      const auto orders = seeded_value_orders(space, strategy, rng);
      for (int i = 0; i < n; ++i) {
        FactorConfig config = space.base_config();
        for (const int v : orders[static_cast<std::size_t>(i)]) {
          config.assignment[static_cast<std::size_t>(i)] = v;
          sequence.push_back(config);
        }
      }
      break;
    }
    case Strategy::kStair: {
      const auto orders = seeded_value_orders(space, strategy, rng);
      int max_k = 0;
      for (int i = 0; i < n; ++i) max_k = std::max(max_k, space.factor(i).num_values());
      FactorConfig config = space.base_config();
      for (int j = 0; j < max_k; ++j) {
        for (int i = 0; i < n; ++i) {
          if (j >= space.factor(i).num_values()) continue;
          config.assignment[static_cast<std::size_t>(i)] =
              orders[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          sequence.push_back(config);
        }
      }
      break;
    }
    case Strategy::kRandom: {
      const std::uint64_t space_size = saturating_combination_count(space);
      if (random_count > space_size) {
        std::ostringstream msg;
        msg << "random: " << random_count << " configs requested but the space has only "
            << space_size << " combinations";
        throw ValidationError(msg.str());
      }
      // Uniform without replacement via rejection against the seen set.
      std::set<FactorConfig> seen;
      while (sequence.size() < random_count) {
        FactorConfig config;
        config.assignment.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          config.assignment.push_back(static_cast<int>(
              rng.next_below(static_cast<std::uint64_t>(space.factor(i).num_values()))));
        }
        if (seen.insert(config).second) sequence.push_back(std::move(config));
      }
      break;
    }
  }

  if (dedupe) sequence = dedupe_first_occurrence(sequence);
  return sequence;
}

CollectionPlan assemble_plan(const FactorSpace& space, Strategy strategy,
                             std::uint64_t seed, bool deduped,
                             std::vector<FactorConfig> configs, int total_demos) {
  if (configs.empty()) {
    throw ValidationError("plan has no entries");
  }
  const std::vector<int> demos =
      allocate_demos(static_cast<int>(configs.size()), total_demos);
  CollectionPlan plan;
  plan.strategy = strategy;
  plan.seed = seed;
  plan.space_name = space.name();
  plan.space_hash = space_spec_hash(space);
  plan.deduped = deduped;
  plan.entries.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    plan.entries.push_back(PlanEntry{std::move(configs[i]), demos[i]});
  }
  return plan;
}

}  // namespace

CollectionPlan generate_plan(const FactorSpace& space, Strategy strategy,
                             const GeneratePlanParams& params, int total_demos,
                             std::uint64_t seed) {
  if (total_demos < 1) {
    throw ValidationError("total_demos must be positive");
  }
  std::uint64_t random_count = 0;
  if (strategy == Strategy::kRandom) {
    if (!params.num_configs || *params.num_configs == 0) {
      throw ValidationError("random requires num_configs >= 1");
    }
    random_count = *params.num_configs;
  }
  std::vector<FactorConfig> sequence = strategy_sequence(
      space, strategy, params.factor_index, random_count, seed, params.dedupe);
  return assemble_plan(space, strategy, seed, params.dedupe, std::move(sequence),
                       total_demos);
}

CollectionPlan plan_at_rate(const FactorSpace& space, Strategy strategy,
                            int change_budget, int total_demos, std::uint64_t seed,
                            std::optional<int> factor_index) {
  std::uint64_t count = configs_for_budget(strategy, space, change_budget);
  if (strategy == Strategy::kSingleFactor) {
    if (!factor_index) {
      throw ValidationError("single_factor requires a factor index");
    }
    if (*factor_index >= 0 && *factor_index < space.num_factors()) {
      count = std::min(count,
                       static_cast<std::uint64_t>(space.factor(*factor_index).num_values()));
    }
  }
  std::vector<FactorConfig> sequence =
      strategy_sequence(space, strategy, factor_index, count, seed, /*dedupe=*/true);
  if (sequence.size() > count) {
    sequence.resize(static_cast<std::size_t>(count));
  }
  return assemble_plan(space, strategy, seed, /*deduped=*/true, std::move(sequence),
                       total_demos);
}

// --- Plan documents ---------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known,
                    const std::string& path) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ValidationError(path + ": unknown field '" + it.key() + "'");
    }
  }
}

}  // namespace

nlohmann::json plan_to_json(const CollectionPlan& plan, const FactorSpace& space) {
  json doc;
  doc["strategy"] = to_string(plan.strategy);
  doc["seed"] = plan.seed;
  doc["deduped"] = plan.deduped;
  doc["space"] = json{{"name", plan.space_name}, {"spec_hash", plan.space_hash}};
  json entries = json::array();
  for (const PlanEntry& entry : plan.entries) {
    json config;
    for (int i = 0; i < space.num_factors(); ++i) {
      const FactorDef& factor = space.factor(i);
      config[factor.name] = factor.values[static_cast<std::size_t>(entry.config[i])].id;
    }
    entries.push_back(json{{"config", std::move(config)}, {"demos", entry.demos}});
  }
  doc["entries"] = std::move(entries);
  doc["declared_cost"] = declared_cost(plan).declared_total;
  doc["hamming_cost"] = hamming_cost(plan);
  return doc;
}

namespace {

CollectionPlan plan_from_json_impl(const nlohmann::json& doc, const FactorSpace& space,
                                   bool check_space_hash) {
  if (!doc.is_object()) {
    throw ValidationError("plan: expected a JSON object");
  }
  reject_unknown(doc,
                 {"strategy", "seed", "deduped", "space", "entries", "declared_cost",
                  "hamming_cost"},
                 "plan");
  CollectionPlan plan;
  if (!doc.contains("strategy") || !doc["strategy"].is_string()) {
    throw ValidationError("plan.strategy: missing or not a string");
  }
  plan.strategy = strategy_from_string(doc["strategy"].get<std::string>());
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw ValidationError("plan.seed: expected a nonnegative integer");
    }
    plan.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("deduped")) {
    if (!doc["deduped"].is_boolean()) {
      throw ValidationError("plan.deduped: expected a boolean");
    }
    plan.deduped = doc["deduped"].get<bool>();
  }
  if (doc.contains("space")) {
    const json& sp = doc["space"];
    if (!sp.is_object()) throw ValidationError("plan.space: expected an object");
    reject_unknown(sp, {"name", "spec_hash"}, "plan.space");
    if ((sp.contains("name") && !sp["name"].is_string()) ||
        (sp.contains("spec_hash") && !sp["spec_hash"].is_string())) {
      throw ValidationError("plan.space: name and spec_hash must be strings");
    }
    plan.space_name = sp.value("name", "");
    plan.space_hash = sp.value("spec_hash", "");
    if (check_space_hash && !plan.space_hash.empty() &&
        plan.space_hash != space_spec_hash(space)) {
      throw ValidationError("plan.space.spec_hash does not match the provided space '" +
                            space.name() + "' (plan: " + plan.space_hash +
                            ", space: " + space_spec_hash(space) + ")");
    }
  } else {
    plan.space_name = space.name();
    plan.space_hash = space_spec_hash(space);
  }
  if (!doc.contains("entries") || !doc["entries"].is_array() || doc["entries"].empty()) {
    throw ValidationError("plan.entries: expected a nonempty array");
  }
  for (std::size_t e = 0; e < doc["entries"].size(); ++e) {
    const json& entry_doc = doc["entries"][e];
    const std::string path = "plan.entries[" + std::to_string(e) + "]";
    if (!entry_doc.is_object()) throw ValidationError(path + ": expected an object");
    reject_unknown(entry_doc, {"config", "demos"}, path);
    if (!entry_doc.contains("config") || !entry_doc["config"].is_object()) {
      throw ValidationError(path + ".config: missing or not an object");
    }
    PlanEntry entry;
    entry.config.assignment.assign(static_cast<std::size_t>(space.num_factors()), -1);
    for (auto it = entry_doc["config"].begin(); it != entry_doc["config"].end(); ++it) {
      const int factor = space.factor_index(it.key());
      if (factor < 0) {
        throw ValidationError(path + ".config: unknown factor '" + it.key() + "'");
      }
      if (!it.value().is_string()) {
        throw ValidationError(path + ".config." + it.key() + ": expected a value id string");
      }
      const int value = space.value_index(factor, it.value().get<std::string>());
      if (value < 0) {
        throw ValidationError(path + ".config." + it.key() + ": unknown value id '" +
                              it.value().get<std::string>() + "'");
      }
      entry.config.assignment[static_cast<std::size_t>(factor)] = value;
    }
    for (int i = 0; i < space.num_factors(); ++i) {
      if (entry.config[i] < 0) {
        throw ValidationError(path + ".config: missing factor '" + space.factor(i).name +
                              "'");
      }
    }
    if (!entry_doc.contains("demos") || !entry_doc["demos"].is_number_integer() ||
        entry_doc["demos"].get<int>() < 1) {
      throw ValidationError(path + ".demos: expected a positive integer");
    }
    entry.demos = entry_doc["demos"].get<int>();
    plan.entries.push_back(std::move(entry));
  }
  return plan;
}

}  // namespace

CollectionPlan plan_from_json(const nlohmann::json& doc, const FactorSpace& space) {
  return plan_from_json_impl(doc, space, /*check_space_hash=*/true);
}

StandalonePlan plan_from_json_standalone(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array() ||
      doc["entries"].empty()) {
    throw ValidationError("plan.entries: expected a nonempty array");
  }
  // Reconstruct a skeleton space from the configs themselves: factor names as
  // serialized (sorted), value lists in first-seen order, base unknowable.
  const auto entry_config = [&](std::size_t e) -> const json& {
    const json& entry = doc["entries"][e];
    if (!entry.is_object() || !entry.contains("config") || !entry["config"].is_object()) {
      throw ValidationError("plan.entries[" + std::to_string(e) +
                            "].config: missing or not an object");
    }
    return entry["config"];
  };
  std::vector<std::string> factor_names;
  for (auto it = entry_config(0).begin(); it != entry_config(0).end(); ++it) {
    factor_names.push_back(it.key());
  }
  std::map<std::string, std::vector<std::string>> values_by_factor;
  for (std::size_t e = 0; e < doc["entries"].size(); ++e) {
    const json& config = entry_config(e);
    if (config.size() != factor_names.size()) {
      throw ValidationError("plan.entries[" + std::to_string(e) +
                            "].config: inconsistent factor set");
    }
    for (const std::string& name : factor_names) {
      if (!config.contains(name) || !config[name].is_string()) {
        throw ValidationError("plan.entries[" + std::to_string(e) +
                              "].config: missing factor '" + name + "'");
      }
      const std::string id = config[name].get<std::string>();
      auto& ids = values_by_factor[name];
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
  }
  std::vector<FactorDef> defs;
  for (const std::string& name : factor_names) {
    FactorDef def;
    def.name = name;
    for (const std::string& id : values_by_factor[name]) {
      def.values.push_back(FactorValue{id, id, std::nullopt, std::nullopt});
    }
    def.base_index = 0;
    defs.push_back(std::move(def));
  }
  std::string space_name = "plan-skeleton";
  if (doc.contains("space") && doc["space"].is_object() &&
      doc["space"].contains("name") && doc["space"]["name"].is_string()) {
    space_name = doc["space"]["name"].get<std::string>();
  }
  StandalonePlan result{CollectionPlan{}, FactorSpace(space_name, std::move(defs))};
  result.plan = plan_from_json_impl(doc, result.space, /*check_space_hash=*/false);
  return result;
}

}  // namespace factorplan
