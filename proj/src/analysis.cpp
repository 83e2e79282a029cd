#include "factorplan/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "factorplan/errors.hpp"
#include "factorplan/text_util.hpp"

namespace factorplan {

namespace {

using nlohmann::json;

EpisodeRecord parse_record(const json& doc, const FactorSpace& space,
                           const std::string& path) {
  if (!doc.is_object()) {
    throw ValidationError(path + ": expected an object");
  }
  static const std::set<std::string> known = {"episode_id", "config", "success", "tags"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ValidationError(path + ": unknown field '" + it.key() + "'");
    }
  }
  EpisodeRecord record;
  if (!doc.contains("episode_id") || !doc["episode_id"].is_string() ||
      doc["episode_id"].get<std::string>().empty()) {
    throw ValidationError(path + ".episode_id: missing or empty");
  }
  record.episode_id = doc["episode_id"].get<std::string>();
  if (!doc.contains("success") || !doc["success"].is_boolean()) {
    throw ValidationError(path + ".success: missing or not a boolean");
  }
  record.success = doc["success"].get<bool>();
  if (!doc.contains("config") || !doc["config"].is_object()) {
    throw ValidationError(path + ".config: missing or not an object");
  }
  record.config.assignment.assign(static_cast<std::size_t>(space.num_factors()), -1);
  for (auto it = doc["config"].begin(); it != doc["config"].end(); ++it) {
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
    record.config.assignment[static_cast<std::size_t>(factor)] = value;
  }
  for (int i = 0; i < space.num_factors(); ++i) {
    if (record.config[i] < 0) {
      throw ValidationError(path + ".config: missing factor '" + space.factor(i).name + "'");
    }
  }
  if (doc.contains("tags")) {
    if (!doc["tags"].is_object()) {
      throw ValidationError(path + ".tags: expected an object");
    }
    for (auto it = doc["tags"].begin(); it != doc["tags"].end(); ++it) {
      if (!it.value().is_string()) {
        throw ValidationError(path + ".tags." + it.key() + ": expected a string");
      }
      record.tags[it.key()] = it.value().get<std::string>();
    }
  }
  return record;
}

}  // namespace

std::vector<EpisodeRecord> ingest_manifest(const std::string& text,
                                           const FactorSpace& space) {
  std::vector<EpisodeRecord> records;
  std::set<std::string> ids;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    // Skip blank lines so trailing newlines are harmless.
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string path = "manifest line " + std::to_string(line_number);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    EpisodeRecord record = parse_record(doc, space, path);
    if (!ids.insert(record.episode_id).second) {
      throw ValidationError(path + ": duplicate episode_id '" + record.episode_id + "'");
    }
    records.push_back(std::move(record));
  }
  return records;
}

PairwiseTable pairwise_table(const std::vector<EpisodeRecord>& records,
                             const FactorSpace& space) {
  const int n = space.num_factors();
  const FactorConfig base = space.base_config();

  std::map<std::pair<int, int>, std::size_t> cell_index;
  PairwiseTable table;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairCell cell;
      cell.factor_i = i;
      cell.factor_j = j;
      cell.grid_size = (space.factor(i).num_values() - 1) *
                       (space.factor(j).num_values() - 1);
      cell_index[{i, j}] = table.cells.size();
      table.cells.push_back(cell);
    }
  }

  std::map<std::pair<int, int>, std::set<std::pair<int, int>>> configs_seen;
  for (const EpisodeRecord& record : records) {
    space.validate_config(record.config);
    std::vector<int> off_base;
    for (int i = 0; i < n; ++i) {
      if (record.config[i] != base[i]) off_base.push_back(i);
    }
    if (off_base.size() != 2) {
      table.out_of_grid_ids.push_back(record.episode_id);
      continue;
    }
    const std::pair<int, int> pair{off_base[0], off_base[1]};
    PairCell& cell = table.cells[cell_index.at(pair)];
    ++cell.episodes;
    if (record.success) ++cell.successes;
    configs_seen[pair].insert({record.config[pair.first], record.config[pair.second]});
  }

  for (PairCell& cell : table.cells) {
    cell.configs_evaluated =
        static_cast<int>(configs_seen[{cell.factor_i, cell.factor_j}].size());
    table.overall_successes += cell.successes;
    if (cell.configs_evaluated >= cell.grid_size) {
      table.overall_denominator += cell.grid_size;
    }
  }
  return table;
}

PerValueRates per_value_success(const std::vector<EpisodeRecord>& records,
                                const FactorSpace& space) {
  const int n = space.num_factors();
  PerValueRates rates(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const FactorDef& factor = space.factor(i);
    for (int v = 0; v < factor.num_values(); ++v) {
      if (v == factor.base_index) continue;
      ValueRate rate;
      rate.value_id = factor.values[static_cast<std::size_t>(v)].id;
      rates[static_cast<std::size_t>(i)].push_back(std::move(rate));
    }
  }
  for (const EpisodeRecord& record : records) {
    space.validate_config(record.config);
    for (int i = 0; i < n; ++i) {
      const FactorDef& factor = space.factor(i);
      const int v = record.config[i];
      if (v == factor.base_index) continue;
      // Position of v among the factor's non-base values.
      const int slot = v - (v > factor.base_index ? 1 : 0);
      ValueRate& rate = rates[static_cast<std::size_t>(i)][static_cast<std::size_t>(slot)];
      ++rate.episodes;
      if (record.success) ++rate.successes;
    }
  }
  for (auto& factor_rates : rates) {
    for (ValueRate& rate : factor_rates) {
      if (rate.episodes > 0) {
        rate.rate = static_cast<double>(rate.successes) / rate.episodes;
      }
    }
  }
  return rates;
}

TierReport tier_values(const PerValueRates& rates, int num_tiers) {
  if (num_tiers < 1) {
    throw ValidationError("tier_values: num_tiers must be positive");
  }
  TierReport report;
  for (std::size_t f = 0; f < rates.size(); ++f) {
    std::vector<TierEntry> entries;
    for (const ValueRate& rate : rates[f]) {
      if (!rate.rate) {
        report.warnings.push_back("factor " + std::to_string(f) + " value '" +
                                  rate.value_id + "': no episodes, excluded from tiers");
        continue;
      }
      entries.push_back(TierEntry{rate.value_id, *rate.rate, 0, false});
    }
    // Descending rate; stable, so ties keep space value order.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const TierEntry& a, const TierEntry& b) { return a.rate > b.rate; });
    for (std::size_t r = 0; r < entries.size(); ++r) {
      entries[r].tier = std::min(static_cast<int>(r) + 1, num_tiers);
      const bool tied_prev = r > 0 && entries[r - 1].rate == entries[r].rate;
      const bool tied_next = r + 1 < entries.size() && entries[r + 1].rate == entries[r].rate;
      entries[r].tied = tied_prev || tied_next;
      if (entries[r].tied) {
        report.warnings.push_back("factor " + std::to_string(f) + " value '" +
                                  entries[r].value_id +
                                  "': tied rate, tier assigned by value order");
      }
      if (static_cast<int>(r) + 1 > num_tiers) {
        report.warnings.push_back("factor " + std::to_string(f) + " value '" +
                                  entries[r].value_id + "': rank past tier count, kept in tier " +
                                  std::to_string(num_tiers));
      }
    }
    report.per_factor.push_back(std::move(entries));
  }
  return report;
}

std::string pairwise_table_text(const PairwiseTable& table, const FactorSpace& space) {
  std::ostringstream out;
  for (const PairCell& cell : table.cells) {
    out << space.factor(cell.factor_i).name << " x " << space.factor(cell.factor_j).name
        << ": " << cell.successes << "/" << cell.grid_size;
    if (cell.configs_evaluated < cell.grid_size) {
      out << " (only " << cell.configs_evaluated << " of " << cell.grid_size
          << " scenarios evaluated, " << cell.episodes << " episodes)";
    }
    out << "\n";
  }
  out << "overall: " << table.overall_successes << "/" << table.overall_denominator << "\n";
  if (!table.out_of_grid_ids.empty()) {
    out << "out-of-grid episodes (" << table.out_of_grid_ids.size() << "):";
    for (const std::string& id : table.out_of_grid_ids) out << ' ' << id;
    out << "\n";
  }
  return out.str();
}

std::string pairwise_table_csv(const PairwiseTable& table, const FactorSpace& space) {
  const int n = space.num_factors();
  std::ostringstream out;
  out << "factor";
  for (int j = 1; j < n; ++j) out << ',' << csv_field(space.factor(j).name);
  out << '\n';
  std::map<std::pair<int, int>, const PairCell*> by_pair;
  for (const PairCell& cell : table.cells) {
    by_pair[{cell.factor_i, cell.factor_j}] = &cell;
  }
  for (int i = 0; i < n - 1; ++i) {
    out << csv_field(space.factor(i).name);
    for (int j = 1; j < n; ++j) {
      out << ',';
      if (j > i) {
        const PairCell* cell = by_pair.at({i, j});
        out << cell->successes << '/' << cell->grid_size;
      }
    }
    out << '\n';
  }
  out << "overall," << table.overall_successes << '/' << table.overall_denominator;
  for (int j = 2; j < n; ++j) out << ',';
  out << '\n';
  return out.str();
}

std::string per_value_rates_text(const PerValueRates& rates, const FactorSpace& space) {
  std::ostringstream out;
  for (int i = 0; i < space.num_factors(); ++i) {
    out << "factor " << space.factor(i).name << ":";
    for (const ValueRate& rate : rates[static_cast<std::size_t>(i)]) {
      out << ' ' << rate.value_id << '=';
      if (rate.rate) {
        out << format_double(*rate.rate) << " (" << rate.successes << '/' << rate.episodes
            << ')';
      } else {
        out << "undefined";
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string tier_report_text(const TierReport& report, const FactorSpace& space) {
  std::ostringstream out;
  for (std::size_t f = 0; f < report.per_factor.size(); ++f) {
    out << "factor " << space.factor(static_cast<int>(f)).name << ":";
    for (const TierEntry& entry : report.per_factor[f]) {
      out << ' ' << entry.value_id << "=tier" << entry.tier;
      if (entry.tied) out << "(tie)";
    }
    out << '\n';
  }
  for (const std::string& warning : report.warnings) {
    out << "warning: " << warning << '\n';
  }
  if (!report.manifest_tag.empty()) {
    out << "source: " << report.manifest_tag
        << " (rate-based similarity can also reflect overall value difficulty)\n";
  }
  return out.str();
}

}  // namespace factorplan
