#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "factorplan/factor_space.hpp"

namespace factorplan {

struct EpisodeRecord {
  std::string episode_id;
  FactorConfig config;
  bool success = false;
  std::map<std::string, std::string> tags;
};

// Parses a line-delimited JSON manifest ({"episode_id", "config":
// {<factor>: <value id>}, "success", "tags"?}), validating every config
// against the space. Duplicate episode ids and unknown ids are rejected with
// the offending line and path.
std::vector<EpisodeRecord> ingest_manifest(const std::string& text,
                                           const FactorSpace& space);

struct PairCell {
  int factor_i = 0;
  int factor_j = 0;
  int successes = 0;        // successful episodes on this pair's grid
  int episodes = 0;         // episodes observed on this pair's grid
  int configs_evaluated = 0;  // distinct grid configs with >= 1 episode
  int grid_size = 0;        // (k_i - 1) * (k_j - 1)
};

struct PairwiseTable {
  std::vector<PairCell> cells;  // ordered by (i, j), i < j
  int overall_successes = 0;
  // Sum of grid sizes over fully evaluated pairs (every grid config seen).
  int overall_denominator = 0;
  std::vector<std::string> out_of_grid_ids;  // episodes on no pairwise cell
};

// Tallies successes per factor pair over the pairwise evaluation grid
// (records with exactly two non-base factors land on a cell; all others are
// reported out-of-grid, not counted).
PairwiseTable pairwise_table(const std::vector<EpisodeRecord>& records,
                             const FactorSpace& space);

struct ValueRate {
  std::string value_id;
  int successes = 0;
  int episodes = 0;
  std::optional<double> rate;  // empty when no episodes touch the value
};

// Per factor, rates for the non-base values in space order. An episode
// contributes once per factor to whichever value it assigns there, so an
// episode with two non-base values counts toward both.
using PerValueRates = std::vector<std::vector<ValueRate>>;

PerValueRates per_value_success(const std::vector<EpisodeRecord>& records,
                                const FactorSpace& space);

struct TierEntry {
  std::string value_id;
  double rate = 0.0;
  int tier = 0;   // 1 = most similar to base (highest rate)
  bool tied = false;
};

struct TierReport {
  std::vector<std::vector<TierEntry>> per_factor;
  std::vector<std::string> warnings;
  // Rates computed from whichever manifest was supplied; the tag records
  // provenance since the metric may also reflect overall value difficulty.
  std::string manifest_tag;
};

// Ranks each factor's non-base values by descending rate into tiers
// 1..num_tiers (rank past num_tiers stays in the last tier, flagged). Ties
// keep space value order and are flagged; undefined rates are excluded with
// a warning.
TierReport tier_values(const PerValueRates& rates, int num_tiers = 3);

std::string pairwise_table_text(const PairwiseTable& table, const FactorSpace& space);
// Upper-triangular CSV layout: one row per factor, cells "s/d".
std::string pairwise_table_csv(const PairwiseTable& table, const FactorSpace& space);
std::string per_value_rates_text(const PerValueRates& rates, const FactorSpace& space);
std::string tier_report_text(const TierReport& report, const FactorSpace& space);

}  // namespace factorplan
