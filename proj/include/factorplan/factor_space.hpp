#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace factorplan {

// One discrete setting a factor can take. The embedding / quaternion fields
// are optional metadata consumed only by the similarity module; value
// identity is always the id string.
struct FactorValue {
  std::string id;
  std::string label;  // display text, defaults to id
  std::optional<std::vector<double>> embedding;
  std::optional<std::array<double, 4>> quaternion;  // unit [w, x, y, z]
};

// One axis of environmental variation: an ordered list of values plus the
// designated base value.
struct FactorDef {
  std::string name;
  std::vector<FactorValue> values;
  int base_index = 0;

  int num_values() const { return static_cast<int>(values.size()); }
};

// One combination of factor values: a value index per factor, ordered to
// match the owning space.
struct FactorConfig {
  std::vector<int> assignment;

  int size() const { return static_cast<int>(assignment.size()); }
  int operator[](int i) const { return assignment[static_cast<std::size_t>(i)]; }

  friend bool operator==(const FactorConfig&, const FactorConfig&) = default;
  friend auto operator<=>(const FactorConfig&, const FactorConfig&) = default;
};

// The discrete domain F^N: N named factors, each with k_i >= 1 values and one
// base value. Immutable after construction; construction validates all
// invariants (nonempty, unique names/ids, base indices in range, unit
// quaternions).
class FactorSpace {
 public:
  FactorSpace(std::string name, std::vector<FactorDef> factors);

  const std::string& name() const { return name_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  const FactorDef& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }
  const std::vector<FactorDef>& factors() const { return factors_; }

  // The base combination f*.
  FactorConfig base_config() const;

  // |F^N| = product of k_i. Throws ValidationError if the product overflows
  // the 64-bit count type.
  std::uint64_t combination_count() const;

  bool has_equal_value_counts() const;

  int factor_index(const std::string& factor_name) const;  // -1 if absent
  int value_index(int factor, const std::string& value_id) const;  // -1 if absent

  // Throws ValidationError naming the offending position if config does not
  // belong to this space.
  void validate_config(const FactorConfig& config) const;

 private:
  std::string name_;
  std::vector<FactorDef> factors_;
};

// Number of factor positions where the assignments differ. Symmetric, zero
// iff equal. Throws on length mismatch.
int hamming_distance(const FactorConfig& a, const FactorConfig& b);

// All combinations in lexicographic order, last factor varying fastest.
// Throws if the count overflows or exceeds the materialization guard (1e8).
std::vector<FactorConfig> enumerate_all(const FactorSpace& space);

// Streaming visit in the same order as enumerate_all, without materializing.
void for_each_config(const FactorSpace& space,
                     const std::function<void(const FactorConfig&)>& visit);

// --- Space spec documents (JSON) ------------------------------------------
//
// Schema: {"name": ..., "factors": [{"name": ..., "base": <value id>,
//          "values": [{"id": ..., "label"?: ..., "embedding"?: [...],
//                      "quaternion"?: [w,x,y,z]}]}]}
// Field order is irrelevant; unknown fields are rejected with their path.

FactorSpace parse_space(const std::string& document_text);
FactorSpace parse_space_json(const nlohmann::json& doc);
nlohmann::json space_to_json(const FactorSpace& space);

// FNV-1a 64-bit hash of the canonical serialized spec, as 16 hex digits.
// Plans and checkpoints carry this to detect mismatched inputs.
std::string space_spec_hash(const FactorSpace& space);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace factorplan
