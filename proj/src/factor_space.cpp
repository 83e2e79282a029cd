#include "factorplan/factor_space.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "factorplan/errors.hpp"

namespace factorplan {

namespace {

constexpr double kQuaternionUnitTolerance = 1e-9;
constexpr std::uint64_t kEnumerationGuard = 100'000'000ULL;

void check_quaternion_unit(const std::array<double, 4>& q, const std::string& path) {
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::abs(norm - 1.0) > kQuaternionUnitTolerance) {
    std::ostringstream msg;
    msg << path << ": quaternion norm " << norm << " is not 1 within 1e-9";
    throw ValidationError(msg.str());
  }
}

}  // namespace

FactorSpace::FactorSpace(std::string name, std::vector<FactorDef> factors)
    : name_(std::move(name)), factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw ValidationError("factors: factor list is empty");
  }
  std::set<std::string> factor_names;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const FactorDef& factor = factors_[i];
    const std::string path = "factors[" + std::to_string(i) + "]";
    if (factor.name.empty()) {
      throw ValidationError(path + ": factor name is empty");
    }
    if (!factor_names.insert(factor.name).second) {
      throw ValidationError(path + ": duplicate factor name '" + factor.name + "'");
    }
    if (factor.values.empty()) {
      throw ValidationError(path + " ('" + factor.name + "'): no values");
    }
    std::set<std::string> value_ids;
    for (std::size_t v = 0; v < factor.values.size(); ++v) {
      const FactorValue& value = factor.values[v];
      const std::string value_path = path + ".values[" + std::to_string(v) + "]";
      if (value.id.empty()) {
        throw ValidationError(value_path + ": value id is empty");
      }
      if (!value_ids.insert(value.id).second) {
        throw ValidationError(value_path + ": duplicate value id '" + value.id +
                              "' in factor '" + factor.name + "'");
      }
      if (value.quaternion) {
        check_quaternion_unit(*value.quaternion, value_path);
      }
    }
    if (factor.base_index < 0 || factor.base_index >= factor.num_values()) {
      std::ostringstream msg;
      msg << path << " ('" << factor.name << "'): base index " << factor.base_index
          << " out of range [0, " << factor.num_values() << ")";
      throw ValidationError(msg.str());
    }
  }
}

FactorConfig FactorSpace::base_config() const {
  FactorConfig config;
  config.assignment.reserve(factors_.size());
  for (const FactorDef& factor : factors_) {
    config.assignment.push_back(factor.base_index);
  }
  return config;
}

std::uint64_t FactorSpace::combination_count() const {
  std::uint64_t count = 1;
  for (const FactorDef& factor : factors_) {
    const auto k = static_cast<std::uint64_t>(factor.num_values());
    if (count > std::numeric_limits<std::uint64_t>::max() / k) {
      throw ValidationError("combination count overflows 64-bit range for space '" +
                            name_ + "'");
    }
    count *= k;
  }
  return count;
}

bool FactorSpace::has_equal_value_counts() const {
  for (const FactorDef& factor : factors_) {
    if (factor.num_values() != factors_.front().num_values()) return false;
  }
  return true;
}

int FactorSpace::factor_index(const std::string& factor_name) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].name == factor_name) return static_cast<int>(i);
  }
  return -1;
}

int FactorSpace::value_index(int factor, const std::string& value_id) const {
  const FactorDef& def = factors_.at(static_cast<std::size_t>(factor));
  for (std::size_t v = 0; v < def.values.size(); ++v) {
    if (def.values[v].id == value_id) return static_cast<int>(v);
  }
  return -1;
}

void FactorSpace::validate_config(const FactorConfig& config) const {
  if (config.size() != num_factors()) {
    std::ostringstream msg;
    msg << "config has " << config.size() << " factors, space '" << name_ << "' has "
        << num_factors();
    throw ValidationError(msg.str());
  }
  for (int i = 0; i < num_factors(); ++i) {
    if (config[i] < 0 || config[i] >= factor(i).num_values()) {
      std::ostringstream msg;
      msg << "config[" << i << "] ('" << factor(i).name << "'): value index "
          << config[i] << " out of range [0, " << factor(i).num_values() << ")";
      throw ValidationError(msg.str());
    }
  }
}

int hamming_distance(const FactorConfig& a, const FactorConfig& b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "hamming_distance: config sizes differ (" << a.size() << " vs " << b.size()
        << ")";
    throw ValidationError(msg.str());
  }
  int count = 0;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) ++count;
  }
  return count;
}

void for_each_config(const FactorSpace& space,
                     const std::function<void(const FactorConfig&)>& visit) {
  const int n = space.num_factors();
  FactorConfig config;
  config.assignment.assign(static_cast<std::size_t>(n), 0);
  // Odometer with the last factor fastest.
  while (true) {
    visit(config);
    int pos = n - 1;
    while (pos >= 0) {
      int& digit = config.assignment[static_cast<std::size_t>(pos)];
      if (++digit < space.factor(pos).num_values()) break;
      digit = 0;
      --pos;
    }
    if (pos < 0) return;
  }
}

std::vector<FactorConfig> enumerate_all(const FactorSpace& space) {
  const std::uint64_t count = space.combination_count();
  if (count > kEnumerationGuard) {
    std::ostringstream msg;
    msg << "refusing to materialize " << count << " combinations (limit "
        << kEnumerationGuard << ")";
    throw ValidationError(msg.str());
  }
  std::vector<FactorConfig> configs;
  configs.reserve(static_cast<std::size_t>(count));
  for_each_config(space, [&](const FactorConfig& config) { configs.push_back(config); });
  return configs;
}

// --- JSON ------------------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown_fields(const json& object, const std::set<std::string>& known,
                           const std::string& path) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ValidationError(path + ": unknown field '" + it.key() + "'");
    }
  }
}

const json& require_field(const json& object, const std::string& key,
                          const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(path + ": missing required field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& object, const std::string& key,
                           const std::string& path) {
  const json& field = require_field(object, key, path);
  if (!field.is_string()) {
    throw ValidationError(path + "." + key + ": expected a string");
  }
  return field.get<std::string>();
}

std::vector<double> parse_number_array(const json& field, const std::string& path) {
  if (!field.is_array() || field.empty()) {
    throw ValidationError(path + ": expected a nonempty array of numbers");
  }
  std::vector<double> numbers;
  numbers.reserve(field.size());
  for (const json& element : field) {
    if (!element.is_number()) {
      throw ValidationError(path + ": expected a nonempty array of numbers");
    }
    numbers.push_back(element.get<double>());
  }
  return numbers;
}

FactorValue parse_value(const json& doc, const std::string& path) {
  if (!doc.is_object()) {
    throw ValidationError(path + ": expected an object");
  }
  reject_unknown_fields(doc, {"id", "label", "embedding", "quaternion"}, path);
  FactorValue value;
  value.id = require_string(doc, "id", path);
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) {
      throw ValidationError(path + ".label: expected a string");
    }
    value.label = doc["label"].get<std::string>();
  } else {
    value.label = value.id;
  }
  if (doc.contains("embedding") && doc.contains("quaternion")) {
    throw ValidationError(path + ": a value may carry an embedding or a quaternion, not both");
  }
  if (doc.contains("embedding")) {
    value.embedding = parse_number_array(doc["embedding"], path + ".embedding");
  }
  if (doc.contains("quaternion")) {
    const std::vector<double> q = parse_number_array(doc["quaternion"], path + ".quaternion");
    if (q.size() != 4) {
      throw ValidationError(path + ".quaternion: expected 4 components [w,x,y,z]");
    }
    value.quaternion = std::array<double, 4>{q[0], q[1], q[2], q[3]};
  }
  return value;
}

FactorDef parse_factor(const json& doc, const std::string& path) {
  if (!doc.is_object()) {
    throw ValidationError(path + ": expected an object");
  }
  reject_unknown_fields(doc, {"name", "base", "values"}, path);
  FactorDef factor;
  factor.name = require_string(doc, "name", path);
  const json& values = require_field(doc, "values", path);
  if (!values.is_array() || values.empty()) {
    throw ValidationError(path + ".values: expected a nonempty array");
  }
  for (std::size_t v = 0; v < values.size(); ++v) {
    factor.values.push_back(parse_value(values[v], path + ".values[" + std::to_string(v) + "]"));
  }
  const std::string base_id = require_string(doc, "base", path);
  factor.base_index = -1;
  for (std::size_t v = 0; v < factor.values.size(); ++v) {
    if (factor.values[v].id == base_id) {
      factor.base_index = static_cast<int>(v);
      break;
    }
  }
  if (factor.base_index < 0) {
    throw ValidationError(path + ".base: value id '" + base_id + "' not found in factor '" +
                          factor.name + "'");
  }
  return factor;
}

}  // namespace

FactorSpace parse_space_json(const json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("space spec: expected a JSON object");
  }
  reject_unknown_fields(doc, {"name", "factors"}, "space spec");
  const std::string name = require_string(doc, "name", "space spec");
  const json& factors = require_field(doc, "factors", "space spec");
  if (!factors.is_array()) {
    throw ValidationError("space spec.factors: expected an array");
  }
  std::vector<FactorDef> defs;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    defs.push_back(parse_factor(factors[i], "factors[" + std::to_string(i) + "]"));
  }
  return FactorSpace(name, std::move(defs));
}

FactorSpace parse_space(const std::string& document_text) {
  json doc;
  try {
    doc = json::parse(document_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("space spec: invalid JSON: ") + e.what());
  }
  return parse_space_json(doc);
}

nlohmann::json space_to_json(const FactorSpace& space) {
  json doc;
  doc["name"] = space.name();
  json factors = json::array();
  for (const FactorDef& factor : space.factors()) {
    json f;
    f["name"] = factor.name;
    f["base"] = factor.values[static_cast<std::size_t>(factor.base_index)].id;
    json values = json::array();
    for (const FactorValue& value : factor.values) {
      json v;
      v["id"] = value.id;
      if (value.label != value.id) v["label"] = value.label;
      if (value.embedding) v["embedding"] = *value.embedding;
      if (value.quaternion) {
        v["quaternion"] = std::vector<double>(value.quaternion->begin(),
                                              value.quaternion->end());
      }
      values.push_back(std::move(v));
    }
    f["values"] = std::move(values);
    factors.push_back(std::move(f));
  }
  doc["factors"] = std::move(factors);
  return doc;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string space_spec_hash(const FactorSpace& space) {
  const std::uint64_t hash = fnv1a64(space_to_json(space).dump());
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buffer);
}

}  // namespace factorplan
