#include "factorplan/text_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "factorplan/errors.hpp"

namespace factorplan {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (value == static_cast<long long>(value) && std::abs(value) < 1e15) {
    // Integral values print without an exponent or trailing zeros.
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%lld", static_cast<long long>(value));
    return buffer;
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (const char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (const char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot read file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write file '" + path + "'");
  }
  out << content;
  if (!out.good()) {
    throw ValidationError("write failed for '" + path + "'");
  }
}

}  // namespace factorplan
