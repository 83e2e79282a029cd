#pragma once

#include <string>
#include <vector>

namespace factorplan {

// Shortest %g rendering with enough digits to round-trip reruns identically.
std::string format_double(double value);

// RFC-4180-style field quoting, applied only when needed.
std::string csv_field(const std::string& value);

std::vector<std::string> split(const std::string& text, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace factorplan
