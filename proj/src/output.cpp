#include "snls/output.hpp"

#include <cmath>

#include <fmt/format.h>

#include "snls/errors.hpp"

#ifndef SNLS_VERSION
#define SNLS_VERSION "unknown"
#endif

namespace snls {

std::string version_string() { return SNLS_VERSION; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw ConfigError("output: cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw DomainError("csv: row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_number(values[i]);
  }
  out_ << line << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace snls
