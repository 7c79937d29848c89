#pragma once

// CSV and JSON writers. Numbers go out with 17 significant digits so that
// every double round-trips exactly.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace snls {

/// git-describe string baked in at build time.
std::string version_string();

/// "%.17g"; "inf", "-inf" and "nan" for the non-finite values.
std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span(values.begin(), values.size())); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace snls
