#pragma once

// CSV/JSON readers and writers. Reals are written with 17 significant
// digits; non-finite values are refused on both input and output.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lassorec/model.hpp"

namespace lassorec {

using Json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string format_real(double v);
std::string format_int(long long v);

// First row is a header when any of its fields is not a number.
DesignMatrix read_design_csv(const std::filesystem::path& path);
// One column, or the "index,value" layout written by coefficients_table.
Vector read_vector_csv(const std::filesystem::path& path);

CsvTable coefficients_table(const Vector& values);
std::string to_csv(const CsvTable& table);

void write_report(const CsvTable& table, const std::filesystem::path& path);
void write_report(const Json& report, const std::filesystem::path& path);
void write_text(const std::string& content, const std::filesystem::path& path);
std::string to_json_text(const Json& report);

// Throws when any number in the document is NaN or infinite.
void require_finite(const Json& report);

Json to_json(const Vector& v);
Json to_json_indices(const IndexSet& idx);  // 1-based

// `key = value` lines; `#` starts a comment. Keys keep file order.
std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path);

}  // namespace lassorec
