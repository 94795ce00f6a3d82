#include "lassorec/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lassorec/errors.hpp"

namespace lassorec {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_real(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* first = field.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file for reading", path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (in.bad()) throw IoError("read failure", path.string());
  return lines;
}

struct Parsed {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Parsed parse_numeric_csv(const std::filesystem::path& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw InputError("empty CSV file: " + path.string());
  Parsed out;
  std::size_t first = 0;
  {
    std::vector<std::string> fields = split(lines[0]);
    double tmp;
    for (const auto& f : fields)
      if (!parse_real(f, tmp)) {
        out.header = fields;
        first = 1;
        break;
      }
  }
  std::size_t width = out.header.size();
  for (std::size_t i = first; i < lines.size(); ++i) {
    std::vector<std::string> fields = split(lines[i]);
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw InputError(path.string() + ": line " + std::to_string(i + 1) +
                       " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(width));
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!parse_real(fields[j], row[j]))
        throw InputError(path.string() + ": line " + std::to_string(i + 1) +
                         ", field " + std::to_string(j + 1) +
                         " is not a number: '" + fields[j] + "'");
      if (!std::isfinite(row[j]))
        throw InputError(path.string() + ": line " + std::to_string(i + 1) +
                         " contains a non-finite value");
    }
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty()) throw InputError("CSV has no data rows: " + path.string());
  return out;
}

void check_finite_number(double v) {
  if (!std::isfinite(v))
    throw Error("refusing to write a non-finite value (internal invariant breach)");
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw Error("CSV row width differs from header");
  rows.push_back(std::move(row));
}

std::string format_real(double v) {
  check_finite_number(v);
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_int(long long v) { return std::to_string(v); }

DesignMatrix read_design_csv(const std::filesystem::path& path) {
  Parsed parsed = parse_numeric_csv(path);
  Matrix X(parsed.rows.size(), parsed.rows[0].size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i)
    for (std::size_t j = 0; j < parsed.rows[i].size(); ++j)
      X(i, j) = parsed.rows[i][j];
  return DesignMatrix(std::move(X), parsed.header);
}

Vector read_vector_csv(const std::filesystem::path& path) {
  Parsed parsed = parse_numeric_csv(path);
  const std::size_t width = parsed.rows[0].size();
  std::size_t col = 0;
  if (width == 2 && parsed.header.size() == 2 && parsed.header[0] == "index")
    col = 1;
  else if (width != 1)
    throw InputError(path.string() + ": expected a single column");
  Vector v(parsed.rows.size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) v(i) = parsed.rows[i][col];
  return v;
}

CsvTable coefficients_table(const Vector& values) {
  CsvTable t;
  t.header = {"index", "value"};
  for (Eigen::Index k = 0; k < values.size(); ++k)
    t.add_row({format_int(k + 1), format_real(values(k))});
  return t;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_text(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing", path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failure", path.string());
}

void write_report(const CsvTable& table, const std::filesystem::path& path) {
  write_text(to_csv(table), path);
}

void require_finite(const Json& report) {
  if (report.is_number_float()) {
    check_finite_number(report.get<double>());
  } else if (report.is_structured()) {
    for (const auto& item : report) require_finite(item);
  }
}

std::string to_json_text(const Json& report) {
  require_finite(report);
  return report.dump(2) + "\n";
}

void write_report(const Json& report, const std::filesystem::path& path) {
  write_text(to_json_text(report), path);
}

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

Json to_json_indices(const IndexSet& idx) {
  Json arr = Json::array();
  for (int k : idx) arr.push_back(k + 1);
  return arr;
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file", path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw InputError(path.string() + ": line " + std::to_string(number) +
                       " is not of the form key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty())
      throw InputError(path.string() + ": line " + std::to_string(number) +
                       " has an empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

}  // namespace lassorec
