#include "csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace magmcmc::cli {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  NumericTable table;
  std::string line;
  if (!std::getline(in, line)) throw CsvError(path.string() + ": empty file");
  for (auto& h : split(line)) table.header.push_back(trim(h));
  const std::size_t cols = table.header.size();

  std::vector<double> values;
  std::size_t n = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != cols)
      throw CsvError(path.string() + " line " + std::to_string(line_no) + ": expected " +
                     std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
    for (const auto& f : fields) {
      const std::string t = trim(f);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(t.c_str(), &end);
      if (t.empty() || *end != '\0' || errno == ERANGE)
        throw CsvError(path.string() + " line " + std::to_string(line_no) + ": bad number '" + t + "'");
      values.push_back(v);
    }
    ++n;
  }
  table.rows.resize(static_cast<Index>(n), static_cast<Index>(cols));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      table.rows(static_cast<Index>(i), static_cast<Index>(j)) = values[i * cols + j];
  return table;
}

}  // namespace magmcmc::cli
