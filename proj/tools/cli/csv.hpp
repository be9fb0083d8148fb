#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "magmcmc/types.hpp"

namespace magmcmc::cli {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest text that round-trips the double ("%.17g").
std::string format_double(double x);

struct NumericTable {
  std::vector<std::string> header;
  Matrix rows;  // one row per data line
};

// Header line plus rows of comma-separated numbers. Throws CsvError on
// ragged or non-numeric input.
NumericTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace magmcmc::cli
