#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viscoid/connecting.hpp"
#include "viscoid/grid.hpp"

namespace viscoid {

/// Column-major numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Shortest text with 17 significant digits; parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view context);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// key=value lines; '#' starts a comment. Duplicate keys are format errors.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source);
std::string read_text(const std::filesystem::path& path);

/// Everything a dataset bundle directory holds.
struct Dataset {
  ResponseTable table;
  double L = 0.0;
  std::optional<Sampled1D> q_true;  // on the space grid [0, L]
  std::string kernel_kind = "one";
  std::string created_by = "viscoid";
};

/// Writes manifest, kernel.csv, basis.csv, response.csv and (if present)
/// q_true.csv into `dir`, creating it when needed.
void save_bundle(const Dataset& data, const std::filesystem::path& dir);
Dataset load_bundle(const std::filesystem::path& dir);

}  // namespace viscoid
