#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace skel {

/// Numeric table with a header row. Every artifact that is emitted as CSV is
/// first converted to one of these.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// 17 significant digits, round-trips every finite double exactly.
std::string format_number(double value);

void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace skel
