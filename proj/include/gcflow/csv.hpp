#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gcflow {

/// Formats with 17 significant digits so a read-back reproduces the exact bits.
std::string format_double(double value);

/// Writes content to a temporary file in the target directory and renames it
/// into place, so readers never observe a partially written file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace gcflow
