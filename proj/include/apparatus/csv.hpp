#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace apparatus {

/// Shortest decimal string that parses back to the same binary64.
std::string format_double(double v);

/// Writes "# <comment>" then a header row, then numeric rows.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& comment,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t n_columns_;
  std::string line_;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace apparatus
