#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "smi/mcmc.hpp"
#include "smi/types.hpp"

namespace smi::io {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);
double parse_double(const std::string& text);
long long parse_int(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// data_error if the column is absent.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, no quoting. io_error if unreadable, data_error on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Row-oriented CSV text builder.
class CsvWriter {
public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  void end_row();
  const std::string& str() const { return text_; }

private:
  std::string text_;
  bool row_open_ = false;
};

/// Writes the whole file at once; io_error naming the path on failure. Creates parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Single `value` column as an n x 1 observation matrix.
Observations read_value_csv(const std::filesystem::path& path);
void write_value_csv(const std::filesystem::path& path, const Vector& values);

/// Draws as CSV (header of names) plus `<stem>.json` holding the chain metadata.
void write_samples(const std::filesystem::path& csv_path, const mcmc::SampleMatrix& samples);

} // namespace smi::io
