#pragma once

#include <string>
#include <vector>

namespace orbsim {

/// RFC-4180 quoting: fields containing commas, quotes, or newlines are
/// wrapped in double quotes with embedded quotes doubled.
std::string csv_escape(const std::string& field);

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

/// Row-oriented CSV document with a mandatory header.  Rows are rendered
/// with "\n" line endings so reruns are byte-identical across platforms.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::string render() const;
  void write(const std::string& path) const;

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses RFC-4180 text into rows of unescaped fields.  Accepts both "\n"
/// and "\r\n" endings; a trailing newline does not produce an empty row.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Reads a whole file; throws FileNotFound if it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace orbsim
