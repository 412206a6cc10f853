#pragma once

#include <string>
#include <vector>

namespace fairaudit {

/// Minimal RFC-4180-style CSV: quoted fields may contain commas and doubled
/// quotes. Embedded newlines are not supported (none of our schemas need
/// them). Rows are '\n'-terminated; a trailing '\r' is stripped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& origin,
                                        std::size_t line_no);

std::string csv_escape(const std::string& field);
std::string join_csv_row(const std::vector<std::string>& fields);

/// Fixed 6-decimal formatting used for every real value we serialize.
std::string format_fixed6(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fairaudit
