#pragma once

#include <string>
#include <vector>

#include "biasaudit/types.hpp"

namespace biasaudit {

/// A parsed CSV file: header row plus data rows of equal width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws IngestError if absent.
  std::size_t column(const std::string& name) const;
};

/// Reads an RFC 4180 CSV file (quoted fields, escaped quotes, CRLF or
/// LF line endings). Throws IngestError on unreadable files, ragged
/// rows or unterminated quotes.
CsvTable read_csv(const std::string& path);

/// Parses CSV from an in-memory string; same rules as read_csv.
CsvTable parse_csv(const std::string& text);

/// Writes a table as RFC 4180 CSV with LF line endings, quoting only
/// fields that need it. Output is byte-deterministic.
void write_csv(const std::string& path, const CsvTable& table);

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double v);

}  // namespace biasaudit
