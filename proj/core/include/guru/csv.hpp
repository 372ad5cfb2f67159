#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace guru {

/// First line of every CSV the project writes.
inline constexpr std::string_view kCsvVersionLine = "# guru-csv 1";

/// RFC-4180 writer (CRLF-free: records end in '\n'). The output starts with a
/// block of '#' comment lines, the first being kCsvVersionLine, then the header.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header,
            const std::vector<std::string>& comments = {});

  void row(const std::vector<std::string>& fields);

  /// Quotes a field when it holds a comma, quote, CR or LF.
  static std::string quote(std::string_view field);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> comments;  // leading '#' lines without the '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name; throws DataError if absent.
  std::size_t column(std::string_view name) const;
};

/// Parses the writer's format: leading comment block, header, quoted fields.
CsvTable read_csv(std::istream& in);

}  // namespace guru
