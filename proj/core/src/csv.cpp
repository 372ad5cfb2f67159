#include "guru/csv.hpp"

#include <istream>
#include <ostream>

#include "guru/error.hpp"

namespace guru {

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::string>& comments)
    : out_(out), columns_(header.size()) {
  out_ << kCsvVersionLine << '\n';
  for (const std::string& c : comments) {
    if (c.find('\n') != std::string::npos) throw std::invalid_argument("csv comment spans lines");
    out_ << "# " << c << '\n';
  }
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw std::invalid_argument("csv row has " + std::to_string(fields.size()) +
                                " fields, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(fields[i]);
  }
  out_ << '\n';
}

std::string CsvWriter::quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string q = "\"";
  for (char c : field) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("csv has no column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  // Comment block.
  while (in.peek() == '#') {
    std::string line;
    std::getline(in, line);
    table.comments.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
  }
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool closed = false;  // just left a quoted field
  bool any = false;
  char c = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    closed = false;
  };
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
          closed = true;
        }
      } else {
        field += c;
      }
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      end_field();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (closed) {
      throw DataError("csv record " + std::to_string(records.size()) +
                      ": text after a closing quote");
    } else if (c == '"') {
      if (!field.empty()) {
        throw DataError("csv record " + std::to_string(records.size()) +
                        ": quote inside an unquoted field");
      }
      quoted = true;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("csv ends inside a quoted field");
  if (any) {
    end_field();
    records.push_back(std::move(record));
  }
  if (records.empty()) throw DataError("csv has no header");
  table.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size()) {
      throw DataError("csv record " + std::to_string(i) + " has " +
                      std::to_string(records[i].size()) + " fields");
    }
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

}  // namespace guru
