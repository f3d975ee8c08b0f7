#include "erqc/csv.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "erqc/errors.hpp"

namespace erqc::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

Table read(std::istream& in, const std::string& source_name) {
  Table table;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  std::size_t row_line = 1;
  bool first_row = true;

  auto finish_row = [&] {
    fields.push_back(std::move(field));
    field.clear();
    if (first_row) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      table.header = std::move(fields);
      first_row = false;
    } else {
      table.rows.push_back({row_line, std::move(fields)});
    }
    fields.clear();
    row_has_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) finish_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (in_quotes) throw ParseError(source_name, row_line, "unterminated quoted field");
  if (row_has_content || !field.empty()) finish_row();
  if (first_row) throw ParseError(source_name, 1, "missing header row");
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read(in, path);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace erqc::csv
