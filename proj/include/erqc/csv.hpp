#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace erqc::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180 style: comma separated, double-quoted fields may hold commas,
// quotes ("") and newlines. A UTF-8 BOM on the first line is dropped.
Table read(std::istream& in, const std::string& source_name = "<stream>");
Table read_file(const std::string& path);

std::string escape(std::string_view field);

}  // namespace erqc::csv
