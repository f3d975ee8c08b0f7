#include "erqc/workload_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "erqc/csv.hpp"
#include "erqc/errors.hpp"

namespace erqc {

Workload read_workload(std::istream& in, std::size_t subset_size, const std::string& source_name) {
  const csv::Table table = csv::read(in, source_name);
  const auto id_col = table.column("id");
  const auto metric_col = table.column("metric");
  const auto truth_col = table.column("truth");
  if (!id_col || !metric_col) throw ParseError(source_name, 1, "header must contain id and metric");

  std::vector<InstancePair> pairs;
  pairs.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw ParseError(source_name, row.line, "expected " + std::to_string(table.header.size()) +
                                                  " fields, got " + std::to_string(row.fields.size()));
    }
    InstancePair p;
    p.id = row.fields[*id_col];
    if (p.id.empty()) throw ParseError(source_name, row.line, "empty id");

    const std::string& m = row.fields[*metric_col];
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), p.metric);
    if (ec != std::errc() || ptr != m.data() + m.size()) {
      throw ParseError(source_name, row.line, "metric '" + m + "' is not a number");
    }
    if (!(p.metric >= 0.0 && p.metric <= 1.0)) {
      throw ParseError(source_name, row.line, "metric " + m + " outside [0,1]");
    }
    if (truth_col) {
      const std::string& t = row.fields[*truth_col];
      if (t == "1") p.truth = Label::match;
      else if (t == "0") p.truth = Label::unmatch;
      else if (!t.empty()) throw ParseError(source_name, row.line, "truth must be 0 or 1");
    }
    pairs.push_back(std::move(p));
  }
  try {
    return Workload(std::move(pairs), subset_size);
  } catch (const ContractViolation& e) {
    throw ParseError(source_name, 0, e.what());
  }
}

Workload read_workload_file(const std::string& path, std::size_t subset_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_workload(in, subset_size, path);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_workload(std::ostream& out, const Workload& workload) {
  const bool truth = workload.has_truth();
  out << (truth ? "id,metric,truth\n" : "id,metric\n");
  for (const auto& p : workload.pairs()) {
    out << csv::escape(p.id) << ',' << format_double(p.metric);
    if (truth) out << ',' << (*p.truth == Label::match ? '1' : '0');
    out << '\n';
  }
}

void write_workload_file(const std::string& path, const Workload& workload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_workload(out, workload);
}

}  // namespace erqc
