#pragma once

#include <iosfwd>
#include <string>

#include "erqc/core.hpp"

namespace erqc {

// Workload CSV: header `id,metric[,truth]`, truth in {0,1}.
Workload read_workload(std::istream& in, std::size_t subset_size = Workload::kDefaultSubsetSize,
                       const std::string& source_name = "<stream>");
Workload read_workload_file(const std::string& path,
                            std::size_t subset_size = Workload::kDefaultSubsetSize);

void write_workload(std::ostream& out, const Workload& workload);
void write_workload_file(const std::string& path, const Workload& workload);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace erqc
