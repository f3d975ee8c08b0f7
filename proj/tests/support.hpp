#pragma once

#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "erqc/core.hpp"

namespace erqc::testing {

inline std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

// Pairs with the given metrics (already ascending) and truths (1 = match).
inline Workload make_workload(const std::vector<double>& metrics, const std::vector<int>& truth,
                              std::size_t subset_size) {
  std::vector<InstancePair> pairs;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    InstancePair p{padded_id("q", i), metrics[i], std::nullopt};
    if (i < truth.size()) p.truth = truth[i] ? Label::match : Label::unmatch;
    pairs.push_back(p);
  }
  return Workload(std::move(pairs), subset_size);
}

// m subsets of `size` pairs; subset k holds matches[k] matches at its top end.
inline Workload stepped_workload(const std::vector<std::size_t>& matches, std::size_t size) {
  std::vector<double> metrics;
  std::vector<int> truth;
  const std::size_t n = matches.size() * size;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    for (std::size_t j = 0; j < size; ++j) {
      metrics.push_back(static_cast<double>(k * size + j) / static_cast<double>(n));
      truth.push_back(j >= size - matches[k] ? 1 : 0);
    }
  }
  return make_workload(metrics, truth, size);
}

}  // namespace erqc::testing
