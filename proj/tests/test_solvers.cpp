#include <doctest.h>

#include <limits>
#include <random>

#include "erqc/errors.hpp"
#include "erqc/metrics.hpp"
#include "erqc/solvers.hpp"
#include "erqc/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace erqc;
using erqc::testing::stepped_workload;

namespace {

SolverConfig config_for(double alpha, double beta, double theta = 0.9) {
  SolverConfig c;
  c.requirement = {alpha, beta, theta};
  return c;
}

void check_solution_shape(const Workload& w, const Solution& s) {
  const PairRange minus = s.partition.minus_pairs(w);
  const PairRange human = s.partition.human_pairs(w);
  REQUIRE(s.labels.complete());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (human.contains(i)) {
      CHECK(s.labels.origin(i) == LabelOrigin::human);
      CHECK(s.labels.label(i) == w.pair(i).truth);
    } else if (s.labels.origin(i) == LabelOrigin::machine) {
      CHECK(s.labels.label(i) == (minus.contains(i) ? Label::unmatch : Label::match));
    }
  }
  CHECK(std::is_sorted(s.human_labeled.begin(), s.human_labeled.end()));
  CHECK(s.human_cost() >= human.size());
}

}  // namespace

TEST_CASE("precision threshold") {
  CHECK(*base_precision_threshold(1.0, 1000, 500, 0.37) == 1.0);
  CHECK(*base_precision_threshold(0.9, 1000, 500, 0.5) == doctest::Approx(0.875));
  CHECK(*base_precision_threshold(0.0, 1000, 500, 0.5) <= 0.0);
  CHECK_FALSE(base_precision_threshold(0.9, 0, 500, 0.5));
}

TEST_CASE("recall threshold") {
  CHECK(*base_recall_threshold(1.0, 1000, 500, 0.5, 1000, 0.9) == 0.0);
  CHECK(*base_recall_threshold(0.9, 1000, 500, 0.5, 1000, 0.9) ==
        doctest::Approx(0.1 * (250 + 900) / 900));
  CHECK(*base_recall_threshold(0.9, 1000, 500, 0.0, 1000, 0.0) == 0.0);
  CHECK(std::isinf(*base_recall_threshold(0.0, 1000, 500, 0.5, 1000, 0.9)));
  CHECK_FALSE(base_recall_threshold(0.9, 0, 500, 0.5, 1000, 0.9));
}

TEST_CASE("configuration validation") {
  SolverConfig c = config_for(0.9, 0.9);
  CHECK_NOTHROW(c.validate());
  c.base_window = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config_for(0.9, 0.9);
  c.sample_low = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config_for(0.9, 0.9, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("initial boundary") {
  const auto w = stepped_workload(std::vector<std::size_t>(10, 0), 10);
  SolverConfig c;
  CHECK(initial_boundary_subset(w, c) == 4);
  c.initial_metric = 0.75;
  CHECK(initial_boundary_subset(w, c) == 7);
  c.initial_subset = 2;
  CHECK(initial_boundary_subset(w, c) == 2);
  c.initial_subset = 10;
  CHECK_THROWS_AS(initial_boundary_subset(w, c), ConfigError);
}

TEST_CASE("base with no requirement stops at the first check") {
  const auto w = generate({4000, 200, 14, 0.1, 5});
  LabelSource src(w, SourceKind::ground_truth);
  const auto s = base_search(w, config_for(0.0, 0.0), src);
  CHECK(s.partition.human_end() - s.partition.human_begin() == 1);
  CHECK(src.asked_count() == 200);
  check_solution_shape(w, s);
}

TEST_CASE("base on a separated workload freezes within a window") {
  std::vector<std::size_t> matches(20, 0);
  for (std::size_t k = 10; k < 20; ++k) matches[k] = 50;
  const auto w = stepped_workload(matches, 50);
  SolverConfig c = config_for(0.9, 0.9);
  c.initial_subset = 10;
  LabelSource src(w, SourceKind::ground_truth);
  const auto s = base_search(w, c, src);
  CHECK(s.partition.human_begin() >= 10 - c.base_window);
  CHECK(s.partition.human_end() <= 10 + c.base_window);
  CHECK(precision(w, s.labels).value == 1.0);
  CHECK(recall(w, s.labels).value == 1.0);
  check_solution_shape(w, s);
}

TEST_CASE("base on an all-unmatch workload labels everything unmatch") {
  const auto w = stepped_workload(std::vector<std::size_t>(12, 0), 20);
  LabelSource src(w, SourceKind::ground_truth);
  const auto s = base_search(w, config_for(0.9, 0.9), src);
  CHECK(s.partition.human_end() == w.subset_count());
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(s.labels.label(i) == Label::unmatch);
  CHECK(recall(w, s.labels).value == 1.0);
  CHECK(precision(w, s.labels).value == 1.0);
}

TEST_CASE("census all-sampling equals exhaustive search") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 5 + rng() % 26;
    const std::size_t size = 10;
    std::vector<std::size_t> matches(m);
    // Noisy rising proportions, sometimes not monotone.
    for (std::size_t k = 0; k < m; ++k) {
      const double p = static_cast<double>(k) / static_cast<double>(m - 1);
      const double noisy = std::clamp(p + (static_cast<double>(rng() % 5) - 2.0) * 0.08, 0.0, 1.0);
      matches[k] = static_cast<std::size_t>(std::lround(noisy * size));
    }
    const auto w = stepped_workload(matches, size);
    const double alpha = 0.6 + 0.05 * static_cast<double>(rng() % 8);
    const double beta = 0.6 + 0.05 * static_cast<double>(rng() % 8);
    SolverConfig c = config_for(alpha, beta);
    c.sample_size = size;
    LabelSource src(w, SourceKind::ground_truth);
    const auto s = all_sampling_search(w, c, src);
    const auto expected = oracle::exhaustive_bounds(matches, size, alpha, beta);
    CHECK(s.partition.human_begin() == expected.begin);
    CHECK(s.partition.human_end() == expected.end);
    CHECK(precision(w, s.labels).value >= alpha - 1e-12);
    CHECK(recall(w, s.labels).value >= beta - 1e-12);
  }
}

TEST_CASE("all-sampling with no recall requirement keeps the lower bound at the top") {
  const auto w = generate({4000, 200, 14, 0.0, 2});
  SolverConfig c = config_for(0.0, 0.0);
  LabelSource src(w, SourceKind::ground_truth);
  const auto s = all_sampling_search(w, c, src);
  CHECK(s.partition.human_begin() == w.subset_count());
  CHECK(s.partition.human_empty());
}

TEST_CASE("equal sampling fractions of one reproduce all-sampling") {
  const auto w = generate({8000, 200, 14, 0.1, 12});
  SolverConfig c = config_for(0.9, 0.9);
  c.seed = 77;
  c.sample_low = c.sample_high = 1.0;
  LabelSource a(w, SourceKind::ground_truth);
  LabelSource b(w, SourceKind::ground_truth);
  const auto all = all_sampling_search(w, c, a);
  const auto partial = partial_sampling_search(w, c, b);
  CHECK(all.partition == partial.partition);
  CHECK(all.human_cost() == partial.human_cost());
}

TEST_CASE("partial sampling spends far fewer samples than all-sampling") {
  SolverConfig c = config_for(0.9, 0.9);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = generate({100000, 200, 14, 0.1, seed});
    c.seed = seed;
    LabelSource a(w, SourceKind::ground_truth);
    LabelSource b(w, SourceKind::ground_truth);
    const auto all = all_sampling_search(w, c, a);
    const auto partial = partial_sampling_search(w, c, b);
    const std::size_t all_extra = all.human_cost() - all.partition.human_pairs(w).size();
    const std::size_t partial_extra = partial.human_cost() - partial.partition.human_pairs(w).size();
    const std::size_t budget = 25 * c.sample_size;  // ceil(500 * 0.05) subsets
    CHECK(partial_extra <= budget);
    CHECK(all_extra > 10 * partial_extra);
    check_solution_shape(w, partial);
  }
}

TEST_CASE("hybrid never exceeds its partial-sampling start") {
  SolverConfig c = config_for(0.9, 0.9);
  c.sample_low = 0.05;
  c.sample_high = 0.1;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto w = generate({20000, 200, 8.0 + seed, 0.1, seed});
    c.seed = seed;
    LabelSource a(w, SourceKind::ground_truth);
    LabelSource b(w, SourceKind::ground_truth);
    const auto partial = partial_sampling_search(w, c, a);
    const auto hybrid = hybrid_search(w, c, b);
    CHECK(hybrid.partition.human_begin() >= partial.partition.human_begin());
    CHECK(hybrid.partition.human_end() <= partial.partition.human_end());
    CHECK(hybrid.human_cost() <= partial.human_cost());
    check_solution_shape(w, hybrid);
  }
}

TEST_CASE("unsatisfiable requirements fall back to labeling everything") {
  // Matches spread evenly, so neither side can be certified at alpha = beta = 1.
  const auto w = stepped_workload(std::vector<std::size_t>(10, 10), 20);
  for (auto kind : {SolverKind::base, SolverKind::all_sampling}) {
    SolverConfig c = config_for(1.0, 1.0);
    LabelSource src(w, SourceKind::ground_truth);
    const auto s = solve(kind, w, c, src);
    CHECK(s.exhausted);
    CHECK(s.human_cost() == w.size());
    CHECK(precision(w, s.labels).value == 1.0);
    CHECK(recall(w, s.labels).value == 1.0);
  }
}

TEST_CASE("human region grows with the requirement") {
  const auto w = generate({20000, 200, 14, 0.1, 4});
  for (auto kind : {SolverKind::base, SolverKind::all_sampling, SolverKind::partial_sampling,
                    SolverKind::hybrid}) {
    CAPTURE(to_string(kind));
    std::size_t previous = 0;
    for (double q : {0.7, 0.75, 0.8, 0.85, 0.9, 0.95}) {
      SolverConfig c = config_for(q, q);
      c.sample_low = 0.05;
      c.sample_high = 0.1;
      c.seed = 3;
      LabelSource src(w, SourceKind::ground_truth);
      const auto s = solve(kind, w, c, src);
      const std::size_t size = s.partition.human_pairs(w).size();
      CHECK(size >= previous);
      previous = size;
    }
  }
}

TEST_CASE("a numerical failure in the fit falls back to all-sampling") {
  const auto w = generate({4000, 200, 14, 0.1, 1});
  SolverConfig c = config_for(0.9, 0.9);
  c.sample_low = 0.5;
  c.sample_high = 0.5;
  c.noise_variance = 0.0;
  c.kernel.signal_variance = std::numeric_limits<double>::infinity();
  LabelSource src(w, SourceKind::ground_truth);
  const auto s = partial_sampling_search(w, c, src);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("fell back") != std::string::npos);
  check_solution_shape(w, s);
}

TEST_CASE("solvers are deterministic under a seed") {
  const auto w = generate({20000, 200, 14, 0.1, 9});
  SolverConfig c = config_for(0.9, 0.9);
  c.sample_low = 0.05;
  c.sample_high = 0.1;
  c.seed = 5;
  for (auto kind : {SolverKind::all_sampling, SolverKind::partial_sampling, SolverKind::hybrid}) {
    LabelSource a(w, SourceKind::ground_truth);
    LabelSource b(w, SourceKind::ground_truth);
    const auto s1 = solve(kind, w, c, a);
    const auto s2 = solve(kind, w, c, b);
    CHECK(s1.partition == s2.partition);
    CHECK(s1.human_labeled == s2.human_labeled);
  }
}

TEST_CASE("empty workloads are rejected") {
  const Workload w({}, 10);
  LabelSource src(w, SourceKind::ground_truth);
  CHECK_THROWS_AS(base_search(w, config_for(0.9, 0.9), src), ContractViolation);
}
