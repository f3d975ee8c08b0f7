#include <doctest.h>

#include <cmath>
#include <random>

#include "erqc/errors.hpp"
#include "erqc/stratified.hpp"
#include "support.hpp"

using namespace erqc;
using erqc::testing::stepped_workload;

namespace {

// Cochran's stratified estimator written out term by term.
double oracle_std(const std::vector<StratumSample>& s) {
  double n = 0;
  for (const auto& x : s) n += x.population;
  double var = 0;
  for (const auto& x : s) {
    const double w = x.population / n;
    const double r = static_cast<double>(x.matches) / x.sample_size;
    const double s2 = r * (1 - r) * x.sample_size / (x.sample_size - 1.0);
    var += w * w * (1 - static_cast<double>(x.sample_size) / x.population) * s2 / x.sample_size;
  }
  return std::sqrt(var);
}

}  // namespace

TEST_CASE("stratified mean and std") {
  std::vector<StratumSample> zero = {{0, 100, 10, 0}, {1, 100, 10, 0}};
  CHECK(stratified_mean_std(zero).mean == 0.0);
  CHECK(stratified_mean_std(zero).std == 0.0);

  std::vector<StratumSample> census = {{0, 50, 50, 10}, {1, 150, 150, 90}};
  CHECK(stratified_mean_std(census).mean == doctest::Approx(100.0 / 200.0));
  CHECK(stratified_mean_std(census).std == 0.0);

  std::vector<StratumSample> two = {{0, 100, 10, 2}, {1, 100, 10, 4}};
  const MeanStd ms = stratified_mean_std(two);
  CHECK(ms.mean == doctest::Approx(0.3));
  CHECK(ms.std == doctest::Approx(oracle_std(two)).epsilon(1e-12));
  CHECK(ms.std == doctest::Approx(0.1));

  std::vector<StratumSample> thin = {{0, 100, 1, 0}};
  CHECK_THROWS_AS(stratified_mean_std(thin), ContractViolation);
  std::vector<StratumSample> one_pair_census = {{0, 1, 1, 1}, {1, 100, 10, 5}};
  CHECK_NOTHROW(stratified_mean_std(one_pair_census));
}

TEST_CASE("t quantiles") {
  CHECK(t_quantile(0.9, INFINITY) == doctest::Approx(1.6449).epsilon(1e-4));
  CHECK(t_quantile(0.95, 10) == doctest::Approx(2.2281).epsilon(1e-4));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.95996).epsilon(1e-5));
  CHECK(std::isfinite(t_quantile(0.999999, 5)));
  CHECK(t_quantile(0.999999, 5) == t_quantile(0.9999, 5));
  CHECK(t_quantile(0.9, 1e6) == doctest::Approx(normal_quantile(0.9)).epsilon(1e-4));
}

TEST_CASE("count intervals") {
  std::vector<StratumSample> census = {{0, 100, 100, 30}, {1, 100, 100, 70}};
  const auto c = count_interval(census, 0.9);
  CHECK(c.lower == doctest::Approx(100.0));
  CHECK(c.upper == doctest::Approx(100.0));

  std::vector<StratumSample> two = {{0, 100, 10, 2}, {1, 100, 10, 4}};
  const double t = t_quantile(0.9, 18);
  const auto i = count_interval(two, 0.9);
  CHECK(i.lower == doctest::Approx(200 * (0.3 - t * oracle_std(two))));
  CHECK(i.upper == doctest::Approx(200 * (0.3 + t * oracle_std(two))));
  CHECK(stratified_dof(two) == 18);

  std::vector<StratumSample> low = {{0, 100, 10, 1}};
  CHECK(count_interval(low, 0.99).lower == 0.0);
}

TEST_CASE("split confidence") {
  CHECK(split_confidence(0.81) == doctest::Approx(0.9));
  CHECK(split_confidence(0.9) == doctest::Approx(0.94868).epsilon(1e-5));
  CHECK(split_confidence(1.0) == 1.0);
}

TEST_CASE("draw_sample is a seeded census-consistent draw") {
  const auto w = stepped_workload({0, 5, 20, 20}, 20);
  LabelSource a(w, SourceKind::ground_truth);
  LabelSource b(w, SourceKind::ground_truth);
  const auto s1 = draw_sample(w, 1, 8, 42, a);
  const auto s2 = draw_sample(w, 1, 8, 42, b);
  CHECK(s1.matches == s2.matches);
  CHECK(a.asked_pairs() == b.asked_pairs());
  CHECK(a.asked_count() == 8);

  LabelSource c(w, SourceKind::ground_truth);
  CHECK(draw_sample(w, 1, 20, 1, c).proportion() == doctest::Approx(0.25));
  CHECK(draw_sample(w, 2, 3, 9, c).proportion() == 1.0);
  CHECK_THROWS_AS(draw_sample(w, 0, 21, 1, c), ContractViolation);
}

TEST_CASE("stratified counter agrees with count_interval on every range") {
  std::vector<StratumSample> s = {
      {0, 200, 20, 0}, {1, 200, 20, 3}, {2, 200, 20, 9}, {3, 200, 20, 17}, {4, 120, 20, 20}};
  const StratifiedCounter counter(s, 0.9);
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b <= s.size(); ++b) {
      const std::vector<StratumSample> run(s.begin() + a, s.begin() + b);
      const auto expected = count_interval(run, 0.9);
      const auto got = counter.interval(a, b);
      CHECK(got.lower == doctest::Approx(expected.lower));
      CHECK(got.upper == doctest::Approx(expected.upper));
    }
  }
  CHECK(counter.interval(2, 2).upper == 0.0);
}

TEST_CASE("interval coverage over Monte-Carlo replicates") {
  // Five strata of 200 with known match counts; the true total is fixed.
  const std::vector<std::size_t> matches = {20, 60, 100, 140, 180};
  const auto w = stepped_workload(matches, 200);
  const double truth = 500;
  for (double theta : {0.8, 0.9}) {
    int covered = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
      LabelSource src(w, SourceKind::ground_truth);
      std::vector<StratumSample> s;
      for (std::size_t k = 0; k < matches.size(); ++k) {
        s.push_back(draw_sample(w, k, 30, static_cast<std::uint64_t>(r) * 977 + k, src));
      }
      const auto ci = count_interval(s, theta);
      if (ci.lower <= truth && truth <= ci.upper) ++covered;
    }
    CHECK(static_cast<double>(covered) / reps >= theta - 0.02);
  }
}

TEST_CASE("interval width shrinks with sample size on average") {
  const auto w = stepped_workload({40, 100, 160}, 200);
  double previous = 1e18;
  for (std::size_t k : {5u, 20u, 80u}) {
    double width = 0;
    for (int r = 0; r < 200; ++r) {
      LabelSource src(w, SourceKind::ground_truth);
      std::vector<StratumSample> s;
      for (std::size_t i = 0; i < 3; ++i) s.push_back(draw_sample(w, i, k, r * 31 + i, src));
      const auto ci = count_interval(s, 0.9);
      width += ci.upper - ci.lower;
    }
    CHECK(width < previous);
    previous = width;
  }
}
