#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "erqc/errors.hpp"
#include "erqc/stratified.hpp"

namespace erqc::gp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Squared-exponential kernel plus i.i.d. observation noise.
template <typename Scalar>
struct Hyperparameters {
  Scalar signal_variance = Scalar(0.25);
  Scalar length_scale = Scalar(0.1);
  Scalar noise_variance = Scalar(0);
};

enum class HyperPolicy { fixed, grid_search };

template <typename Scalar>
Matrix<Scalar> squared_exponential(const Eigen::Ref<const Vector<Scalar>>& a,
                                   const Eigen::Ref<const Vector<Scalar>>& b,
                                   const Hyperparameters<Scalar>& h) {
  const Scalar inv = Scalar(-0.5) / (h.length_scale * h.length_scale);
  Matrix<Scalar> k(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const Scalar d = a(i) - b(j);
      k(i, j) = h.signal_variance * std::exp(inv * d * d);
    }
  }
  return k;
}

template <typename Scalar>
struct Posterior {
  Vector<Scalar> query;
  Vector<Scalar> mean;
  Matrix<Scalar> covariance;
};

/// Zero-mean GP regression of match proportion against subset similarity.
template <typename Scalar>
class Model {
 public:
  static Model fit(Vector<Scalar> inputs, Vector<Scalar> targets, Hyperparameters<Scalar> hyper,
                   HyperPolicy policy = HyperPolicy::fixed) {
    if (inputs.size() != targets.size()) throw ContractViolation("inputs and targets differ in size");
    if (inputs.size() < 2) throw ContractViolation("a GP fit needs at least two points");
    Model best;
    best.inputs_ = std::move(inputs);
    best.targets_ = std::move(targets);
    best.hyper_ = hyper;
    best.factorize();
    if (policy == HyperPolicy::grid_search) {
      Scalar best_lml = best.log_marginal_likelihood();
      for (Scalar ell : length_scale_grid()) {
        for (Scalar sv : signal_variance_grid()) {
          Model candidate;
          candidate.inputs_ = best.inputs_;
          candidate.targets_ = best.targets_;
          candidate.hyper_ = {sv, ell, hyper.noise_variance};
          try {
            candidate.factorize();
          } catch (const NumericalError&) {
            continue;
          }
          const Scalar lml = candidate.log_marginal_likelihood();
          if (lml > best_lml) {
            best_lml = lml;
            best = std::move(candidate);
          }
        }
      }
    }
    return best;
  }

  static std::vector<Scalar> length_scale_grid() {
    return {Scalar(0.02), Scalar(0.05), Scalar(0.1), Scalar(0.2), Scalar(0.3), Scalar(0.5)};
  }
  static std::vector<Scalar> signal_variance_grid() {
    return {Scalar(0.05), Scalar(0.1), Scalar(0.25), Scalar(0.5), Scalar(1)};
  }

  const Vector<Scalar>& inputs() const noexcept { return inputs_; }
  const Vector<Scalar>& targets() const noexcept { return targets_; }
  const Hyperparameters<Scalar>& hyperparameters() const noexcept { return hyper_; }
  Scalar jitter() const noexcept { return jitter_; }

  Scalar log_marginal_likelihood() const {
    const Eigen::Index n = inputs_.size();
    Scalar log_det = 0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt_.matrixL()(i, i));
    return Scalar(-0.5) * targets_.dot(weights_) - log_det -
           Scalar(0.5) * Scalar(n) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  }

  Scalar mean_at(Scalar v) const {
    Vector<Scalar> q(1);
    q(0) = v;
    return (squared_exponential<Scalar>(q, inputs_, hyper_) * weights_)(0);
  }

  /// Joint posterior of the latent proportions at `query`:
  /// mean K(q,V) K^-1 R and covariance K(q,q) - K(q,V) K^-1 K(V,q).
  Posterior<Scalar> posterior(const Eigen::Ref<const Vector<Scalar>>& query) const {
    Posterior<Scalar> out;
    out.query = query;
    const Matrix<Scalar> cross = squared_exponential<Scalar>(inputs_, query, hyper_);
    out.mean = cross.transpose() * weights_;
    const Matrix<Scalar> half = llt_.matrixL().solve(cross);
    out.covariance = squared_exponential<Scalar>(query, query, hyper_);
    out.covariance.noalias() -= half.transpose() * half;
    out.covariance = Scalar(0.5) * (out.covariance + out.covariance.transpose()).eval();
    for (Eigen::Index i = 0; i < out.covariance.rows(); ++i) {
      Scalar& d = out.covariance(i, i);
      if (!std::isfinite(d)) throw NumericalError("posterior variance is not finite");
      if (d < Scalar(0)) {
        if (d < Scalar(-1e-8) * hyper_.signal_variance) {
          std::ostringstream msg;
          msg << "posterior variance " << d << " is negative; condition estimate "
              << condition_estimate();
          throw NumericalError(msg.str());
        }
        d = Scalar(0);
      }
    }
    return out;
  }

  // Ratio of the extreme Cholesky pivots, squared.
  Scalar condition_estimate() const {
    const Vector<Scalar> diag = llt_.matrixLLT().diagonal();
    const Scalar lo = diag.minCoeff();
    const Scalar hi = diag.maxCoeff();
    return (hi * hi) / (lo * lo);
  }

 private:
  void factorize() {
    const Eigen::Index n = inputs_.size();
    const Matrix<Scalar> k = squared_exponential<Scalar>(inputs_, inputs_, hyper_);
    const Scalar scale = std::max(hyper_.signal_variance, std::numeric_limits<Scalar>::min());
    Scalar jitter = 0;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Matrix<Scalar> kn = k;
      kn.diagonal().array() += hyper_.noise_variance + jitter;
      llt_.compute(kn);
      if (llt_.info() == Eigen::Success) {
        const Vector<Scalar> diag = llt_.matrixLLT().diagonal();
        const Scalar min_pivot = diag.minCoeff();
        if (std::isfinite(min_pivot) &&
            min_pivot * min_pivot > Scalar(1e-12) * kn.diagonal().maxCoeff()) {
          jitter_ = jitter;
          weights_ = llt_.solve(targets_);
          return;
        }
      }
      jitter = jitter == Scalar(0) ? Scalar(1e-10) * scale : jitter * Scalar(10);
    }
    std::ostringstream msg;
    msg << "kernel matrix of " << n << " points is not positive definite after jitter "
        << jitter << " (signal " << hyper_.signal_variance << ", length " << hyper_.length_scale
        << ", noise " << hyper_.noise_variance << ")";
    throw NumericalError(msg.str());
  }

  Vector<Scalar> inputs_;
  Vector<Scalar> targets_;
  Hyperparameters<Scalar> hyper_;
  Scalar jitter_ = 0;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Vector<Scalar> weights_;
};

struct AggregateCount {
  CountInterval interval;
  double mean = 0.0;
  double std = 0.0;
  bool variance_clamped = false;
};

/// Interval on the total match count of subsets with sizes `sizes` whose
/// proportions follow `post`: mean n.R, sd sqrt(n' C n), +- z at two-sided theta.
template <typename Scalar>
AggregateCount aggregate_count_interval(const Posterior<Scalar>& post,
                                        const Eigen::Ref<const Vector<Scalar>>& sizes,
                                        double theta) {
  if (sizes.size() != post.mean.size()) throw ContractViolation("sizes do not match the posterior");
  AggregateCount out;
  const double total = static_cast<double>(sizes.sum());
  out.mean = static_cast<double>(sizes.dot(post.mean));
  double var = static_cast<double>(sizes.dot(post.covariance * sizes));
  if (var < 0.0) {
    out.variance_clamped = true;
    var = 0.0;
  }
  out.std = std::sqrt(var);
  const double z = normal_quantile(theta);
  out.interval = {std::clamp(out.mean - z * out.std, 0.0, total),
                  std::clamp(out.mean + z * out.std, 0.0, total), theta};
  return out;
}

/// O(1) aggregate intervals over contiguous runs of the posterior's query
/// subsets, via 2-D prefix sums of n_i n_j cov_ij.
template <typename Scalar>
class RangeCounter {
 public:
  RangeCounter(const Posterior<Scalar>& post, const Eigen::Ref<const Vector<Scalar>>& sizes,
               double confidence)
      : confidence_(confidence), z_(normal_quantile(confidence)) {
    const Eigen::Index m = post.mean.size();
    if (sizes.size() != m) throw ContractViolation("sizes do not match the posterior");
    mean_prefix_.assign(static_cast<std::size_t>(m) + 1, 0.0);
    size_prefix_.assign(static_cast<std::size_t>(m) + 1, 0.0);
    stride_ = static_cast<std::size_t>(m) + 1;
    cov_prefix_.assign(stride_ * stride_, 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      mean_prefix_[i + 1] = mean_prefix_[i] + static_cast<double>(sizes(i) * post.mean(i));
      size_prefix_[i + 1] = size_prefix_[i] + static_cast<double>(sizes(i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        row += static_cast<double>(sizes(i) * sizes(j) * post.covariance(i, j));
        at(i + 1, j + 1) = at(i, j + 1) + row;
      }
    }
  }

  std::size_t subset_count() const noexcept { return stride_ - 1; }

  AggregateCount interval(std::size_t first, std::size_t last_exclusive) const {
    if (first > last_exclusive || last_exclusive >= stride_) {
      throw ContractViolation("subset range out of bounds");
    }
    AggregateCount out;
    if (first == last_exclusive) {
      out.interval = {0.0, 0.0, confidence_};
      return out;
    }
    const double n = size_prefix_[last_exclusive] - size_prefix_[first];
    out.mean = mean_prefix_[last_exclusive] - mean_prefix_[first];
    double var = at(last_exclusive, last_exclusive) - at(first, last_exclusive) -
                 at(last_exclusive, first) + at(first, first);
    if (var < 0.0) {
      out.variance_clamped = var < -1e-9 * (1.0 + n * n);
      var = 0.0;
    }
    out.std = std::sqrt(var);
    out.interval = {std::clamp(out.mean - z_ * out.std, 0.0, n),
                    std::clamp(out.mean + z_ * out.std, 0.0, n), confidence_};
    return out;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return cov_prefix_[i * stride_ + j]; }
  double at(std::size_t i, std::size_t j) const { return cov_prefix_[i * stride_ + j]; }
  double& at(Eigen::Index i, Eigen::Index j) {
    return at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }

  double confidence_;
  double z_;
  std::size_t stride_ = 1;
  std::vector<double> mean_prefix_;
  std::vector<double> size_prefix_;
  std::vector<double> cov_prefix_;
};

}  // namespace erqc::gp
