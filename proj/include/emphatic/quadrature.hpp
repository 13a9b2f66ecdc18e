#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace emphatic {

// Gauss-Hermite rule for expectations under a normal distribution:
//   E[f(A)], A ~ N(mean, std^2)  ~=  sum_i w_i / sqrt(pi) * f(mean + sqrt(2) std x_i)
class GaussHermite {
 public:
  static constexpr int kDefaultNodes = 64;

  explicit GaussHermite(int nodes = kDefaultNodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  template <typename F>
  double expectation(F&& f, double mean, double std) const {
    double acc = 0.0;
    const double scale = std::numbers::sqrt2 * std;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i)
      acc += prob_weights_(i) * f(mean + scale * nodes_(i));
    return acc;
  }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;       // physicists' weights, sum to sqrt(pi)
  Eigen::VectorXd prob_weights_;  // weights_ / sqrt(pi), sum to 1
};

/// The shared 64-node rule.
const GaussHermite& default_quadrature();
/// 32-node rule used as the error reference for the default rule.
const GaussHermite& coarse_quadrature();

/// Expectation with an error estimate from a coarser rule;
/// throws QuadratureFailure when the two disagree by more than `tolerance`.
template <typename F>
double checked_expectation(const GaussHermite& rule, const GaussHermite& coarse, F&& f,
                           double mean, double std, double tolerance);

}  // namespace emphatic

#include "emphatic/errors.hpp"

namespace emphatic {

template <typename F>
double checked_expectation(const GaussHermite& rule, const GaussHermite& coarse, F&& f,
                           double mean, double std, double tolerance) {
  const double fine = rule.expectation(f, mean, std);
  const double rough = coarse.expectation(f, mean, std);
  if (!(std::abs(fine - rough) <= tolerance))
    throw QuadratureFailure("Gauss-Hermite estimate unstable: |" + std::to_string(fine) + " - " +
                            std::to_string(rough) + "| exceeds tolerance " +
                            std::to_string(tolerance));
  return fine;
}

}  // namespace emphatic
