#include "emphatic/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "emphatic/errors.hpp"

namespace emphatic {

namespace {

// Physicists' Hermite polynomial H_n(x) and its derivative via the three-term
// recurrence, normalised to avoid overflow for n = 64 and |x| ~ 11.
void hermite_normalised(int n, double x, double& value, double& derivative) {
  // orthonormal recurrence: p_{k+1} = x sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1}
  double p_prev = 0.0;
  double p = std::pow(std::numbers::pi, -0.25);
  for (int k = 0; k < n; ++k) {
    const double next = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(static_cast<double>(k) / (k + 1)) * p_prev;
    p_prev = p;
    p = next;
  }
  value = p;
  derivative = std::sqrt(2.0 * n) * p_prev;
}

}  // namespace

GaussHermite::GaussHermite(int nodes) {
  if (nodes < 1) throw ValidationError("Gauss-Hermite rule needs at least one node");
  // Golub-Welsch starting guesses, polished by Newton on the orthonormal polynomial.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k, k - 1) = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  std::vector<double> x(eig.eigenvalues().data(), eig.eigenvalues().data() + nodes);
  nodes_.resize(nodes);
  weights_.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    double xi = x[static_cast<std::size_t>(i)];
    double value = 0.0;
    double derivative = 0.0;
    for (int iter = 0; iter < 8; ++iter) {
      hermite_normalised(nodes, xi, value, derivative);
      const double step = value / derivative;
      xi -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(xi))) break;
    }
    hermite_normalised(nodes, xi, value, derivative);
    nodes_(i) = xi;
    weights_(i) = 2.0 / (derivative * derivative);
  }
  // symmetrise so that odd moments vanish to rounding
  for (int i = 0; i < nodes / 2; ++i) {
    const int j = nodes - 1 - i;
    const double xs = 0.5 * (nodes_(j) - nodes_(i));
    const double ws = 0.5 * (weights_(i) + weights_(j));
    nodes_(i) = -xs;
    nodes_(j) = xs;
    weights_(i) = ws;
    weights_(j) = ws;
  }
  if (nodes % 2 == 1) nodes_(nodes / 2) = 0.0;
  prob_weights_ = weights_ / std::sqrt(std::numbers::pi);
}

const GaussHermite& default_quadrature() {
  static const GaussHermite rule(GaussHermite::kDefaultNodes);
  return rule;
}

const GaussHermite& coarse_quadrature() {
  static const GaussHermite rule(GaussHermite::kDefaultNodes / 2);
  return rule;
}

}  // namespace emphatic
