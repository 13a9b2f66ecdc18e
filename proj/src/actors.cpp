#include "emphatic/actors.hpp"

namespace emphatic {

EmphaticTrace::EmphaticTrace(double lambda_a) : lambda_a_(lambda_a) {
  if (lambda_a < 0.0 || lambda_a > 1.0) throw ValidationError("lambda_a must lie in [0, 1]");
}

double EmphaticTrace::update(double gamma_t, double interest) {
  f_ = gamma_t * rho_prev_ * f_ + interest;
  if (!std::isfinite(f_))
    throw NonFiniteUpdate("follow-on trace overflowed (importance ratio products too large)");
  m_ = (1.0 - lambda_a_) * interest + lambda_a_ * f_;
  return m_;
}

Eigen::VectorXd DpgActor::propose(const ContinuousTransition& t, double dq_da,
                                  double weight) const {
  const Eigen::VectorXd x = features_.row(t.state).transpose();
  return (alpha_ * weight * dq_da) * policy_.action_grad(x);
}

Eigen::VectorXd DpgActor::step(const ContinuousTransition& t, double dq_da, double weight) {
  Eigen::VectorXd inc = propose(t, dq_da, weight);
  apply(inc);
  return inc;
}

void DpgActor::apply(const Eigen::VectorXd& inc) {
  require_finite(inc, "dpg actor");
  policy_.add_to_parameters(inc);
}

double exact_emphasis(const Eigen::VectorXd& m, const Eigen::VectorXd& d_mu, int s) {
  return d_mu(s) > 0.0 ? m(s) / d_mu(s) : 0.0;
}

}  // namespace emphatic
