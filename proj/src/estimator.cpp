#include "cppl/estimator.hpp"

#include <cmath>
#include <string>

#include "cppl/errors.hpp"

namespace cppl {

void validate(const EstimatorConfig& config) {
  if (!(config.gamma1 > 0.0)) throw ConfigError("gamma1 must be positive");
  if (!(config.alpha > 0.5 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (1/2, 1)");
  if (!(config.ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
}

EstimatorState make_estimator(Vector theta0, EstimatorConfig config) {
  validate(config);
  if (theta0.size() < 1) throw InvalidArgument("estimator dimension must be >= 1");
  const Eigen::Index d = theta0.size();
  EstimatorState s;
  s.theta_bar = theta0;
  s.theta_hat = std::move(theta0);
  s.s_accum = Matrix::Zero(d, d);
  s.v_accum = Matrix::Zero(d, d);
  s.config = config;
  return s;
}

EstimatorState make_estimator(int d, Rng& rng, EstimatorConfig config) {
  if (d < 1) throw InvalidArgument("estimator dimension must be >= 1");
  Vector theta0(d);
  for (int i = 0; i < d; ++i) theta0(i) = rng.uniform();
  return make_estimator(std::move(theta0), config);
}

double step_size(const EstimatorConfig& config, long t) {
  return config.gamma1 * std::pow(static_cast<double>(t), -config.alpha);
}

void sgd_update_in_place(EstimatorState& state, const Observation& obs) {
  if (obs.context.dim() != state.dim()) {
    throw InvalidArgument("observation dimension " + std::to_string(obs.context.dim()) +
                          " does not match estimator dimension " + std::to_string(state.dim()));
  }
  const long t = state.t + 1;
  // Gradient ascent from the previous iterate.
  state.theta_hat += step_size(state.config, t) * grad_loglik(state.theta_hat, obs);
  const double td = static_cast<double>(t);
  state.theta_bar = ((td - 1.0) / td) * state.theta_bar + state.theta_hat / td;
  state.t = t;

  const LikelihoodDerivatives at_bar = loglik_derivatives(state.theta_bar, obs);
  state.s_accum += at_bar.hessian;
  state.v_accum.selfadjointView<Eigen::Lower>().rankUpdate(at_bar.gradient);
  state.v_accum.triangularView<Eigen::StrictlyUpper>() = state.v_accum.transpose();
}

EstimatorState sgd_update(EstimatorState state, const Observation& obs) {
  sgd_update_in_place(state, obs);
  return state;
}

Matrix covariance(const EstimatorState& state) {
  if (state.t < 1) throw StateError("covariance requires at least one update");
  const double t = static_cast<double>(state.t);
  const Eigen::Index d = state.s_accum.rows();
  const Matrix v_hat = state.v_accum / t;
  if (v_hat.isZero(0.0)) return Matrix::Zero(d, d);

  const Matrix s_hat = 0.5 * (state.s_accum + state.s_accum.transpose()) / t;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s_hat);
  Vector lambda = eig.eigenvalues();
  const double eps = state.config.ridge;
  if (lambda.cwiseAbs().minCoeff() < eps) lambda.array() -= eps;
  const Matrix& q = eig.eigenvectors();
  const Matrix s_inv = q * lambda.cwiseInverse().asDiagonal() * q.transpose();
  Matrix sigma = s_inv * v_hat * s_inv / t;
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  if (!sigma.allFinite()) throw NumericOverflow("covariance estimate is not finite");
  return sigma;
}

ConfidenceWidths confidence_widths(const EstimatorState& state, const ContextMatrix& context,
                                   double omega) {
  return confidence_widths(state, covariance(state), context, omega);
}

ConfidenceWidths confidence_widths(const EstimatorState& state, const Matrix& sigma,
                                   const ContextMatrix& context, double omega) {
  if (state.t < 1) throw StateError("confidence widths require at least one update");
  if (context.dim() != state.dim()) throw InvalidArgument("context dimension mismatch");
  if (!(omega >= 0.0)) throw InvalidArgument("omega must be nonnegative");
  const double d = state.dim();
  const double log_t = std::log(static_cast<double>(state.t));
  const double radius = 2.0 * log_t + d + 2.0 * std::sqrt(d * log_t);

  const Matrix& x = context.matrix();
  const Vector logits = x.transpose() * state.theta_bar;
  const int n = context.arms();
  ConfidenceWidths out{Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    // M = e^{2 x'theta} x x' is rank one, so ||Sigma^1/2 M Sigma^1/2||_op
    // collapses to e^{2 x'theta} x' Sigma x.
    const double quad = std::max(0.0, x.col(i).dot(sigma * x.col(i)));
    const double info = std::exp(2.0 * logits(i)) * quad;
    out.widths(i) = omega * std::sqrt(radius * info);
    out.utilities(i) = std::exp(logits(i));
  }
  if (!out.widths.allFinite() || !out.utilities.allFinite()) {
    throw NumericOverflow("confidence widths overflowed");
  }
  return out;
}

double f_tail_threshold(int d1, double x) {
  if (d1 < 1) throw DomainError("d1 must be >= 1");
  if (x < 0.0) throw DomainError("x must be >= 0");
  const double dd = d1;
  return 4.0 * (dd + 2.0 * std::sqrt(dd * x) + 2.0 * x) / (3.0 * dd);
}

double f_tail_bound(int d2, double x) {
  if (d2 < 1) throw DomainError("d2 must be >= 1");
  if (x < 0.0) throw DomainError("x must be >= 0");
  return std::exp(-x) + std::exp(-3.0 * d2 / 256.0);
}

double chi2_upper_tail_bound(int d, double x) {
  if (d < 1) throw DomainError("d must be >= 1");
  if (x < 0.0) throw DomainError("x must be >= 0");
  return std::exp(-x);
}

double chi2_two_sided_bound(int d, double x) {
  if (d < 1) throw DomainError("d must be >= 1");
  if (x < 0.0 || x >= 0.5) throw DomainError("two-sided chi-square bound needs x in [0, 1/2)");
  return std::exp(-3.0 * d * x * x / 16.0);
}

std::pair<double, double> chi2_tail_bounds(int d, double x) {
  return {chi2_upper_tail_bound(d, x), chi2_two_sided_bound(d, x)};
}

}  // namespace cppl
