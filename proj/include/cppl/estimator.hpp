#pragma once

// Polyak-Ruppert averaged SGD on the PL log-likelihood, the sandwich
// covariance estimate built from it, UCB confidence widths, and the
// F / chi-square tail bounds that motivate the width formula.

#include <utility>

#include "cppl/likelihood.hpp"

namespace cppl {

struct EstimatorConfig {
  double gamma1 = 2.0;
  double alpha = 0.6;
  // Shift applied to the averaged Hessian before inversion when it is
  // (nearly) singular.
  double ridge = 1e-6;
};

void validate(const EstimatorConfig& config);

struct EstimatorState {
  Vector theta_hat;  // last SGD iterate
  Vector theta_bar;  // running average of the iterates
  long t = 0;        // number of updates applied
  Matrix s_accum;    // sum of Hessians at the averaged iterates
  Matrix v_accum;    // sum of gradient outer products at the averaged iterates
  EstimatorConfig config;

  int dim() const { return static_cast<int>(theta_hat.size()); }
};

// theta_hat_0 = theta_bar_0 = theta0.
EstimatorState make_estimator(Vector theta0, EstimatorConfig config = {});
// theta_hat_0 drawn i.i.d. uniform on [0, 1]^d.
EstimatorState make_estimator(int d, Rng& rng, EstimatorConfig config = {});

// gamma1 * t^-alpha.
double step_size(const EstimatorConfig& config, long t);

// One ascent step on the log-likelihood of `obs` followed by the averaging
// and accumulator updates.
EstimatorState sgd_update(EstimatorState state, const Observation& obs);
void sgd_update_in_place(EstimatorState& state, const Observation& obs);

// t^-1 S^-1 V S^-1 with S = s_accum / t (ridge-shifted if needed) and
// V = v_accum / t. Symmetric positive semi-definite.
Matrix covariance(const EstimatorState& state);

struct ConfidenceWidths {
  Vector widths;     // c_{t,i}
  Vector utilities;  // exp(x_i' theta_bar)
};

// Requires t >= 1.
ConfidenceWidths confidence_widths(const EstimatorState& state, const ContextMatrix& context,
                                   double omega);

// Same widths against a precomputed covariance.
ConfidenceWidths confidence_widths(const EstimatorState& state, const Matrix& sigma,
                                   const ContextMatrix& context, double omega);

// Threshold s = 4 (d1 + 2 sqrt(d1 x) + 2x) / (3 d1) for F(d1, d2) tails.
double f_tail_threshold(int d1, double x);
// exp(-x) + exp(-3 d2 / 256), an upper bound on P(F(d1, d2) >= s).
double f_tail_bound(int d2, double x);

// Bound on P(Y - d >= 2 sqrt(d x) + 2x) for Y ~ chi2(d), x >= 0.
double chi2_upper_tail_bound(int d, double x);
// Bound on P(|Y - d| >= d x) for Y ~ chi2(d), 0 <= x < 1/2.
double chi2_two_sided_bound(int d, double x);
// Both of the above; throws DomainError for x >= 1/2.
std::pair<double, double> chi2_tail_bounds(int d, double x);

}  // namespace cppl
