#include <doctest.h>

#include <cmath>

#include "cppl/errors.hpp"
#include "cppl/estimator.hpp"
#include "cppl/oracles.hpp"
#include "test_support.hpp"

using namespace cppl;
using cppl::testing::random_matrix;
using cppl::testing::random_observation;
using cppl::testing::random_vector;

namespace {

// Observation drawn from the contextual PL model with parameter theta_star.
Observation pl_observation(const Vector& theta_star, int n, int k, FeedbackMode mode, Rng& rng) {
  const int d = static_cast<int>(theta_star.size());
  ContextMatrix ctx(random_matrix(d, n, rng));
  ArmSet subset = random_subset(n, k, rng);
  const UtilityVector u = contextual_utilities(theta_star, ctx);
  Feedback fb = mode == FeedbackMode::kWinner ? Feedback(Winner{sample_winner(u, subset, rng)})
                                              : Feedback(sample_partial_ranking(u, subset, rng));
  return {std::move(fb), std::move(subset), std::move(ctx)};
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

EstimatorState random_state(int d, Rng& rng, long t) {
  EstimatorState s = make_estimator(random_vector(d, rng, -0.5, 0.5));
  for (long i = 0; i < t; ++i) {
    sgd_update_in_place(s, random_observation(d, 6, 3, FeedbackMode::kWinner, rng, 0.0, 1.0));
  }
  return s;
}

}  // namespace

TEST_CASE("estimator initialization") {
  Rng rng(1);
  const EstimatorState s = make_estimator(4, rng);
  CHECK(s.t == 0);
  CHECK(s.theta_hat == s.theta_bar);
  CHECK((s.theta_hat.array() >= 0.0).all());
  CHECK((s.theta_hat.array() < 1.0).all());
  CHECK_THROWS_AS(make_estimator(Vector::Zero(2), EstimatorConfig{2.0, 1.0, 1e-6}), ConfigError);
  CHECK_THROWS_AS(make_estimator(Vector::Zero(2), EstimatorConfig{0.0, 0.6, 1e-6}), ConfigError);
}

TEST_CASE("step sizes follow gamma1 * t^-alpha") {
  const EstimatorConfig cfg{2.0, 0.6, 1e-6};
  CHECK(step_size(cfg, 1) == 2.0);
  CHECK(step_size(cfg, 2) == doctest::Approx(2.0 * std::pow(2.0, -0.6)).epsilon(1e-15));

  Rng rng(2);
  EstimatorState s = make_estimator(random_vector(3, rng), cfg);
  for (long t = 1; t <= 2; ++t) {
    const Observation obs = random_observation(3, 5, 3, FeedbackMode::kWinner, rng);
    const Vector expected = s.theta_hat + step_size(cfg, t) * grad_loglik(s.theta_hat, obs);
    sgd_update_in_place(s, obs);
    CHECK((s.theta_hat - expected).norm() < 1e-14);
  }
}

TEST_CASE("zero-gradient update leaves the iterate and pulls the average toward it") {
  Rng rng(3);
  EstimatorState s = make_estimator(random_vector(3, rng));
  sgd_update_in_place(s, random_observation(3, 5, 4, FeedbackMode::kRanking, rng));
  sgd_update_in_place(s, random_observation(3, 5, 4, FeedbackMode::kRanking, rng));
  const Vector hat = s.theta_hat;
  const double gap_before = (s.theta_bar - hat).norm();
  REQUIRE(gap_before > 0.0);

  ContextMatrix ctx(random_matrix(3, 5, rng));
  s = sgd_update(s, Observation{Winner{2}, {2}, ctx});
  CHECK(s.theta_hat == hat);
  CHECK((s.theta_bar - hat).norm() < gap_before);
  CHECK_THROWS_AS(sgd_update(s, random_observation(2, 5, 2, FeedbackMode::kWinner, rng)), InvalidArgument);
}

TEST_CASE("running average equals the mean of stored iterates") {
  Rng rng(4);
  for (int run = 0; run < 5; ++run) {
    const int d = 2 + run;
    EstimatorState s = make_estimator(d, rng);
    Vector sum = Vector::Zero(d);
    const int T = 200 * (run + 1);
    for (int t = 1; t <= T; ++t) {
      sgd_update_in_place(s, random_observation(d, 6, 1 + t % 5, t % 2 ? FeedbackMode::kWinner : FeedbackMode::kRanking, rng));
      sum += s.theta_hat;
    }
    CHECK((s.theta_bar - sum / T).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.s_accum - s.s_accum.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.v_accum - s.v_accum.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eigenvalue(s.v_accum) >= -1e-10 * std::max(1.0, s.v_accum.norm()));
  }
}

TEST_CASE("averaged SGD is consistent on i.i.d. PL data") {
  Rng data(5);
  const Vector theta_star = random_vector(3, data);
  auto error_after = [&](int T) {
    Rng rng(77);
    Rng init(9);
    EstimatorState s = make_estimator(3, init);
    for (int t = 0; t < T; ++t) sgd_update_in_place(s, pl_observation(theta_star, 5, 3, FeedbackMode::kWinner, rng));
    return (s.theta_bar - theta_star).norm();
  };
  const double short_run = error_after(2000);
  const double long_run = error_after(20000);
  MESSAGE("error after 2000: " << short_run << ", after 20000: " << long_run);
  CHECK(long_run < short_run);
}

TEST_CASE("covariance") {
  EstimatorState s = make_estimator(Vector::Zero(2));
  CHECK_THROWS_AS(covariance(s), StateError);

  s.t = 3;
  s.s_accum << -1.0, 0.2, 0.2, -2.0;
  CHECK(covariance(s).isZero(0.0));

  // Hand computation: S = diag(-1, -4), V = diag(2, 1), t = 2.
  s.t = 2;
  s.s_accum = diag2(-2.0, -8.0);
  s.v_accum = diag2(4.0, 2.0);
  const Matrix sigma = covariance(s);
  CHECK(std::abs(sigma(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(sigma(1, 1) - 1.0 / 32.0) < 1e-12);
  CHECK(std::abs(sigma(0, 1)) < 1e-12);
  CHECK(std::abs(sigma(1, 0)) < 1e-12);
}

TEST_CASE("covariance is symmetric positive semi-definite") {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const EstimatorState s = random_state(2 + rep % 4, rng, 1 + rep * 7);
    const Matrix sigma = covariance(s);
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(min_eigenvalue(sigma) >= -1e-10);
  }
}

TEST_CASE("covariance ridge-shifts a singular Hessian average") {
  EstimatorState s = make_estimator(Vector::Zero(2), EstimatorConfig{2.0, 0.6, 1e-3});
  s.t = 4;
  s.v_accum = diag2(4.0, 8.0);
  // S_hat = 0, shifted to -1e-3 I: Sigma = V_hat / (t * eps^2).
  const Matrix sigma = covariance(s);
  CHECK(sigma(0, 0) == doctest::Approx(1.0 / (4.0 * 1e-6)).epsilon(1e-12));
  CHECK(sigma(1, 1) == doctest::Approx(2.0 / (4.0 * 1e-6)).epsilon(1e-12));
}

TEST_CASE("confidence widths") {
  Rng rng(7);
  EstimatorState s = make_estimator(random_vector(3, rng));
  ContextMatrix ctx(random_matrix(3, 5, rng));
  CHECK_THROWS_AS(confidence_widths(s, ctx, 1.0), StateError);

  // t = 1: log t = 0, so the radius is d.
  sgd_update_in_place(s, random_observation(3, 5, 3, FeedbackMode::kWinner, rng, 0.0, 1.0));
  const Matrix sigma = covariance(s);
  const ConfidenceWidths cw = confidence_widths(s, ctx, 1.5);
  for (int i = 0; i < 5; ++i) {
    const Vector x = ctx.column(i);
    const double info = std::exp(2.0 * x.dot(s.theta_bar)) * x.dot(sigma * x);
    CHECK(cw.widths(i) == doctest::Approx(1.5 * std::sqrt(3.0 * info)).epsilon(1e-12));
    CHECK(cw.utilities(i) == doctest::Approx(std::exp(x.dot(s.theta_bar))).epsilon(1e-14));
  }

  const ConfidenceWidths zero = confidence_widths(s, Matrix::Zero(3, 3), ctx, 1.0);
  CHECK(zero.widths.isZero(0.0));

  const ConfidenceWidths twice = confidence_widths(s, ctx, 3.0);
  CHECK((twice.widths - 2.0 * cw.widths).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-one closed form equals the eigen-decomposition operator norm") {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 4;
    const EstimatorState s = random_state(d, rng, 2 + rep);
    const Matrix sigma = covariance(s);
    ContextMatrix ctx(random_matrix(d, 6, rng));
    const ConfidenceWidths cw = confidence_widths(s, sigma, ctx, 1.0);
    const double lt = std::log(static_cast<double>(s.t));
    const double radius = 2.0 * lt + d + 2.0 * std::sqrt(d * lt);
    for (int i = 0; i < 6; ++i) {
      const double info = oracle::rank_one_operator_norm(sigma, ctx.column(i), s.theta_bar);
      const double expected = std::sqrt(radius * info);
      CHECK(std::abs(cw.widths(i) - expected) <= 1e-8 * expected);
    }
  }
}

TEST_CASE("confidence widths report overflow") {
  EstimatorState s = make_estimator(Vector::Constant(2, 400.0));
  s.t = 2;
  s.s_accum = diag2(-1.0, -1.0);
  s.v_accum = diag2(1.0, 1.0);
  ContextMatrix ctx(Matrix::Constant(2, 3, 1.0));
  CHECK_THROWS_AS(confidence_widths(s, ctx, 1.0), NumericOverflow);
}

TEST_CASE("F tail threshold and bound") {
  CHECK(f_tail_threshold(7, 0.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(f_tail_threshold(4, 1.0) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(f_tail_threshold(10, 2.0) == doctest::Approx(4.0 * (10.0 + 2.0 * std::sqrt(20.0) + 4.0) / 30.0).epsilon(1e-15));

  CHECK(f_tail_bound(100000, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const int d2_scale = static_cast<int>(256.0 / 3.0 * std::log(2.0));
  for (double x : {0.0, 0.5, 1.0, 3.0}) {
    CHECK(f_tail_bound(d2_scale + 1, x) < f_tail_bound(d2_scale, x));
    CHECK(f_tail_bound(d2_scale, x + 0.25) < f_tail_bound(d2_scale, x));
    CHECK(f_tail_bound(d2_scale, x) > 0.0);
    CHECK(f_tail_bound(d2_scale, x) <= 2.0);
  }

  const double s = f_tail_threshold(5, 1.0);
  const oracle::TailEstimate mc = oracle::f_tail_mc(5, 50, s, 1000000, 2024);
  MESSAGE("P(F(5,50) >= " << s << ") ~ " << mc.p << " +- " << mc.se << ", bound " << f_tail_bound(50, 1.0));
  CHECK(mc.p <= f_tail_bound(50, 1.0) + 3.0 * mc.se);
}

TEST_CASE("chi-square tail bounds") {
  const auto [u0, t0] = chi2_tail_bounds(9, 0.0);
  CHECK(u0 == 1.0);
  CHECK(t0 == 1.0);
  CHECK(chi2_tail_bounds(20, 0.4).second == doctest::Approx(std::exp(-0.6)).epsilon(1e-15));
  CHECK_THROWS_AS(chi2_tail_bounds(20, 0.5), DomainError);
  CHECK_THROWS_AS(chi2_two_sided_bound(20, 0.7), DomainError);
  CHECK(chi2_upper_tail_bound(20, 0.7) == doctest::Approx(std::exp(-0.7)));

  const oracle::TailEstimate mc = oracle::chi2_upper_tail_mc(10, 2.0, 1000000, 7);
  CHECK(mc.p <= chi2_upper_tail_bound(10, 2.0) + 3.0 * mc.se);
}
