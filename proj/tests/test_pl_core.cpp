#include <doctest.h>

#include <cmath>
#include <map>

#include "cppl/errors.hpp"
#include "cppl/oracles.hpp"
#include "cppl/pl_core.hpp"
#include "test_support.hpp"

using namespace cppl;
using cppl::testing::random_matrix;
using cppl::testing::random_vector;
using cppl::testing::to_std;
using cppl::testing::iota_set;

TEST_CASE("ranking stores a bijection and its inverse") {
  const Ranking r = Ranking::from_ordering({7, 2, 4});
  CHECK(r.members() == std::vector<int>{2, 4, 7});
  CHECK(r.positions() == std::vector<int>{2, 3, 1});
  CHECK(r.rank_of(7) == 1);
  CHECK(r.arm_at(2) == 2);
  for (int p = 1; p <= 3; ++p) CHECK(r.rank_of(r.arm_at(p)) == p);
  for (int a : r.members()) CHECK(r.arm_at(r.rank_of(a)) == a);
  CHECK(Ranking::from_ranks({4, 7, 2}, {3, 1, 2}) == r);

  CHECK_THROWS_AS(Ranking::from_ranks({0, 1, 2}, {1, 1, 2}), InvalidArgument);
  CHECK_THROWS_AS(Ranking::from_ranks({0, 1, 2}, {1, 2, 4}), InvalidArgument);
  CHECK_THROWS_AS(Ranking::from_ordering({3, 3}), InvalidArgument);
  CHECK_THROWS_AS(r.rank_of(5), InvalidArgument);
}

TEST_CASE("context matrix rejects non-finite entries and empty shapes") {
  Matrix m = Matrix::Ones(2, 3);
  m(1, 2) = std::nan("");
  CHECK_THROWS_AS(ContextMatrix{m}, InvalidArgument);
  CHECK_THROWS_AS(ContextMatrix{Matrix(0, 3)}, InvalidArgument);
  CHECK_THROWS_AS(UtilityVector::from_values(Vector::Constant(2, -1.0)), InvalidArgument);
}

TEST_CASE("contextual utilities") {
  Rng rng(11);
  ContextMatrix ctx(random_matrix(3, 4, rng));
  const UtilityVector zero = contextual_utilities(Vector::Zero(3), ctx);
  for (int i = 0; i < 4; ++i) CHECK(zero.value(i) == 1.0);

  Matrix x(2, 1);
  x << 0.0, 5.0;
  CHECK(contextual_utilities(Vector::Unit(2, 0), ContextMatrix(x)).value(0) == 1.0);

  const Vector theta = random_vector(3, rng, -2.0, 2.0);
  const UtilityVector v = contextual_utilities(theta, ctx);
  for (int i = 0; i < 4; ++i) {
    double dot = 0.0;
    for (int r = 0; r < 3; ++r) dot += theta(r) * ctx.matrix()(r, i);
    CHECK(std::abs(v.value(i) - std::exp(dot)) <= 1e-12 * std::exp(dot));
  }
  CHECK_THROWS_AS(contextual_utilities(Vector::Zero(2), ctx), InvalidArgument);
}

TEST_CASE("full ranking probabilities") {
  const auto equal3 = UtilityVector::from_values(Vector::Constant(3, 2.5));
  for (const auto& perm : oracle::permutations({0, 1, 2})) {
    CHECK(prob_full_ranking(equal3, Ranking::from_ordering(perm)) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  }
  CHECK(prob_full_ranking(UtilityVector::from_values(Vector::Constant(1, 0.3)),
                          Ranking::from_ordering({0})) == 1.0);
  CHECK_THROWS_AS(prob_full_ranking(equal3, Ranking::from_ordering({0, 1})), InvalidArgument);

  // Enumeration oracle: every n <= 5 sums to one and matches the direct product.
  Rng rng(3);
  for (int n = 1; n <= 5; ++n) {
    const Vector vals = random_vector(n, rng, 0.05, 4.0);
    const auto u = UtilityVector::from_values(vals);
    double total = 0.0;
    for (const auto& perm : oracle::permutations(iota_set(n))) {
      const double p = prob_full_ranking(u, Ranking::from_ordering(perm));
      CHECK(p == doctest::Approx(oracle::pl_product(to_std(vals), perm)).epsilon(1e-12));
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("partial ranking probabilities equal linear-extension sums") {
  Rng rng(5);
  const auto u1 = UtilityVector::from_values(random_vector(4, rng, 0.1, 2.0));
  CHECK(prob_partial_ranking(u1, {2}, Ranking::from_ordering({2})) == 1.0);

  const auto eq = UtilityVector::from_values(Vector::Constant(5, 0.7));
  CHECK(prob_partial_ranking(eq, {0, 3, 4}, Ranking::from_ordering({4, 0, 3})) ==
        doctest::Approx(1.0 / 6).epsilon(1e-14));

  for (int n = 2; n <= 5; ++n) {
    const Vector vals = random_vector(n, rng, 0.1, 3.0);
    const auto u = UtilityVector::from_values(vals);
    for (int m = 1; m <= std::min(3, n); ++m) {
      for (const auto& subset : oracle::combinations(n, m)) {
        for (const auto& order : oracle::permutations(subset)) {
          const double p = prob_partial_ranking(u, subset, Ranking::from_ordering(order));
          CHECK(std::abs(p - oracle::linear_extension_sum(to_std(vals), order)) < 1e-12);
        }
      }
    }
  }

  CHECK_THROWS_AS(prob_partial_ranking(u1, {}, Ranking::from_ordering({})), InvalidArgument);
  CHECK_THROWS_AS(prob_partial_ranking(u1, {0, 1}, Ranking::from_ordering({0, 2})), InvalidArgument);
}

TEST_CASE("top-rank probabilities") {
  Rng rng(8);
  const auto eq = UtilityVector::from_values(Vector::Constant(6, 3.0));
  CHECK(prob_top_rank(eq, {0, 2, 5, 1}, 5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(prob_top_rank(eq, {4}, 4) == 1.0);
  CHECK_THROWS_AS(prob_top_rank(eq, {0, 1}, 3), InvalidArgument);

  const Vector vals = random_vector(7, rng, 0.1, 5.0);
  const auto u = UtilityVector::from_values(vals);
  const ArmSet s{0, 2, 3, 5, 6};
  double total = 0.0;
  for (int a : s) total += prob_top_rank(u, s, a);
  CHECK(std::abs(total - 1.0) < 1e-12);

  // Marginalizing partial rankings of S that place `a` first.
  for (int a : s) {
    double marg = 0.0;
    for (const auto& order : oracle::permutations(s)) {
      if (order.front() == a) marg += prob_partial_ranking(u, s, Ranking::from_ordering(order));
    }
    CHECK(std::abs(marg - prob_top_rank(u, s, a)) < 1e-12);
  }
}

TEST_CASE("probabilities are scale invariant") {
  Rng rng(21);
  const Vector vals = random_vector(5, rng, 0.2, 2.0);
  const auto u = UtilityVector::from_values(vals);
  for (double c : {1e-3, 0.37, 12.0, 1e4}) {
    const auto uc = UtilityVector::from_values(c * vals);
    for (const auto& perm : oracle::permutations(iota_set(5))) {
      const Ranking r = Ranking::from_ordering(perm);
      CHECK(std::abs(prob_full_ranking(u, r) - prob_full_ranking(uc, r)) < 1e-12);
    }
    CHECK(std::abs(prob_top_rank(u, {1, 3, 4}, 3) - prob_top_rank(uc, {1, 3, 4}, 3)) < 1e-12);
  }
}

TEST_CASE("mode of the full-ranking distribution sorts utilities descending") {
  Rng rng(4);
  for (int n = 2; n <= 5; ++n) {
    const Vector vals = random_vector(n, rng, 0.1, 4.0);
    const auto u = UtilityVector::from_values(vals);
    std::vector<int> best;
    double best_p = -1.0;
    for (const auto& perm : oracle::permutations(iota_set(n))) {
      const double p = prob_full_ranking(u, Ranking::from_ordering(perm));
      if (p > best_p) {
        best_p = p;
        best = perm;
      }
    }
    for (std::size_t i = 1; i < best.size(); ++i) CHECK(vals(best[i - 1]) > vals(best[i]));
  }
}

TEST_CASE("log-space evaluation survives huge logits") {
  Vector logs(3);
  logs << 900.0, 905.0, 899.0;
  const auto u = UtilityVector::from_logs(logs);
  const double p = prob_top_rank(u, {0, 1, 2}, 1);
  CHECK(p == doctest::Approx(1.0 / (1.0 + std::exp(-5.0) + std::exp(-6.0))).epsilon(1e-12));
  CHECK(std::isfinite(prob_partial_ranking(u, {0, 1, 2}, Ranking::from_ordering({1, 0, 2}))));
}

TEST_CASE("partial ranking sampler realizes the PL marginal") {
  Rng rng(99);
  const auto u5 = UtilityVector::from_values(Vector::Constant(5, 1.0));
  CHECK(sample_partial_ranking(u5, {3}, rng) == Ranking::from_ordering({3}));

  const ArmSet s{0, 2, 4};
  std::map<std::vector<int>, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++counts[sample_partial_ranking(u5, s, rng).ordering()];
  CHECK(counts.size() == 6);
  for (const auto& [order, c] : counts) {
    const double expected = prob_partial_ranking(u5, s, Ranking::from_ordering(order));
    CHECK(std::abs(static_cast<double>(c) / draws - expected) < 0.01);
  }

  // Unequal utilities, compared against the closed form.
  Vector vals(3);
  vals << 1.0, 2.0, 4.0;
  const auto u = UtilityVector::from_values(vals);
  counts.clear();
  for (int i = 0; i < draws; ++i) ++counts[sample_partial_ranking(u, {0, 1, 2}, rng).ordering()];
  for (const auto& [order, c] : counts) {
    const double expected = prob_partial_ranking(u, {0, 1, 2}, Ranking::from_ordering(order));
    CHECK(std::abs(static_cast<double>(c) / draws - expected) < 0.01);
  }

  Rng a(7), b(7);
  for (int i = 0; i < 50; ++i) CHECK(sample_partial_ranking(u, {0, 1, 2}, a) == sample_partial_ranking(u, {0, 1, 2}, b));
}

TEST_CASE("winner sampler realizes the top-rank marginal") {
  Rng rng(123);
  const auto eq = UtilityVector::from_values(Vector::Constant(6, 2.0));
  CHECK(sample_winner(eq, {4}, rng) == 4);

  const ArmSet s{0, 1, 3, 5};
  std::map<int, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_winner(eq, s, rng)];
  for (int a : s) CHECK(std::abs(counts[a] / static_cast<double>(draws) - 0.25) < 0.006);

  Rng a(55), b(55);
  for (int i = 0; i < 100; ++i) CHECK(sample_winner(eq, s, a) == sample_winner(eq, s, b));
  CHECK_THROWS_AS(sample_winner(eq, {}, rng), InvalidArgument);
}
