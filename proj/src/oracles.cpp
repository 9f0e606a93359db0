#include "cppl/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cppl::oracle {

std::vector<std::vector<int>> permutations(std::vector<int> items) {
  std::sort(items.begin(), items.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(items);
  } while (std::next_permutation(items.begin(), items.end()));
  return out;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

double pl_product(const std::vector<double>& v, const std::vector<int>& ordering) {
  double p = 1.0;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = i; j < ordering.size(); ++j) denom += v[static_cast<std::size_t>(ordering[j])];
    p *= v[static_cast<std::size_t>(ordering[i])] / denom;
  }
  return p;
}

double linear_extension_sum(const std::vector<double>& v, const std::vector<int>& ordering) {
  std::vector<int> all(v.size());
  std::iota(all.begin(), all.end(), 0);
  double total = 0.0;
  for (const auto& perm : permutations(all)) {
    // Keep perm if the members of `ordering` appear in that relative order.
    std::size_t next = 0;
    for (int a : perm) {
      if (next < ordering.size() && a == ordering[next]) {
        ++next;
      } else if (std::find(ordering.begin(), ordering.end(), a) != ordering.end()) {
        break;
      }
    }
    if (next == ordering.size()) total += pl_product(v, perm);
  }
  return total;
}

double loglik_ranking(const Vector& theta, const Matrix& x, const std::vector<int>& ordering) {
  double ll = 0.0;
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = i; j < ordering.size(); ++j) denom += std::exp(theta.dot(x.col(ordering[j])));
    ll += theta.dot(x.col(ordering[i])) - std::log(denom);
  }
  return ll;
}

double loglik_winner(const Vector& theta, const Matrix& x, const std::vector<int>& subset, int winner) {
  double denom = 0.0;
  for (int j : subset) denom += std::exp(theta.dot(x.col(j)));
  return theta.dot(x.col(winner)) - std::log(denom);
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& at, double h) {
  Vector g(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Vector up = at, dn = at;
    up(i) += h;
    dn(i) -= h;
    g(i) = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& at, double h) {
  const Vector f0 = f(at);
  Matrix j(f0.size(), at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Vector up = at, dn = at;
    up(i) += h;
    dn(i) -= h;
    j.col(i) = (f(up) - f(dn)) / (2.0 * h);
  }
  return j;
}

double rank_one_operator_norm(const Matrix& sigma, const Vector& x, const Vector& theta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  const Vector lam = es.eigenvalues().cwiseMax(0.0);
  const Matrix root = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Matrix m = std::exp(2.0 * x.dot(theta)) * x * x.transpose();
  const Matrix sandwich = root * m * root;
  Eigen::SelfAdjointEigenSolver<Matrix> es2(0.5 * (sandwich + sandwich.transpose()));
  return es2.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<int> best_subset_by_enumeration(const Vector& scores, int k) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> best;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (const auto& s : combinations(n, k)) {
    double sum = 0.0;
    for (int i : s) sum += scores(i);
    const double tol = 1e-12 * std::max(1.0, std::abs(best_sum));
    // combinations() is lexicographic, so only a strictly larger sum wins.
    if (best.empty() || sum > best_sum + tol) {
      best = s;
      best_sum = sum;
    }
  }
  return best;
}

double regret_formula(const std::vector<double>& v, const std::vector<int>& subset) {
  const double best = *std::max_element(v.begin(), v.end());
  double in_s = 0.0;
  for (int j : subset) in_s = std::max(in_s, v[static_cast<std::size_t>(j)]);
  return (best - in_s) / best;
}

namespace {

TailEstimate estimate(long hits, long draws) {
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

}  // namespace

TailEstimate f_tail_mc(int d1, int d2, double threshold, long draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::chi_squared_distribution<double> c1(d1), c2(d2);
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    const double f = (c1(gen) / d1) / (c2(gen) / d2);
    if (f >= threshold) ++hits;
  }
  return estimate(hits, draws);
}

TailEstimate chi2_upper_tail_mc(int d, double x, long draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::chi_squared_distribution<double> chi(d);
  const double cut = 2.0 * std::sqrt(d * x) + 2.0 * x;
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    if (chi(gen) - d >= cut) ++hits;
  }
  return estimate(hits, draws);
}

TailEstimate chi2_two_sided_mc(int d, double x, long draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::chi_squared_distribution<double> chi(d);
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    if (std::abs(chi(gen) - d) >= d * x) ++hits;
  }
  return estimate(hits, draws);
}

double relative_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-6);
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace cppl::oracle
