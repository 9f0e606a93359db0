#include "cppl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cppl/errors.hpp"

namespace cppl {

double instant_regret(const UtilityVector& true_utils, const ArmSet& subset) {
  check_subset(subset, true_utils.size());
  const double best = true_utils.logs().maxCoeff();
  double in_subset = -std::numeric_limits<double>::infinity();
  for (int j : subset) in_subset = std::max(in_subset, true_utils.log_value(j));
  return std::clamp(1.0 - std::exp(in_subset - best), 0.0, 1.0);
}

int best_arm(const UtilityVector& utils) {
  Eigen::Index idx = 0;
  utils.logs().maxCoeff(&idx);  // first maximal index
  return static_cast<int>(idx);
}

Feedback sample_feedback(const UtilityVector& true_utils, const ArmSet& subset, FeedbackMode mode,
                         Rng& rng) {
  if (mode == FeedbackMode::kWinner) return Winner{sample_winner(true_utils, subset, rng)};
  return sample_partial_ranking(true_utils, subset, rng);
}

// ---------------------------------------------------------------------------

void validate(const SyntheticScenario& s) {
  if (s.n < 2 || s.d < 1 || s.k < 1 || s.T < 0) throw ConfigError("synthetic scenario: bad sizes");
  if (s.k >= s.n) throw ConfigError("synthetic scenario: k must be < n");
  if (s.theta_star.size() != s.d) throw ConfigError("synthetic scenario: theta* has wrong length");
  if ((s.theta_star.array() < 0.0).any() || (s.theta_star.array() > 1.0).any()) {
    throw ConfigError("synthetic scenario: theta* entries must lie in [0, 1]");
  }
}

SyntheticScenario make_synthetic_scenario(int n, int d, int k, int T, std::uint64_t seed) {
  SyntheticScenario s{n, d, k, T, Vector(std::max(d, 0)), seed};
  Rng rng = Rng::derive({seed, static_cast<std::uint64_t>(Stream::kTheta)});
  for (int i = 0; i < d; ++i) s.theta_star(i) = rng.uniform();
  validate(s);
  return s;
}

ContextMatrix synthetic_round(const SyntheticScenario& scenario, int t) {
  Rng rng = Rng::derive({scenario.seed, static_cast<std::uint64_t>(Stream::kContext),
                         static_cast<std::uint64_t>(t)});
  Matrix x(scenario.d, scenario.n);
  for (int i = 0; i < scenario.n; ++i) {
    for (int r = 0; r < scenario.d; ++r) x(r, i) = rng.uniform();
  }
  return ContextMatrix(std::move(x), t);
}

UtilityVector true_utilities(const Vector& theta_star, const ContextMatrix& context) {
  return contextual_utilities(theta_star, context);
}

SyntheticEnvironment::SyntheticEnvironment(SyntheticScenario scenario)
    : scenario_(std::move(scenario)) {
  validate(scenario_);
}

std::pair<ContextMatrix, UtilityVector> SyntheticEnvironment::round(int t) {
  ContextMatrix x = synthetic_round(scenario_, t);
  UtilityVector v = true_utilities(scenario_.theta_star, x);
  return {std::move(x), std::move(v)};
}

Feedback SyntheticEnvironment::feedback(int t, const UtilityVector& true_utils,
                                        const ArmSet& subset, FeedbackMode mode) {
  Rng rng = Rng::derive({scenario_.seed, static_cast<std::uint64_t>(Stream::kFeedback),
                         static_cast<std::uint64_t>(t)});
  return sample_feedback(true_utils, subset, mode, rng);
}

// ---------------------------------------------------------------------------
// CSV loading

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " +
                    std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError("'" + path + "' is empty");
  return t;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": '" + s + "' is not a number");
  }
}

}  // namespace

Matrix load_solver_features(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const std::vector<std::string> expected{"alpha", "rho", "ps", "wp"};
  if (csv.header != expected) throw IoError(path + ": header must be alpha,rho,ps,wp");
  Matrix m(static_cast<Eigen::Index>(csv.rows.size()), 4);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(csv.rows[r][c], path + ":" + std::to_string(r + 2));
    }
  }
  return m;
}

RuntimeTable load_runtime_table(const std::string& runtimes_path,
                                const std::string& instance_features_path,
                                const std::string& solver_features_path) {
  const CsvTable rt = read_csv(runtimes_path);
  if (rt.header.size() < 2 || rt.header.front() != "instance_id") {
    throw IoError(runtimes_path + ": header must start with instance_id");
  }
  for (std::size_t c = 1; c < rt.header.size(); ++c) {
    if (rt.header[c] != "solver_" + std::to_string(c - 1)) {
      throw IoError(runtimes_path + ": column " + std::to_string(c) + " must be solver_" +
                    std::to_string(c - 1));
    }
  }
  const auto n_inst = static_cast<Eigen::Index>(rt.rows.size());
  const auto n_solv = static_cast<Eigen::Index>(rt.header.size() - 1);

  RuntimeTable table;
  table.runtimes.resize(n_inst, n_solv);
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (Eigen::Index r = 0; r < n_inst; ++r) {
    const auto& row = rt.rows[static_cast<std::size_t>(r)];
    if (!row_of.emplace(row[0], r).second) {
      throw IoError(runtimes_path + ": duplicate instance_id '" + row[0] + "'");
    }
    table.instance_ids.push_back(row[0]);
    for (Eigen::Index c = 0; c < n_solv; ++c) {
      table.runtimes(r, c) = parse_double(row[static_cast<std::size_t>(c) + 1],
                                          runtimes_path + ":" + std::to_string(r + 2));
    }
  }

  const CsvTable ft = read_csv(instance_features_path);
  if (ft.header.size() < 2 || ft.header.front() != "instance_id") {
    throw IoError(instance_features_path + ": header must start with instance_id");
  }
  for (std::size_t c = 1; c < ft.header.size(); ++c) {
    if (ft.header[c] != "f" + std::to_string(c - 1)) {
      throw IoError(instance_features_path + ": column " + std::to_string(c) + " must be f" +
                    std::to_string(c - 1));
    }
  }
  if (static_cast<Eigen::Index>(ft.rows.size()) != n_inst) {
    throw IoError(instance_features_path + ": instance count differs from the runtime table");
  }
  const auto p = static_cast<Eigen::Index>(ft.header.size() - 1);
  table.instance_features.resize(n_inst, p);
  std::vector<bool> filled(static_cast<std::size_t>(n_inst), false);
  for (std::size_t i = 0; i < ft.rows.size(); ++i) {
    const auto& row = ft.rows[i];
    auto it = row_of.find(row[0]);
    if (it == row_of.end() || filled[static_cast<std::size_t>(it->second)]) {
      throw IoError(instance_features_path + ": instance_id '" + row[0] +
                    "' does not match the runtime table");
    }
    filled[static_cast<std::size_t>(it->second)] = true;
    for (Eigen::Index c = 0; c < p; ++c) {
      table.instance_features(it->second, c) = parse_double(
          row[static_cast<std::size_t>(c) + 1], instance_features_path + ":" + std::to_string(i + 2));
    }
  }

  table.solver_features = load_solver_features(solver_features_path);
  try {
    validate(table);
  } catch (const ConfigError& e) {
    throw IoError(std::string("runtime table: ") + e.what());
  }
  return table;
}

void validate(const RuntimeTable& table) {
  const auto n_inst = table.runtimes.rows();
  if (n_inst < 1 || table.runtimes.cols() < 2) throw ConfigError("need >= 1 instance and >= 2 solvers");
  if (table.instance_features.rows() != n_inst) throw ConfigError("instance feature rows mismatch");
  if (static_cast<Eigen::Index>(table.instance_ids.size()) != n_inst) {
    throw ConfigError("instance id count mismatch");
  }
  if (table.solver_features.rows() != table.runtimes.cols()) {
    throw ConfigError("solver feature rows (" + std::to_string(table.solver_features.rows()) +
                      ") differ from runtime columns (" + std::to_string(table.runtimes.cols()) + ")");
  }
  if (!table.runtimes.allFinite() || (table.runtimes.array() < 0.0).any()) {
    throw ConfigError("runtimes must be finite and nonnegative");
  }
  if (!table.instance_features.allFinite() || !table.solver_features.allFinite()) {
    throw ConfigError("features must be finite");
  }
}

// ---------------------------------------------------------------------------
// Feature preprocessing

PreprocessResult preprocess_features(const Matrix& raw, double min_variance,
                                     double max_correlation) {
  if (raw.rows() < 2) throw InvalidArgument("preprocessing needs at least 2 rows");
  const Eigen::Index rows = raw.rows();
  Matrix scaled(rows, raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double lo = raw.col(c).minCoeff();
    const double hi = raw.col(c).maxCoeff();
    if (hi > lo) {
      scaled.col(c) = (raw.col(c).array() - lo) / (hi - lo);
    } else {
      scaled.col(c).setZero();
    }
  }

  std::vector<int> kept;
  for (Eigen::Index c = 0; c < scaled.cols(); ++c) {
    const double mean = scaled.col(c).mean();
    const double var = (scaled.col(c).array() - mean).square().mean();
    if (var >= min_variance) kept.push_back(static_cast<int>(c));
  }

  // Pairwise |Pearson correlation| among the variance survivors.
  const auto m = static_cast<Eigen::Index>(kept.size());
  Matrix centered(rows, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    auto col = scaled.col(kept[static_cast<std::size_t>(j)]);
    centered.col(j) = col.array() - col.mean();
    centered.col(j) /= centered.col(j).norm();
  }
  const Matrix corr = (centered.transpose() * centered).cwiseAbs();

  std::vector<Eigen::Index> alive(static_cast<std::size_t>(m));
  std::iota(alive.begin(), alive.end(), 0);
  while (alive.size() >= 2) {
    double top = -1.0;
    std::size_t pa = 0, pb = 0;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      for (std::size_t j = i + 1; j < alive.size(); ++j) {
        const double c = corr(alive[i], alive[j]);
        if (c > top) {
          top = c;
          pa = i;
          pb = j;
        }
      }
    }
    if (!(top > max_correlation)) break;

    // Drop whichever of the pair is more correlated with the rest; ties drop
    // the later column.
    auto mean_abs_corr = [&](std::size_t self, std::size_t partner) {
      double s = 0.0;
      int cnt = 0;
      for (std::size_t q = 0; q < alive.size(); ++q) {
        if (q == self || q == partner) continue;
        s += corr(alive[self], alive[q]);
        ++cnt;
      }
      return cnt > 0 ? s / cnt : 0.0;
    };
    const double ma = mean_abs_corr(pa, pb);
    const double mb = mean_abs_corr(pb, pa);
    const std::size_t victim = ma > mb ? pa : pb;
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(victim));
  }

  PreprocessResult out;
  out.reduced.resize(rows, static_cast<Eigen::Index>(alive.size()));
  for (std::size_t j = 0; j < alive.size(); ++j) {
    const int raw_col = kept[static_cast<std::size_t>(alive[j])];
    out.kept.push_back(raw_col);
    out.reduced.col(static_cast<Eigen::Index>(j)) = scaled.col(raw_col);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algorithm selection

Vector kron(const Vector& u, const Vector& w) {
  Vector out(u.size() * w.size());
  for (Eigen::Index a = 0; a < u.size(); ++a) {
    out.segment(a * w.size(), w.size()) = u(a) * w;
  }
  return out;
}

std::vector<int> shuffled_order(int instances, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(instances));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.index(i)]);
  }
  return order;
}

std::pair<ContextMatrix, UtilityVector> algoselect_round(const RuntimeTable& table,
                                                         const std::vector<int>& order, int t,
                                                         double lambda) {
  if (t < 1 || t > static_cast<int>(order.size())) {
    throw ExhaustedEnvironment("round " + std::to_string(t) + " exceeds the " +
                               std::to_string(order.size()) + " available instances");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  const int row = order[static_cast<std::size_t>(t - 1)];
  if (row < 0 || row >= table.instances()) throw InvalidArgument("instance order out of range");
  const Vector inst = table.instance_features.row(row).transpose();
  const int n = table.solvers();
  Matrix x(inst.size() * table.solver_features.cols(), n);
  Vector logs(n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = kron(inst, table.solver_features.row(i).transpose());
    logs(i) = -lambda * table.runtimes(row, i);
  }
  return {ContextMatrix(std::move(x), t), UtilityVector::from_logs(std::move(logs))};
}

AlgoSelectEnvironment::AlgoSelectEnvironment(const RuntimeTable& table, double lambda,
                                             std::uint64_t seed)
    : table_(&table), lambda_(lambda), seed_(seed) {
  validate(table);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  Rng rng = Rng::derive({seed, static_cast<std::uint64_t>(Stream::kOrder)});
  order_ = shuffled_order(table.instances(), rng);
}

std::pair<ContextMatrix, UtilityVector> AlgoSelectEnvironment::round(int t) {
  return algoselect_round(*table_, order_, t, lambda_);
}

Feedback AlgoSelectEnvironment::feedback(int t, const UtilityVector& true_utils,
                                         const ArmSet& subset, FeedbackMode mode) {
  Rng rng = Rng::derive({seed_, static_cast<std::uint64_t>(Stream::kFeedback),
                         static_cast<std::uint64_t>(t)});
  return sample_feedback(true_utils, subset, mode, rng);
}

}  // namespace cppl
