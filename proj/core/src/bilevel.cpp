#include "bilearn/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bilearn/errors.hpp"

namespace bilearn {

namespace {

void require_consistent(const Dataset& data, const ForwardOperator& op) {
  for (const TrainingPair& p : data.pairs) {
    if (p.ground_truth.size() != op.cols() || p.measurement.size() != op.rows()) {
      throw DataError("dataset dimensions do not match the operator");
    }
  }
}

double pair_cost(UpperLevelKind kind, const ForwardOperator& op, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& ground_truth) {
  if (kind == UpperLevelKind::mse) return 0.5 * (x - ground_truth).squaredNorm();
  return 0.5 * (op.apply(x) - op.apply(ground_truth)).squaredNorm();
}

}  // namespace

Dataset::Dataset(std::vector<TrainingPair> pairs_) : pairs(std::move(pairs_)) {
  if (pairs.empty()) throw DataError("dataset must contain at least one pair");
  for (const TrainingPair& p : pairs) {
    if (p.ground_truth.size() != pairs.front().ground_truth.size() ||
        p.measurement.size() != pairs.front().measurement.size()) {
      throw DataError("dataset pairs have inconsistent dimensions");
    }
    if (!p.ground_truth.allFinite() || !p.measurement.allFinite()) {
      throw DataError("dataset contains non-finite entries");
    }
  }
}

AlphaGrid::AlphaGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("alpha grid must be non-empty");
  if (values_.front() != 0.0) throw DataError("alpha grid must start exactly at 0");
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (!(values_[i] > values_[i - 1]) || !std::isfinite(values_[i])) {
      throw DataError("alpha grid must be strictly increasing and finite");
    }
  }
}

AlphaGrid AlphaGrid::log_default() {
  std::vector<double> v;
  v.reserve(100);
  v.push_back(0.0);
  for (int k = 0; k < 98; ++k) {
    v.push_back(std::pow(10.0, -12.0 + 15.0 * k / 97.0));
  }
  v.push_back(kInfinityProxy);
  return AlphaGrid(std::move(v));
}

AlphaGrid AlphaGrid::linear(double lo, double hi, int count) {
  if (count < 2) throw DataError("linear alpha grid needs at least two points");
  std::vector<double> v(count);
  for (int k = 0; k < count; ++k) v[k] = lo + (hi - lo) * k / (count - 1);
  v.front() = lo;
  v.back() = hi;
  return AlphaGrid(std::move(v));
}

AlphaGrid AlphaGrid::parse(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) throw ConfigError("grid: empty segment in '" + spec + "'");
    if (part == "zero") {
      v.push_back(0.0);
      continue;
    }
    if (part.rfind("log:", 0) == 0 || part.rfind("lin:", 0) == 0) {
      const bool logscale = part[1] == 'o';
      std::stringstream ps(part.substr(4));
      std::string a, b, c;
      if (!std::getline(ps, a, ':') || !std::getline(ps, b, ':') || !std::getline(ps, c, ':')) {
        throw ConfigError("grid: malformed segment '" + part + "'");
      }
      double lo = 0.0, hi = 0.0;
      int count = 0;
      try {
        lo = std::stod(a);
        hi = std::stod(b);
        count = std::stoi(c);
      } catch (const std::exception&) {
        throw ConfigError("grid: malformed segment '" + part + "'");
      }
      if (count < 2) throw ConfigError("grid: segment '" + part + "' needs >= 2 points");
      for (int k = 0; k < count; ++k) {
        const double t = lo + (hi - lo) * k / (count - 1);
        v.push_back(logscale ? std::pow(10.0, t) : t);
      }
      continue;
    }
    try {
      v.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ConfigError("grid: cannot parse value '" + part + "'");
    }
  }
  try {
    return AlphaGrid(std::move(v));
  } catch (const DataError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

bool BilevelSolution::curve_is_flat() const {
  for (const auto& [alpha, cost] : cost_curve) {
    if (cost != cost_curve.front().second) return false;
  }
  return true;
}

double upper_cost(UpperLevelKind kind, const Dataset& data, const ForwardOperator& op,
                  const Regularizer& reg, double alpha, const SolveOptions& options) {
  require_consistent(data, op);
  double acc = 0.0;
  for (const TrainingPair& p : data.pairs) {
    LowerLevelProblem problem(op, reg, p.measurement, alpha);
    acc += pair_cost(kind, op, solve(problem, options).x, p.ground_truth);
  }
  return acc / static_cast<double>(data.size());
}

BilevelSolution grid_search(UpperLevelKind kind, const Dataset& data, const ForwardOperator& op,
                            const Regularizer& reg, const AlphaGrid& grid,
                            const SolveOptions& options) {
  require_consistent(data, op);
  const std::size_t n_pairs = data.size();

  // Per-pair warm-start chains across the ascending sweep.
  std::vector<Eigen::VectorXd> warm(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    warm[k] = op.least_squares_solution(data.pairs[k].measurement);
  }

  BilevelSolution sol;
  sol.cost_curve.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double alpha = grid.values()[gi];
    double acc = 0.0;
    for (std::size_t k = 0; k < n_pairs; ++k) {
      Eigen::VectorXd x;
      if (alpha == 0.0) {
        x = warm[k];  // the least-squares solution
      } else {
        LowerLevelProblem problem(op, reg, data.pairs[k].measurement, alpha);
        try {
          x = solve(problem, options, &warm[k]).x;
        } catch (const ConvergenceError& e) {
          throw ConvergenceError("grid search failed at alpha = " + std::to_string(alpha) + ": " +
                                     e.what(),
                                 e.best_iterate(), e.grad_norm(), e.iterations());
        }
        warm[k] = x;
      }
      acc += pair_cost(kind, op, x, data.pairs[k].ground_truth);
    }
    const double cost = acc / static_cast<double>(n_pairs);
    sol.cost_curve.emplace_back(alpha, cost);
    if (cost < sol.cost_curve[best].second) best = gi;
  }

  sol.alpha_hat = sol.cost_curve[best].first;
  sol.cost_at_alpha_hat = sol.cost_curve[best].second;
  sol.is_positive = sol.alpha_hat > 0.0;
  sol.at_infinity_proxy = best + 1 == grid.size() && sol.alpha_hat > 0.0;
  return sol;
}

double closed_form_tikhonov_alpha(const Eigen::VectorXd& ground_truth, const Eigen::VectorXd& y) {
  if (ground_truth.size() != y.size()) {
    throw DataError("closed-form alpha: dimension mismatch");
  }
  const double ynorm2 = y.squaredNorm();
  const double inner = y.dot(ground_truth);
  if (ynorm2 == 0.0) throw DataError("closed-form alpha: |y| = 0");
  if (inner == 0.0) throw DataError("closed-form alpha: <y, ground truth> = 0");
  return ynorm2 / inner - 1.0;
}

bool check_condition_old(const Regularizer& reg, const Eigen::VectorXd& ground_truth,
                         const Eigen::VectorXd& y) {
  return reg.eval(ground_truth) < reg.eval(y);
}

bool check_condition_new_pointwise(const ForwardOperator& op, const Regularizer& reg,
                                   const Eigen::VectorXd& ground_truth, const Eigen::VectorXd& y) {
  const Eigen::VectorXd x0 = op.least_squares_solution(y);
  const Eigen::VectorXd u = op.solve_normal_equations(ground_truth);
  const Eigen::VectorXd v = op.solve_normal_equations(x0);
  return reg.linearize(u, x0) < reg.linearize(v, x0);
}

bool check_condition_new_expected(const ForwardOperator& op, const Regularizer& reg,
                                  const Dataset& data) {
  require_consistent(data, op);
  double lhs = 0.0, rhs = 0.0;
  for (const TrainingPair& p : data.pairs) {
    const Eigen::VectorXd x0 = op.least_squares_solution(p.measurement);
    lhs += reg.linearize(op.solve_normal_equations(p.ground_truth), x0);
    rhs += reg.linearize(op.solve_normal_equations(x0), x0);
  }
  return lhs < rhs;
}

bool check_condition_gradient_compat(const ForwardOperator& op, const Regularizer& reg,
                                     std::span<const double> alphas, const Dataset& data,
                                     const SolveOptions& options) {
  require_consistent(data, op);
  double worst = 0.0;
  for (const TrainingPair& p : data.pairs) {
    for (double alpha : alphas) {
      if (!(alpha > 0.0)) throw DataError("gradient-compat check: alphas must be positive");
      LowerLevelProblem problem(op, reg, p.measurement, alpha);
      const Eigen::VectorXd xa = solve(problem, options).x;
      const Eigen::VectorXd lhs = reg.gradient(op.solve_normal_equations(xa));
      const Eigen::VectorXd rhs = reg.gradient(xa);
      const double scale = std::max(rhs.norm(), 1e-300);
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  }
  return worst <= 1e-8;
}

bool check_condition_predictive(const Regularizer& reg, const Dataset& data,
                                const ForwardOperator& op) {
  if (!op.is_square() || !op.is_injective()) {
    throw DataError("predictive condition requires an invertible operator");
  }
  require_consistent(data, op);
  double lhs = 0.0, rhs = 0.0;
  for (const TrainingPair& p : data.pairs) {
    const Eigen::VectorXd x0 = op.least_squares_solution(p.measurement);
    lhs += reg.linearize(p.ground_truth, x0);
    rhs += reg.eval(x0);
  }
  return lhs < rhs;
}

bool check_condition_symmetric_bregman(const Regularizer& reg, const Dataset& data) {
  double acc = 0.0;
  for (const TrainingPair& p : data.pairs) {
    if (p.measurement.size() != p.ground_truth.size()) {
      throw DataError("symmetric Bregman condition expects a denoising dataset");
    }
    acc += reg.symmetric_bregman(p.measurement, p.ground_truth);
  }
  return acc / static_cast<double>(data.size()) > 0.0;
}

double estimate_dini_derivative(UpperLevelKind kind, const Dataset& data,
                                const ForwardOperator& op, const Regularizer& reg,
                                std::span<const double> alphas, const SolveOptions& options) {
  if (alphas.empty()) throw DataError("dini estimate: empty alpha sequence");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw DataError("dini estimate: alphas must be strictly positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) {
      throw DataError("dini estimate: alphas must be strictly decreasing");
    }
  }
  require_consistent(data, op);
  const double cost_at_zero = upper_cost(kind, data, op, reg, 0.0, options);

  // Warm-started descending sweep; only the final quotient is returned.
  std::vector<Eigen::VectorXd> warm(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    warm[k] = op.least_squares_solution(data.pairs[k].measurement);
  }
  double quotient = 0.0;
  for (double alpha : alphas) {
    double acc = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
      LowerLevelProblem problem(op, reg, data.pairs[k].measurement, alpha);
      Eigen::VectorXd x = solve(problem, options, &warm[k]).x;
      warm[k] = x;
      acc += pair_cost(kind, op, x, data.pairs[k].ground_truth);
    }
    quotient = (acc / static_cast<double>(data.size()) - cost_at_zero) / alpha;
  }
  return quotient;
}

}  // namespace bilearn
