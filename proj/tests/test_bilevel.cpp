#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "bilearn/bilevel.hpp"
#include "bilearn/errors.hpp"
#include "oracles.hpp"

using namespace bilearn;

namespace {

const Eigen::Matrix2d kBlur2 = (Eigen::Matrix2d() << 0.7274, 0.2726, 0.2726, 0.7274).finished();

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Dataset single_pair(const Eigen::VectorXd& ground_truth, const Eigen::VectorXd& y) {
  return Dataset({TrainingPair{ground_truth, y}});
}

/// Positivity as predicted by the closed form: alpha_bar in (-1, 0] is the
/// only range whose optimum sits at 0; alpha_bar <= -1 means the optimum
/// escapes to the infinite end of the domain.
bool closed_form_predicts_positive(double alpha_bar) {
  return alpha_bar > 0.0 || alpha_bar <= -1.0;
}

}  // namespace

TEST_CASE("alpha grid construction and parsing") {
  AlphaGrid grid = AlphaGrid::log_default();
  REQUIRE(grid.size() == 100);
  CHECK(grid.values().front() == 0.0);
  CHECK(grid.values()[1] == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(grid.values()[98] == doctest::Approx(1e3).epsilon(1e-12));
  CHECK(grid.values().back() == kInfinityProxy);

  AlphaGrid parsed = AlphaGrid::parse("zero,log:-12:3:98,1e7");
  REQUIRE(parsed.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(parsed.values()[i] == grid.values()[i]);
  }

  AlphaGrid lin = AlphaGrid::parse("lin:0:0.1:50");
  REQUIRE(lin.size() == 50);
  CHECK(lin.values().front() == 0.0);
  CHECK(lin.values().back() == doctest::Approx(0.1).epsilon(1e-15));

  CHECK_THROWS_AS(AlphaGrid::parse("lin:0.5:1:10"), ConfigError);  // must start at 0
  CHECK_THROWS_AS(AlphaGrid({0.0, 1.0, 1.0}), DataError);          // strictly increasing
  CHECK_THROWS_AS(AlphaGrid({0.5}), DataError);
}

TEST_CASE("upper cost on the closed-form example") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  Dataset data = single_pair(vec2(1.0, 0.0), vec2(2.0, 0.0));

  CHECK(upper_cost(UpperLevelKind::mse, data, id, tik, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(upper_cost(UpperLevelKind::mse, data, id, tik, 0.0) == doctest::Approx(0.5).epsilon(1e-14));

  // With A = I the predictive risk equals the MSE.
  Dataset other = single_pair(vec2(1.0, 0.5), vec2(1.3, 0.1));
  for (double alpha : {0.0, 0.3, 2.0}) {
    CHECK(upper_cost(UpperLevelKind::mse, other, id, tik, alpha) ==
          doctest::Approx(upper_cost(UpperLevelKind::predictive_risk, other, id, tik, alpha))
              .epsilon(1e-14));
  }
}

TEST_CASE("grid search finds the closed-form optimum on the default grid") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  AlphaGrid grid = AlphaGrid::log_default();

  BilevelSolution sol =
      grid_search(UpperLevelKind::mse, single_pair(vec2(1.0, 0.0), vec2(2.0, 0.0)), id, tik, grid);
  // Closed-form optimum alpha_bar = |y|^2/<y,x> - 1 = 1; the grid argmin is
  // the grid value nearest 1.0.
  double nearest = grid.values()[1];
  for (double v : grid.values()) {
    if (v > 0.0 && std::abs(std::log10(v)) < std::abs(std::log10(nearest))) nearest = v;
  }
  CHECK(sol.alpha_hat == nearest);
  CHECK(sol.is_positive);
  CHECK_FALSE(sol.at_infinity_proxy);
  CHECK(sol.cost_at_alpha_hat < sol.cost_curve.front().second);

  // Condition-violating measurement: the zero boundary wins.
  BilevelSolution zero =
      grid_search(UpperLevelKind::mse, single_pair(vec2(1.0, 0.5), vec2(0.8, 0.4)), id, tik, grid);
  CHECK(zero.alpha_hat == 0.0);
  CHECK_FALSE(zero.is_positive);
  // Oracle: a dense scan of the closed-form cost lands at the boundary too.
  CHECK(oracles::tikhonov_denoising_scan(vec2(1.0, 0.5), vec2(0.8, 0.4)) == 0.0);

  // Perfect data: cost 0 at alpha = 0, ties broken toward the smallest.
  BilevelSolution perfect =
      grid_search(UpperLevelKind::mse, single_pair(vec2(1.0, 0.5), vec2(1.0, 0.5)), id, tik, grid);
  CHECK(perfect.alpha_hat == 0.0);
  CHECK(perfect.cost_at_alpha_hat == 0.0);

  // Negative inner product <y, x>: shrinking all the way to zero is optimal,
  // so the argmin sits on the infinity proxy.
  BilevelSolution proxy =
      grid_search(UpperLevelKind::mse, single_pair(vec2(1.0, 0.5), vec2(-0.4, -0.8)), id, tik,
                  grid);
  CHECK(proxy.alpha_hat == kInfinityProxy);
  CHECK(proxy.at_infinity_proxy);
  CHECK(proxy.is_positive);
}

TEST_CASE("closed-form tikhonov alpha") {
  CHECK(closed_form_tikhonov_alpha(vec2(1.0, 0.0), vec2(2.0, 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(closed_form_tikhonov_alpha(vec2(0.7, -0.3), vec2(0.7, -0.3)) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(closed_form_tikhonov_alpha(vec2(1.0, 0.0), vec2(0.0, 1.0)), DataError);
  CHECK_THROWS_AS(closed_form_tikhonov_alpha(vec2(1.0, 0.0), vec2(0.0, 0.0)), DataError);
}

TEST_CASE("old condition on reference points") {
  Regularizer tik = Regularizer::tikhonov();
  CHECK(check_condition_old(tik, vec2(1.0, 0.5), vec2(1.2, 0.4)));
  CHECK_FALSE(check_condition_old(tik, vec2(1.0, 0.5), vec2(0.1, -0.2)));
  CHECK_FALSE(check_condition_old(tik, vec2(1.0, 0.5), vec2(1.0, 0.5)));
}

TEST_CASE("new pointwise condition on reference points") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  // Reduces to <y, x> < |y|^2 for Tikhonov denoising.
  CHECK(check_condition_new_pointwise(id, tik, vec2(1.0, 0.5), vec2(1.2, 0.4)));
  // Strictly wider than the old condition: old fails here, new holds.
  CHECK(check_condition_new_pointwise(id, tik, vec2(1.0, 0.5), vec2(0.1, -0.2)));
  CHECK_FALSE(check_condition_old(tik, vec2(1.0, 0.5), vec2(0.1, -0.2)));
  CHECK_FALSE(check_condition_new_pointwise(id, tik, vec2(1.0, 0.5), vec2(0.8, 0.4)));
}

TEST_CASE("property: old condition implies new condition for denoising") {
  std::mt19937_64 rng(67);
  ForwardOperator id = ForwardOperator::identity(2);
  std::vector<Regularizer> regs = {
      Regularizer::tikhonov(),
      Regularizer::huber(0.01),
      Regularizer::generalized_tikhonov(LinearMap::first_difference(2)),
      Regularizer::elastic_huber(0.01, 0.01),
  };
  int old_true = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd ground_truth = oracles::random_vector(rng, 2, 1.5);
    const Eigen::VectorXd y = oracles::random_vector(rng, 2, 1.5);
    const Regularizer& reg = regs[trial % regs.size()];
    if (check_condition_old(reg, ground_truth, y)) {
      ++old_true;
      CHECK(check_condition_new_pointwise(id, reg, ground_truth, y));
    }
  }
  CHECK(old_true > 100);  // the implication was actually exercised
}

TEST_CASE("property: new condition depends on y only through x0") {
  // A 3x2 injective operator: measurements y and y + v with v in null(A^T)
  // share the least-squares solution, so the condition must agree.
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.2, -0.3, 0.9, 0.5, -0.4;
  ForwardOperator op = ForwardOperator::dense(a);
  Regularizer hub = Regularizer::huber(0.01);

  std::mt19937_64 rng(71);
  // Basis of null(A^T) = orthogonal complement of range(A): v = a1 x a2.
  const Eigen::Vector3d a1 = a.col(0), a2 = a.col(1);
  const Eigen::Vector3d null_dir = a1.cross(a2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd ground_truth = oracles::random_vector(rng, 2, 1.5);
    const Eigen::VectorXd y = oracles::random_vector(rng, 3, 1.5);
    const Eigen::VectorXd y_shifted = y + 2.37 * null_dir;
    CHECK((op.least_squares_solution(y) - op.least_squares_solution(y_shifted)).norm() < 1e-10);
    CHECK(check_condition_new_pointwise(op, hub, ground_truth, y) ==
          check_condition_new_pointwise(op, hub, ground_truth, y_shifted));
  }
}

TEST_CASE("expected condition: singleton agrees with pointwise, means aggregate") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  const Eigen::VectorXd ground_truth = vec2(1.0, 0.5);
  const Eigen::VectorXd y = vec2(1.2, 0.4);
  CHECK(check_condition_new_expected(id, tik, single_pair(ground_truth, y)) ==
        check_condition_new_pointwise(id, tik, ground_truth, y));

  // Every pair violating pointwise forces the mean to violate as well.
  std::vector<TrainingPair> violating;
  for (double s : {0.2, 0.4, 0.6}) {
    violating.push_back(TrainingPair{ground_truth, s * ground_truth});
  }
  CHECK_FALSE(check_condition_new_expected(id, tik, Dataset(violating)));

  // Monte-Carlo zero-mean denoising with a strictly convex regularizer:
  // the expected condition holds at K = 1000.
  std::mt19937_64 rng(73);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<TrainingPair> pairs;
  for (int k = 0; k < 1000; ++k) {
    pairs.push_back(TrainingPair{vec2(1.0, 0.0), vec2(1.0 + noise(rng), noise(rng))});
  }
  CHECK(check_condition_new_expected(id, Regularizer::elastic_huber(0.01, 0.01), Dataset(pairs)));
}

TEST_CASE("gradient compatibility hypothesis") {
  Regularizer tik = Regularizer::tikhonov();
  Dataset data = single_pair(vec2(1.0, 0.5), vec2(1.2, 0.4));
  const std::vector<double> alphas = {1.0};

  CHECK(check_condition_gradient_compat(ForwardOperator::identity(2), tik, alphas, data));
  CHECK_FALSE(
      check_condition_gradient_compat(ForwardOperator::dense(kBlur2), tik, alphas, data));
  // Even a scaled identity fails: (A^T A)^{-1} rescales the gradient.
  ForwardOperator diag2 = ForwardOperator::dense(2.0 * Eigen::Matrix2d::Identity());
  CHECK_FALSE(check_condition_gradient_compat(diag2, tik, alphas, data));
}

TEST_CASE("predictive condition") {
  ForwardOperator a2 = ForwardOperator::dense(kBlur2);
  Regularizer tik = Regularizer::tikhonov();
  const Eigen::VectorXd ground_truth = vec2(1.0, 0.5);

  // Noiseless data: x0 = ground truth, strict inequality fails.
  CHECK_FALSE(check_condition_predictive(tik, single_pair(ground_truth, a2.apply(ground_truth)),
                                         a2));
  // Reduces to <x0, x> < |x0|^2 with x0 = [1.2, 0.4].
  CHECK(check_condition_predictive(tik, single_pair(ground_truth, a2.apply(vec2(1.2, 0.4))), a2));

  Eigen::MatrixXd rect(3, 2);
  rect << 1.0, 0.0, 0.0, 1.0, 0.3, 0.3;
  CHECK_THROWS_AS(check_condition_predictive(tik, single_pair(ground_truth, Eigen::VectorXd::Zero(3)),
                                             ForwardOperator::dense(rect)),
                  DataError);
}

TEST_CASE("symmetric Bregman condition") {
  Regularizer el = Regularizer::elastic_huber(0.01, 0.01);
  std::mt19937_64 rng(79);
  std::vector<TrainingPair> pairs;
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd ground_truth = oracles::random_vector(rng, 2);
    Eigen::VectorXd y = ground_truth + oracles::random_vector(rng, 2, 0.2);
    pairs.push_back(TrainingPair{ground_truth, y});
  }
  CHECK(check_condition_symmetric_bregman(el, Dataset(pairs)));

  // All pairs identical: every term vanishes, strict positivity fails.
  Dataset degenerate({TrainingPair{vec2(1.0, 0.5), vec2(1.0, 0.5)}});
  CHECK_FALSE(check_condition_symmetric_bregman(el, degenerate));

  // Tikhonov symmetric Bregman is |y - x|^2: mirrored pairs average to |d|^2.
  const Eigen::VectorXd d = vec2(0.3, -0.1);
  Dataset mirrored({TrainingPair{vec2(1.0, 0.5), vec2(1.0, 0.5) + d},
                    TrainingPair{vec2(1.0, 0.5), vec2(1.0, 0.5) - d}});
  CHECK(check_condition_symmetric_bregman(Regularizer::tikhonov(), mirrored));
}

TEST_CASE("dini derivative estimate against the analytic limit") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  const std::vector<double> alphas = {1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

  // d/dalpha J at 0+ is <y, x - y> = -2 for x = [1,0], y = [2,0].
  const double q = estimate_dini_derivative(UpperLevelKind::mse,
                                            single_pair(vec2(1.0, 0.0), vec2(2.0, 0.0)), id, tik,
                                            alphas);
  CHECK(q == doctest::Approx(-2.0).epsilon(1e-5));

  const double q_perfect = estimate_dini_derivative(
      UpperLevelKind::mse, single_pair(vec2(1.0, 0.0), vec2(1.0, 0.0)), id, tik, alphas);
  CHECK(q_perfect >= 0.0);

  // Sign flips with <y, x - y> for the condition-violating measurement.
  const double q_violating = estimate_dini_derivative(
      UpperLevelKind::mse, single_pair(vec2(1.0, 0.5), vec2(0.8, 0.4)), id, tik, alphas);
  CHECK(q_violating > 0.0);
  CHECK(q_violating == doctest::Approx(vec2(0.8, 0.4).dot(vec2(0.2, 0.1))).epsilon(1e-4));
}

TEST_CASE("property: grid argmin is invariant under positive cost scaling") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  AlphaGrid grid = AlphaGrid::log_default();
  // Scaling the data by c scales every MSE cost by c^2 and must not move
  // the argmin of the quadratic family.
  const Eigen::VectorXd ground_truth = vec2(1.0, 0.2);
  const Eigen::VectorXd y = vec2(1.7, -0.4);
  BilevelSolution base = grid_search(UpperLevelKind::mse, single_pair(ground_truth, y), id, tik, grid);
  for (double c : {0.5, 3.0, 10.0}) {
    BilevelSolution scaled =
        grid_search(UpperLevelKind::mse, single_pair(c * ground_truth, c * y), id, tik, grid);
    CHECK(scaled.alpha_hat == base.alpha_hat);
  }
}

TEST_CASE("property: closed form, condition and grid search agree on positivity") {
  std::mt19937_64 rng(83);
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer tik = Regularizer::tikhonov();
  AlphaGrid grid = AlphaGrid::log_default();
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::VectorXd ground_truth = oracles::random_vector(rng, 2, 1.5);
    const Eigen::VectorXd y = oracles::random_vector(rng, 2, 1.5);
    if (y.norm() < 1e-3 || std::abs(y.dot(ground_truth)) < 1e-3) continue;
    const bool condition = check_condition_new_pointwise(id, tik, ground_truth, y);
    const bool closed_form = closed_form_predicts_positive(
        closed_form_tikhonov_alpha(ground_truth, y));
    const bool numerical =
        grid_search(UpperLevelKind::mse, single_pair(ground_truth, y), id, tik, grid).is_positive;
    CHECK(condition == closed_form);
    CHECK(condition == numerical);
  }
}

TEST_CASE("predictive-risk grid search equals mse for the identity operator") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer hub = Regularizer::huber(0.01);
  AlphaGrid grid = AlphaGrid::log_default();
  Dataset data = single_pair(vec2(1.0, 0.5), vec2(0.4, -0.3));
  BilevelSolution mse = grid_search(UpperLevelKind::mse, data, id, hub, grid);
  BilevelSolution pred = grid_search(UpperLevelKind::predictive_risk, data, id, hub, grid);
  CHECK(mse.alpha_hat == pred.alpha_hat);
}

TEST_CASE("grid search identifies the failing alpha on solver breakdown") {
  SolveOptions opt;
  opt.max_iterations = 1;
  try {
    grid_search(UpperLevelKind::mse, single_pair(vec2(1.0, 0.5), vec2(2.0, -1.5)),
                ForwardOperator::dense(kBlur2), Regularizer::huber(0.01),
                AlphaGrid({0.0, 0.3, 1.0}), opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("alpha = ") != std::string::npos);
  }
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset({}), DataError);
  CHECK_THROWS_AS(Dataset({TrainingPair{vec2(1.0, 0.0), vec2(1.0, 0.0)},
                           TrainingPair{Eigen::VectorXd::Ones(3), vec2(1.0, 0.0)}}),
                  DataError);
}
