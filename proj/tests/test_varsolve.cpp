#include <doctest.h>

#include <random>
#include <vector>

#include "bilearn/errors.hpp"
#include "bilearn/varsolve.hpp"
#include "oracles.hpp"

using namespace bilearn;

namespace {

const Eigen::Matrix2d kBlur2 = (Eigen::Matrix2d() << 0.7274, 0.2726, 0.2726, 0.7274).finished();

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("closed-form Tikhonov denoising: x^alpha = y / (1 + alpha)") {
  LowerLevelProblem p(ForwardOperator::identity(2), Regularizer::tikhonov(), vec2(2.0, 0.0), 1.0);
  ReconstructionResult r = solve(p);
  CHECK(r.used_closed_form);
  CHECK((r.x - vec2(1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("alpha = 0 returns the least-squares solution") {
  ForwardOperator op = ForwardOperator::dense(kBlur2);
  const Eigen::VectorXd y = vec2(0.9, 0.7);
  LowerLevelProblem p(op, Regularizer::huber(0.01), y, 0.0);
  ReconstructionResult r = solve(p);
  CHECK(r.used_closed_form);
  CHECK((r.x - op.least_squares_solution(y)).norm() == 0.0);
}

TEST_CASE("Huber denoising solves match the 1-D root oracle") {
  ForwardOperator id = ForwardOperator::identity(2);
  Regularizer hub = Regularizer::huber(0.01);

  LowerLevelProblem p(id, hub, vec2(2.0, 0.0), 0.5);
  ReconstructionResult r = solve(p);
  CHECK(r.grad_norm <= 1e-10 * (1.0 + vec2(2.0, 0.0).norm()));
  CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-8));       // linear branch
  CHECK(std::abs(r.x[1]) < 1e-12);

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::VectorXd y = oracles::random_vector(rng, 2, 2.0);
    const double alpha = std::pow(10.0, -4.0 + 8.0 * (static_cast<double>(rng() % 1000) / 999.0));
    LowerLevelProblem q(id, hub, y, alpha);
    const Eigen::VectorXd x = solve(q).x;
    for (Eigen::Index i = 0; i < 2; ++i) {
      CHECK(x[i] == doctest::Approx(oracles::huber_prox_1d(y[i], alpha, 0.01)).epsilon(1e-7));
    }
  }
}

TEST_CASE("optimality identity certifies solves") {
  // Closed form: alpha grad R(x) = A^T A (x0 - x) holds to round-off.
  LowerLevelProblem tik(ForwardOperator::identity(2), Regularizer::tikhonov(), vec2(2.0, 0.0),
                        1.0);
  ReconstructionResult rt = solve(tik);
  CHECK(verify_optimality_identity(tik, rt) < 1e-14);

  std::mt19937_64 rng(43);
  std::vector<Regularizer> regs = {
      Regularizer::huber(0.01),
      Regularizer::generalized_huber(LinearMap::first_difference(2), 0.01),
      Regularizer::elastic_huber(0.01, 0.01),
  };
  SolveOptions opt;
  for (const Regularizer& reg : regs) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd y = oracles::random_vector(rng, 2, 1.5);
      LowerLevelProblem q(ForwardOperator::dense(kBlur2), reg, y, 0.3);
      ReconstructionResult r = solve(q, opt);
      CHECK(verify_optimality_identity(q, r) <= 10.0 * opt.grad_tol);
    }
  }

  LowerLevelProblem zero_alpha(ForwardOperator::identity(2), Regularizer::tikhonov(),
                               vec2(1.0, 0.0), 0.0);
  CHECK_THROWS_AS(verify_optimality_identity(zero_alpha, solve(zero_alpha)), DataError);
}

TEST_CASE("boundary continuity probe against the analytic Tikhonov formula") {
  const std::vector<double> alphas = {0.1, 0.01, 0.001};
  auto probe = boundary_continuity_probe(ForwardOperator::identity(2), Regularizer::tikhonov(),
                                         vec2(2.0, 0.0), alphas);
  REQUIRE(probe.size() == 3);
  // |x^alpha - x0| = |y| alpha / (1 + alpha), |x0 - x^alpha|^2 / alpha analytic.
  const double norm_y = 2.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = alphas[i];
    const double expected = norm_y * a / (1.0 + a);
    CHECK(probe[i].distance_to_x0 == doctest::Approx(expected).epsilon(1e-10));
    CHECK(probe[i].distance_sq_over_alpha ==
          doctest::Approx(expected * expected / a).epsilon(1e-10));
  }
  CHECK(probe[0].distance_to_x0 == doctest::Approx(0.18181818181818182).epsilon(1e-12));
  CHECK(probe[0].distance_sq_over_alpha == doctest::Approx(0.33057851239669417).epsilon(1e-12));
  CHECK(probe[1].distance_sq_over_alpha < probe[0].distance_sq_over_alpha);
  CHECK(probe[2].distance_sq_over_alpha < probe[1].distance_sq_over_alpha);

  auto zeros = boundary_continuity_probe(ForwardOperator::identity(2), Regularizer::tikhonov(),
                                         vec2(0.0, 0.0), alphas);
  for (const auto& pt : zeros) CHECK(pt.distance_to_x0 == 0.0);
}

TEST_CASE("uniqueness: two starts land on the same minimizer") {
  std::mt19937_64 rng(47);
  SolveOptions opt;
  ForwardOperator ops[] = {ForwardOperator::identity(2), ForwardOperator::dense(kBlur2)};
  for (const ForwardOperator& op : ops) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd y = oracles::random_vector(rng, 2, 1.5);
      LowerLevelProblem p(op, Regularizer::huber(0.01), y, 0.7);
      const Eigen::VectorXd zero_start = Eigen::VectorXd::Zero(2);
      ReconstructionResult a = solve(p, opt, &zero_start);
      ReconstructionResult b = solve(p, opt);  // least-squares start
      CHECK((a.x - b.x).norm() <= 100.0 * opt.grad_tol);
    }
  }
}

TEST_CASE("objective is non-increasing along accepted iterates") {
  SolveOptions opt;
  opt.trace_objective = true;
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd y = oracles::random_vector(rng, 2, 1.5);
    // Start from zero so the solver has real work to do.
    const Eigen::VectorXd start = Eigen::VectorXd::Zero(2);
    LowerLevelProblem p(ForwardOperator::dense(kBlur2), Regularizer::huber(0.01), y, 2.0);
    ReconstructionResult r = solve(p, opt, &start);
    REQUIRE(r.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
    }
  }
}

TEST_CASE("datafit bound from the minimality chain") {
  std::mt19937_64 rng(59);
  ForwardOperator op = ForwardOperator::dense(kBlur2);
  Regularizer hub = Regularizer::huber(0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd y = oracles::random_vector(rng, 2, 2.0);
    const double alpha = std::pow(10.0, -3.0 + 6.0 * (static_cast<double>(rng() % 1000) / 999.0));
    const Eigen::VectorXd x0 = op.least_squares_solution(y);
    LowerLevelProblem p(op, hub, y, alpha);
    const Eigen::VectorXd xa = solve(p).x;
    const double datafit_alpha = 0.5 * (op.apply(xa) - y).squaredNorm();
    const double datafit_zero = 0.5 * (op.apply(x0) - y).squaredNorm();
    CHECK(datafit_alpha <= datafit_zero + alpha * hub.eval(x0) + 1e-12);
  }
}

TEST_CASE("iteration budget exhaustion carries the best iterate") {
  SolveOptions opt;
  opt.max_iterations = 1;
  // Starting inside the Huber kink region with a linear-branch minimizer
  // forces at least one region change, so one iteration cannot finish.
  LowerLevelProblem p(ForwardOperator::dense(kBlur2), Regularizer::huber(0.01), vec2(2.0, -1.5),
                      0.3);
  const Eigen::VectorXd start = Eigen::VectorXd::Zero(2);
  try {
    solve(p, opt, &start);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_iterate().size() == 2);
    CHECK(e.grad_norm() > 0.0);
    CHECK(e.iterations() == 1);
  }
}

TEST_CASE("spectral and dense quadratic solves agree") {
  const Eigen::Index side = 8;
  ForwardOperator conv = ForwardOperator::gaussian_blur(side, 1.0);
  ForwardOperator dense = ForwardOperator::dense(oracles::materialize(conv));
  Regularizer reg = Regularizer::generalized_tikhonov(LinearMap::image_gradient(side));

  std::mt19937_64 rng(61);
  const Eigen::VectorXd y = oracles::random_vector(rng, side * side);
  for (double alpha : {1e-6, 1e-2, 1.0, 1e3}) {
    ReconstructionResult a = solve(LowerLevelProblem(conv, reg, y, alpha));
    ReconstructionResult b = solve(LowerLevelProblem(dense, reg, y, alpha));
    CHECK(a.used_closed_form);
    CHECK((a.x - b.x).norm() <= 1e-8 * (1.0 + b.x.norm()));
  }
}

TEST_CASE("problem construction validates inputs") {
  ForwardOperator bad = ForwardOperator::dense((Eigen::Matrix2d() << 1.0, 1.0, 1.0, 1.0).finished());
  CHECK_THROWS_AS(LowerLevelProblem(bad, Regularizer::tikhonov(), vec2(1.0, 0.0), 1.0),
                  RankDeficiencyError);
  CHECK_THROWS_AS(LowerLevelProblem(ForwardOperator::identity(2), Regularizer::tikhonov(),
                                    vec2(1.0, 0.0), -0.5),
                  DataError);
  CHECK_THROWS_AS(LowerLevelProblem(ForwardOperator::identity(3), Regularizer::tikhonov(),
                                    vec2(1.0, 0.0), 1.0),
                  DataError);
}
