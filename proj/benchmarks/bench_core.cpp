#include <benchmark/benchmark.h>

#include "bilearn/bilevel.hpp"
#include "bilearn/experiments.hpp"
#include "bilearn/linops.hpp"
#include "bilearn/regularizers.hpp"
#include "bilearn/varsolve.hpp"

namespace {

using namespace bilearn;

const Eigen::Matrix2d kBlur2 = (Eigen::Matrix2d() << 0.7274, 0.2726, 0.2726, 0.7274).finished();

void BM_QuadraticSolve2D(benchmark::State& state) {
  ForwardOperator op = ForwardOperator::dense(kBlur2);
  Regularizer reg = Regularizer::tikhonov();
  Eigen::VectorXd y(2);
  y << 1.2, 0.4;
  for (auto _ : state) {
    LowerLevelProblem p(op, reg, y, 0.37);
    benchmark::DoNotOptimize(solve(p).x);
  }
}
BENCHMARK(BM_QuadraticSolve2D);

void BM_HuberNewtonSolve2D(benchmark::State& state) {
  ForwardOperator op = ForwardOperator::dense(kBlur2);
  Regularizer reg = Regularizer::huber(0.01);
  Eigen::VectorXd y(2);
  y << 1.2, 0.4;
  const double alpha = std::pow(10.0, static_cast<double>(state.range(0)));
  for (auto _ : state) {
    LowerLevelProblem p(op, reg, y, alpha);
    benchmark::DoNotOptimize(solve(p).x);
  }
}
BENCHMARK(BM_HuberNewtonSolve2D)->Arg(-6)->Arg(0)->Arg(3)->Arg(7);

void BM_GridSearchCell(benchmark::State& state) {
  ForwardOperator op = ForwardOperator::identity(2);
  Regularizer reg = Regularizer::huber(0.01);
  Eigen::VectorXd xt(2), y(2);
  xt << 1.0, 0.5;
  y << 0.4, -0.3;
  Dataset data({TrainingPair{xt, y}});
  AlphaGrid grid = AlphaGrid::log_default();
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_search(UpperLevelKind::mse, data, op, reg, grid).alpha_hat);
  }
}
BENCHMARK(BM_GridSearchCell);

void BM_SpectralSolve128(benchmark::State& state) {
  const Eigen::Index side = 128;
  ForwardOperator op = ForwardOperator::gaussian_blur(side, 6.4, -1, 1e-14);
  Regularizer reg = Regularizer::generalized_tikhonov(LinearMap::image_gradient(side));
  Eigen::VectorXd y = op.apply(generate_shepp_logan(side));
  for (auto _ : state) {
    LowerLevelProblem p(op, reg, y, 1e-3);
    benchmark::DoNotOptimize(solve(p).x);
  }
}
BENCHMARK(BM_SpectralSolve128);

void BM_SheppLogan128(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_shepp_logan(128));
  }
}
BENCHMARK(BM_SheppLogan128);

}  // namespace

BENCHMARK_MAIN();
