#include <doctest.h>

#include <random>
#include <vector>

#include "bilearn/errors.hpp"
#include "bilearn/regularizers.hpp"
#include "oracles.hpp"

using namespace bilearn;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

std::vector<Regularizer> all_kinds(Eigen::Index n) {
  return {
      Regularizer::tikhonov(),
      Regularizer::generalized_tikhonov(LinearMap::first_difference(n)),
      Regularizer::huber(0.01),
      Regularizer::generalized_huber(LinearMap::first_difference(n), 0.01),
      Regularizer::elastic_huber(0.01, 0.01),
  };
}

}  // namespace

TEST_CASE("eval on the reference points") {
  CHECK(Regularizer::tikhonov().eval(vec2(1.0, 0.5)) == doctest::Approx(0.625).epsilon(1e-15));

  Regularizer hub = Regularizer::huber(0.01);
  // Quadratic branch s^2/(2 gamma) and linear branch |s| - gamma/2.
  CHECK(hub.eval(vec1(0.005)) == doctest::Approx(oracles::huber_value(0.005, 0.01)).epsilon(1e-15));
  CHECK(hub.eval(vec1(0.005)) == doctest::Approx(0.00125).epsilon(1e-15));
  CHECK(hub.eval(vec1(1.0)) == doctest::Approx(0.995).epsilon(1e-15));
}

TEST_CASE("gradients on the reference points") {
  CHECK(Regularizer::tikhonov().gradient(vec2(1.0, 0.5)) == vec2(1.0, 0.5));
  CHECK(Regularizer::huber(0.01).gradient(vec1(0.005))[0] == doctest::Approx(0.5).epsilon(1e-13));

  Regularizer gt = Regularizer::generalized_tikhonov(LinearMap::first_difference(2));
  const Eigen::VectorXd g = gt.gradient(vec2(2.0, 1.0));
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(17);
  for (const Regularizer& reg : all_kinds(4)) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd x = oracles::random_vector(rng, 4, 2.0);
      const Eigen::VectorXd g = reg.gradient(x);
      const Eigen::VectorXd fd = oracles::finite_difference_gradient(
          [&](const Eigen::VectorXd& p) { return reg.eval(p); }, x);
      for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * (1.0 + std::abs(g[i])));
      }
    }
  }
}

TEST_CASE("bregman distances from the reference table") {
  Regularizer tik = Regularizer::tikhonov();
  // 0.5 |x - z|^2 for the quadratic regularizer.
  CHECK(tik.bregman(vec2(2.0, 0.0), vec2(1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-14));

  Regularizer gt = Regularizer::generalized_tikhonov(LinearMap::first_difference(2));
  // 0.5 |K (x - z)|^2 with K = [1 -1].
  CHECK(gt.bregman(vec2(1.0, 0.0), vec2(0.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-14));

  for (const Regularizer& reg : all_kinds(2)) {
    CHECK(reg.bregman(vec2(0.3, -0.2), vec2(0.3, -0.2)) == 0.0);
  }
}

TEST_CASE("linearization identities and reference values") {
  Regularizer tik = Regularizer::tikhonov();
  CHECK(tik.linearize(vec2(1.0, 0.5), vec2(1.0, 0.5)) == tik.eval(vec2(1.0, 0.5)));
  CHECK(tik.linearize(vec2(1.0, 0.5), vec2(1.2, 0.4)) == doctest::Approx(0.6).epsilon(1e-14));

  // Linearizations may be negative; cross-checked as eval - bregman.
  Regularizer hub = Regularizer::huber(0.01);
  const double lin = hub.linearize(vec1(0.0), vec1(1.0));
  CHECK(lin == doctest::Approx(-0.005).epsilon(1e-13));
  CHECK(lin ==
        doctest::Approx(hub.eval(vec1(0.0)) - hub.bregman(vec1(0.0), vec1(1.0))).epsilon(1e-13));
}

TEST_CASE("symmetric bregman reference values") {
  Regularizer tik = Regularizer::tikhonov();
  CHECK(tik.symmetric_bregman(vec2(2.0, 0.0), vec2(1.0, 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tik.symmetric_bregman(vec2(0.4, 0.2), vec2(0.4, 0.2)) == 0.0);

  Regularizer el = Regularizer::elastic_huber(0.01, 0.01);
  CHECK(el.symmetric_bregman(vec2(1.0, 0.0), vec2(1.1, 0.0)) > 0.0);
}

TEST_CASE("property: convexity, two-path agreement, strict convexity") {
  std::mt19937_64 rng(23);
  for (const Regularizer& reg : all_kinds(3)) {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd x = oracles::random_vector(rng, 3, 2.0);
      const Eigen::VectorXd z = oracles::random_vector(rng, 3, 2.0);

      CHECK(reg.bregman(x, z) >= -1e-12 * (1.0 + std::abs(reg.eval(x))));
      CHECK(reg.linearize(x, x) == reg.eval(x));

      const double path_a = reg.eval(x) - reg.bregman(x, z);
      const double path_b = reg.linearize(x, z);
      CHECK(std::abs(path_a - path_b) <= 1e-10 * (1.0 + std::abs(path_b)));
      CHECK(reg.linearize(x, z) <= reg.eval(x) + 1e-12 * (1.0 + std::abs(reg.eval(x))));

      const double sum_of_two = reg.bregman(x, z) + reg.bregman(z, x);
      const double inner_form = reg.symmetric_bregman(x, z);
      CHECK(std::abs(sum_of_two - inner_form) <= 1e-10 * (1.0 + std::abs(inner_form)));
    }
  }

  Regularizer el = Regularizer::elastic_huber(0.01, 0.01);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd x = oracles::random_vector(rng, 3, 2.0);
    const Eigen::VectorXd z = oracles::random_vector(rng, 3, 2.0);
    if ((x - z).norm() > 1e-8) {
      CHECK(el.bregman(x, z) > 0.0);
      CHECK(el.bregman(x, z) >= 0.5 * el.beta() * (x - z).squaredNorm() * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("image gradient of a constant image is zero") {
  LinearMap k = LinearMap::image_gradient(6);
  CHECK(k.apply(Eigen::VectorXd::Constant(36, 3.7)).isZero(0.0));

  // Transpose consistency: <Kx, z> = <x, K^T z>.
  std::mt19937_64 rng(29);
  const Eigen::VectorXd x = oracles::random_vector(rng, 36);
  const Eigen::VectorXd z = oracles::random_vector(rng, 72);
  CHECK(k.apply(x).dot(z) == doctest::Approx(x.dot(k.apply_transpose(z))).epsilon(1e-12));
}

TEST_CASE("construction and input validation") {
  CHECK_THROWS_AS(Regularizer::huber(0.0), DataError);
  CHECK_THROWS_AS(Regularizer::huber(-1.0), DataError);
  CHECK_THROWS_AS(Regularizer::elastic_huber(0.0, 0.01), DataError);
  CHECK_THROWS_AS(Regularizer::generalized_huber(LinearMap::identity(2), -0.5), DataError);

  Eigen::VectorXd bad = vec2(1.0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(Regularizer::tikhonov().eval(bad), DataError);
  CHECK_THROWS_AS(Regularizer::tikhonov().gradient(bad), DataError);
}
