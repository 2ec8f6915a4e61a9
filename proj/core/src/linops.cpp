#include "bilearn/linops.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "bilearn/errors.hpp"

namespace bilearn {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw DataError(std::string(what) + ": non-finite entries");
}

void require_dim(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DataError(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                    std::to_string(v.size()));
  }
}

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) ...
// The extended sequence is 2n-periodic, which is the convention diagonalized
// by the DCT-II for symmetric kernels.
Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  Eigen::Index p = i % period;
  if (p < 0) p += period;
  return p < n ? p : period - 1 - p;
}

// Convolve every column of `img` with the symmetric kernel g (radius r).
Eigen::MatrixXd convolve_columns(const Eigen::MatrixXd& img, const Eigen::VectorXd& g) {
  const Eigen::Index n = img.rows();
  const Eigen::Index r = (g.size() - 1) / 2;
  Eigen::MatrixXd out(n, img.cols());
  for (Eigen::Index c = 0; c < img.cols(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = -r; j <= r; ++j) {
        acc += g[j + r] * img(reflect_index(i - j, n), c);
      }
      out(i, c) = acc;
    }
  }
  return out;
}

// Orthonormal DCT-II matrix: C(k,i) = s_k cos(pi k (2i+1) / (2N)).
Eigen::MatrixXd dct2_matrix(Eigen::Index n) {
  Eigen::MatrixXd c(n, n);
  const double pi = std::acos(-1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      c(k, i) = scale * std::cos(pi * static_cast<double>(k) * (2.0 * i + 1.0) / (2.0 * n));
    }
  }
  return c;
}

}  // namespace

Eigen::VectorXd gaussian_kernel_1d(double sigma, Eigen::Index radius) {
  if (!(sigma > 0.0)) throw DataError("gaussian kernel: sigma must be positive");
  if (radius < 0) radius = static_cast<Eigen::Index>(std::floor(4.0 * sigma));
  if (radius < 1) radius = 1;
  Eigen::VectorXd g(2 * radius + 1);
  for (Eigen::Index j = -radius; j <= radius; ++j) {
    g[j + radius] = std::exp(-0.5 * static_cast<double>(j * j) / (sigma * sigma));
  }
  g /= g.sum();
  return g;
}

struct ForwardOperator::Impl {
  Kind kind = Kind::identity;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double sigma_tol_rel = kDefaultSigmaTolRel;

  // dense kind
  Eigen::MatrixXd a;
  Eigen::LLT<Eigen::MatrixXd> normal_llt;  // factorization of A^T A

  // separable convolution kind
  Eigen::Index side = 0;
  Eigen::VectorXd kernel;
  Eigen::VectorXd spectrum_1d;  // DCT-II eigenvalues of the 1-D blur matrix
  Eigen::MatrixXd dct;          // orthonormal DCT-II matrix, side x side

  bool injective() const { return sigma_min > sigma_tol_rel * sigma_max; }

  void require_injective() const {
    if (!injective()) {
      throw RankDeficiencyError("operator is numerically rank deficient (sigma_min = " +
                                std::to_string(sigma_min) + ")");
    }
  }
};

ForwardOperator::ForwardOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

ForwardOperator ForwardOperator::identity(Eigen::Index n) {
  if (n < 1) throw DataError("identity operator: dimension must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::identity;
  impl->m = impl->n = n;
  impl->sigma_min = impl->sigma_max = 1.0;
  impl->a = Eigen::MatrixXd::Identity(n, n);
  return ForwardOperator(std::move(impl));
}

ForwardOperator ForwardOperator::dense(Eigen::MatrixXd a, double sigma_tol_rel) {
  if (a.rows() < 1 || a.cols() < 1) throw DataError("dense operator: empty matrix");
  if (!a.allFinite()) throw DataError("dense operator: non-finite entries");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::dense;
  impl->m = a.rows();
  impl->n = a.cols();
  impl->sigma_tol_rel = sigma_tol_rel;
  impl->a = std::move(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(impl->a);
  impl->sigma_max = svd.singularValues()(0);
  impl->sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  if (impl->injective()) {
    impl->normal_llt.compute(impl->a.transpose() * impl->a);
  }
  return ForwardOperator(std::move(impl));
}

ForwardOperator ForwardOperator::gaussian_blur(Eigen::Index side, double sigma_pixels,
                                               Eigen::Index radius, double sigma_tol_rel) {
  if (side < 2) throw DataError("gaussian blur: side must be >= 2");
  Eigen::VectorXd g = gaussian_kernel_1d(sigma_pixels, radius);
  const Eigen::Index r = (g.size() - 1) / 2;
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::separable_conv2d;
  impl->side = side;
  impl->m = impl->n = side * side;
  impl->sigma_tol_rel = sigma_tol_rel;
  impl->kernel = std::move(g);

  // lambda_k = g0 + 2 sum_j g_j cos(pi k j / N); exact for kernel radius < N.
  const double pi = std::acos(-1.0);
  impl->spectrum_1d.resize(side);
  for (Eigen::Index k = 0; k < side; ++k) {
    double lam = impl->kernel[r];
    for (Eigen::Index j = 1; j <= r; ++j) {
      lam += 2.0 * impl->kernel[r + j] * std::cos(pi * static_cast<double>(k * j) / side);
    }
    impl->spectrum_1d[k] = lam;
  }
  const Eigen::VectorXd abs1d = impl->spectrum_1d.cwiseAbs();
  impl->sigma_min = abs1d.minCoeff() * abs1d.minCoeff();
  impl->sigma_max = abs1d.maxCoeff() * abs1d.maxCoeff();
  impl->dct = dct2_matrix(side);
  return ForwardOperator(std::move(impl));
}

ForwardOperator::Kind ForwardOperator::kind() const { return impl_->kind; }
Eigen::Index ForwardOperator::rows() const { return impl_->m; }
Eigen::Index ForwardOperator::cols() const { return impl_->n; }
double ForwardOperator::smallest_singular_value() const { return impl_->sigma_min; }
double ForwardOperator::largest_singular_value() const { return impl_->sigma_max; }
bool ForwardOperator::is_injective() const { return impl_->injective(); }

bool ForwardOperator::has_dense_matrix() const {
  return impl_->kind == Kind::identity || impl_->kind == Kind::dense;
}

const Eigen::MatrixXd& ForwardOperator::matrix() const {
  if (!has_dense_matrix()) throw DataError("operator has no dense matrix representation");
  return impl_->a;
}

bool ForwardOperator::has_spectral_factorization() const {
  return impl_->kind == Kind::separable_conv2d;
}

Eigen::Index ForwardOperator::conv_side() const { return impl_->side; }

const Eigen::VectorXd& ForwardOperator::conv_spectrum_1d() const {
  if (!has_spectral_factorization()) throw DataError("operator has no spectral factorization");
  return impl_->spectrum_1d;
}

Eigen::VectorXd ForwardOperator::dct2(const Eigen::VectorXd& image) const {
  const Eigen::Index s = impl_->side;
  require_dim(image, s * s, "dct2");
  Eigen::Map<const Eigen::MatrixXd> img(image.data(), s, s);
  Eigen::MatrixXd coef = impl_->dct * img * impl_->dct.transpose();
  return Eigen::Map<Eigen::VectorXd>(coef.data(), s * s);
}

Eigen::VectorXd ForwardOperator::idct2(const Eigen::VectorXd& coefficients) const {
  const Eigen::Index s = impl_->side;
  require_dim(coefficients, s * s, "idct2");
  Eigen::Map<const Eigen::MatrixXd> coef(coefficients.data(), s, s);
  Eigen::MatrixXd img = impl_->dct.transpose() * coef * impl_->dct;
  return Eigen::Map<Eigen::VectorXd>(img.data(), s * s);
}

Eigen::VectorXd ForwardOperator::apply(const Eigen::VectorXd& x) const {
  require_dim(x, impl_->n, "apply");
  require_finite(x, "apply");
  switch (impl_->kind) {
    case Kind::identity:
      return x;
    case Kind::dense:
      return impl_->a * x;
    case Kind::separable_conv2d: {
      const Eigen::Index s = impl_->side;
      Eigen::Map<const Eigen::MatrixXd> img(x.data(), s, s);
      Eigen::MatrixXd t = convolve_columns(img, impl_->kernel);
      Eigen::MatrixXd out = convolve_columns(t.transpose(), impl_->kernel).transpose();
      return Eigen::Map<Eigen::VectorXd>(out.data(), s * s);
    }
  }
  throw DataError("apply: unknown operator kind");
}

Eigen::VectorXd ForwardOperator::apply_adjoint(const Eigen::VectorXd& z) const {
  require_dim(z, impl_->m, "apply_adjoint");
  require_finite(z, "apply_adjoint");
  switch (impl_->kind) {
    case Kind::identity:
      return z;
    case Kind::dense:
      return impl_->a.transpose() * z;
    case Kind::separable_conv2d:
      // The symmetric-extension blur matrix with a symmetric kernel is
      // symmetric, so the adjoint coincides with the forward application.
      return apply(z);
  }
  throw DataError("apply_adjoint: unknown operator kind");
}

Eigen::VectorXd ForwardOperator::least_squares_solution(const Eigen::VectorXd& y) const {
  require_dim(y, impl_->m, "least_squares_solution");
  require_finite(y, "least_squares_solution");
  impl_->require_injective();
  switch (impl_->kind) {
    case Kind::identity:
      return y;
    case Kind::dense:
      return impl_->normal_llt.solve(impl_->a.transpose() * y);
    case Kind::separable_conv2d: {
      // A is symmetric with DCT-II eigenvalues a_kl, so x0 = C^T (Y / a) C.
      const Eigen::Index s = impl_->side;
      Eigen::VectorXd coef = dct2(y);
      for (Eigen::Index l = 0; l < s; ++l) {
        for (Eigen::Index k = 0; k < s; ++k) {
          coef[l * s + k] /= impl_->spectrum_1d[k] * impl_->spectrum_1d[l];
        }
      }
      return idct2(coef);
    }
  }
  throw DataError("least_squares_solution: unknown operator kind");
}

Eigen::VectorXd ForwardOperator::solve_normal_equations(const Eigen::VectorXd& w) const {
  require_dim(w, impl_->n, "solve_normal_equations");
  require_finite(w, "solve_normal_equations");
  impl_->require_injective();
  switch (impl_->kind) {
    case Kind::identity:
      return w;
    case Kind::dense:
      return impl_->normal_llt.solve(w);
    case Kind::separable_conv2d: {
      const Eigen::Index s = impl_->side;
      Eigen::VectorXd coef = dct2(w);
      for (Eigen::Index l = 0; l < s; ++l) {
        for (Eigen::Index k = 0; k < s; ++k) {
          const double a = impl_->spectrum_1d[k] * impl_->spectrum_1d[l];
          coef[l * s + k] /= a * a;
        }
      }
      return idct2(coef);
    }
  }
  throw DataError("solve_normal_equations: unknown operator kind");
}

}  // namespace bilearn
