#include "bilearn/regularizers.hpp"

#include <cmath>
#include <utility>

#include "bilearn/errors.hpp"

namespace bilearn {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw DataError(std::string(what) + ": non-finite entries");
}

double huber_value(double s, double gamma) {
  const double a = std::abs(s);
  return a >= gamma ? a - 0.5 * gamma : 0.5 * s * s / gamma;
}

// At |s| = gamma both branches give sign(s); the quadratic branch is used
// inside the closed interval.
double huber_derivative(double s, double gamma) {
  const double a = std::abs(s);
  return a >= gamma ? (s > 0.0 ? 1.0 : -1.0) : s / gamma;
}

double huber_curvature(double s, double gamma) {
  return std::abs(s) >= gamma ? 0.0 : 1.0 / gamma;
}

}  // namespace

// ---------------------------------------------------------------------------
// LinearMap

LinearMap LinearMap::identity(Eigen::Index n) {
  if (n < 1) throw DataError("linear map: dimension must be >= 1");
  LinearMap k;
  k.preset_ = Preset::identity;
  k.rows_ = k.cols_ = n;
  return k;
}

LinearMap LinearMap::first_difference(Eigen::Index n) {
  if (n < 2) throw DataError("first-difference map: dimension must be >= 2");
  LinearMap k;
  k.preset_ = Preset::first_difference_1d;
  k.rows_ = n - 1;
  k.cols_ = n;
  return k;
}

LinearMap LinearMap::image_gradient(Eigen::Index side) {
  if (side < 2) throw DataError("image-gradient map: side must be >= 2");
  LinearMap k;
  k.preset_ = Preset::image_gradient_2d;
  k.side_ = side;
  k.rows_ = 2 * side * side;
  k.cols_ = side * side;
  return k;
}

LinearMap LinearMap::dense(Eigen::MatrixXd m) {
  if (m.rows() < 1 || m.cols() < 1) throw DataError("linear map: empty matrix");
  if (!m.allFinite()) throw DataError("linear map: non-finite entries");
  LinearMap k;
  k.preset_ = Preset::dense;
  k.rows_ = m.rows();
  k.cols_ = m.cols();
  k.k_ = std::make_shared<const Eigen::MatrixXd>(std::move(m));
  return k;
}

Eigen::VectorXd LinearMap::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw DataError("linear map apply: dimension mismatch");
  switch (preset_) {
    case Preset::identity:
      return x;
    case Preset::first_difference_1d: {
      Eigen::VectorXd out(rows_);
      for (Eigen::Index i = 0; i + 1 < cols_; ++i) out[i] = x[i] - x[i + 1];
      return out;
    }
    case Preset::image_gradient_2d: {
      // Column-major side x side image; horizontal then vertical forward
      // differences, replicate boundary (last column/row difference is 0).
      const Eigen::Index s = side_;
      Eigen::Map<const Eigen::MatrixXd> img(x.data(), s, s);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(rows_);
      Eigen::Map<Eigen::MatrixXd> gh(out.data(), s, s);
      Eigen::Map<Eigen::MatrixXd> gv(out.data() + s * s, s, s);
      for (Eigen::Index c = 0; c + 1 < s; ++c) gh.col(c) = img.col(c + 1) - img.col(c);
      for (Eigen::Index c = 0; c < s; ++c) {
        for (Eigen::Index r = 0; r + 1 < s; ++r) gv(r, c) = img(r + 1, c) - img(r, c);
      }
      return out;
    }
    case Preset::dense:
      return (*k_) * x;
  }
  throw DataError("linear map apply: unknown preset");
}

Eigen::VectorXd LinearMap::apply_transpose(const Eigen::VectorXd& z) const {
  if (z.size() != rows_) throw DataError("linear map transpose apply: dimension mismatch");
  switch (preset_) {
    case Preset::identity:
      return z;
    case Preset::first_difference_1d: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
      for (Eigen::Index i = 0; i + 1 < cols_; ++i) {
        out[i] += z[i];
        out[i + 1] -= z[i];
      }
      return out;
    }
    case Preset::image_gradient_2d: {
      const Eigen::Index s = side_;
      Eigen::Map<const Eigen::MatrixXd> gh(z.data(), s, s);
      Eigen::Map<const Eigen::MatrixXd> gv(z.data() + s * s, s, s);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
      Eigen::Map<Eigen::MatrixXd> img(out.data(), s, s);
      for (Eigen::Index c = 0; c + 1 < s; ++c) {
        img.col(c + 1) += gh.col(c);
        img.col(c) -= gh.col(c);
      }
      for (Eigen::Index c = 0; c < s; ++c) {
        for (Eigen::Index r = 0; r + 1 < s; ++r) {
          img(r + 1, c) += gv(r, c);
          img(r, c) -= gv(r, c);
        }
      }
      return out;
    }
    case Preset::dense:
      return k_->transpose() * z;
  }
  throw DataError("linear map transpose apply: unknown preset");
}

Eigen::MatrixXd LinearMap::gram() const {
  switch (preset_) {
    case Preset::identity:
      return Eigen::MatrixXd::Identity(cols_, cols_);
    case Preset::first_difference_1d: {
      // The 1-D Neumann Laplacian.
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(cols_, cols_);
      for (Eigen::Index i = 0; i + 1 < cols_; ++i) {
        g(i, i) += 1.0;
        g(i + 1, i + 1) += 1.0;
        g(i, i + 1) -= 1.0;
        g(i + 1, i) -= 1.0;
      }
      return g;
    }
    case Preset::image_gradient_2d: {
      // 2-D Neumann Laplacian: L (x) I + I (x) L on the side x side grid.
      const Eigen::Index s = side_;
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(cols_, cols_);
      auto couple = [&](Eigen::Index p, Eigen::Index q) {
        g(p, p) += 1.0;
        g(q, q) += 1.0;
        g(p, q) -= 1.0;
        g(q, p) -= 1.0;
      };
      for (Eigen::Index c = 0; c < s; ++c) {
        for (Eigen::Index r = 0; r < s; ++r) {
          if (r + 1 < s) couple(c * s + r, c * s + r + 1);
          if (c + 1 < s) couple(c * s + r, (c + 1) * s + r);
        }
      }
      return g;
    }
    case Preset::dense:
      return k_->transpose() * (*k_);
  }
  throw DataError("linear map gram: unknown preset");
}

// ---------------------------------------------------------------------------
// Regularizer

Regularizer Regularizer::tikhonov() {
  Regularizer r;
  r.kind_ = Kind::tikhonov;
  return r;
}

Regularizer Regularizer::generalized_tikhonov(LinearMap k) {
  Regularizer r;
  r.kind_ = Kind::generalized_tikhonov;
  r.map_ = std::make_shared<const LinearMap>(std::move(k));
  return r;
}

Regularizer Regularizer::huber(double gamma) {
  if (!(gamma > 0.0)) throw DataError("huber regularizer: gamma must be positive");
  Regularizer r;
  r.kind_ = Kind::huber;
  r.gamma_ = gamma;
  return r;
}

Regularizer Regularizer::generalized_huber(LinearMap k, double gamma) {
  if (!(gamma > 0.0)) throw DataError("generalized huber regularizer: gamma must be positive");
  Regularizer r;
  r.kind_ = Kind::generalized_huber;
  r.gamma_ = gamma;
  r.map_ = std::make_shared<const LinearMap>(std::move(k));
  return r;
}

Regularizer Regularizer::elastic_huber(double beta, double gamma) {
  if (!(gamma > 0.0)) throw DataError("elastic huber regularizer: gamma must be positive");
  if (!(beta > 0.0)) throw DataError("elastic huber regularizer: beta must be positive");
  Regularizer r;
  r.kind_ = Kind::elastic_huber;
  r.gamma_ = gamma;
  r.beta_ = beta;
  return r;
}

double Regularizer::eval(const Eigen::VectorXd& x) const {
  require_finite(x, "regularizer eval");
  switch (kind_) {
    case Kind::tikhonov:
      return 0.5 * x.squaredNorm();
    case Kind::generalized_tikhonov:
      return 0.5 * map_->apply(x).squaredNorm();
    case Kind::huber: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) acc += huber_value(x[i], gamma_);
      return acc;
    }
    case Kind::generalized_huber: {
      const Eigen::VectorXd kx = map_->apply(x);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < kx.size(); ++i) acc += huber_value(kx[i], gamma_);
      return acc;
    }
    case Kind::elastic_huber: {
      double acc = 0.5 * beta_ * x.squaredNorm();
      for (Eigen::Index i = 0; i < x.size(); ++i) acc += huber_value(x[i], gamma_);
      return acc;
    }
  }
  throw DataError("regularizer eval: unknown kind");
}

Eigen::VectorXd Regularizer::gradient(const Eigen::VectorXd& x) const {
  require_finite(x, "regularizer gradient");
  switch (kind_) {
    case Kind::tikhonov:
      return x;
    case Kind::generalized_tikhonov:
      return map_->apply_transpose(map_->apply(x));
    case Kind::huber: {
      Eigen::VectorXd g(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = huber_derivative(x[i], gamma_);
      return g;
    }
    case Kind::generalized_huber: {
      Eigen::VectorXd kx = map_->apply(x);
      for (Eigen::Index i = 0; i < kx.size(); ++i) kx[i] = huber_derivative(kx[i], gamma_);
      return map_->apply_transpose(kx);
    }
    case Kind::elastic_huber: {
      Eigen::VectorXd g = beta_ * x;
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += huber_derivative(x[i], gamma_);
      return g;
    }
  }
  throw DataError("regularizer gradient: unknown kind");
}

Eigen::MatrixXd Regularizer::hessian(const Eigen::VectorXd& x) const {
  require_finite(x, "regularizer hessian");
  const Eigen::Index n = x.size();
  switch (kind_) {
    case Kind::tikhonov:
      return Eigen::MatrixXd::Identity(n, n);
    case Kind::generalized_tikhonov:
      return map_->gram();
    case Kind::huber: {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) h(i, i) = huber_curvature(x[i], gamma_);
      return h;
    }
    case Kind::generalized_huber: {
      // K^T diag(hub''(Kx)) K, assembled directly for the structured presets.
      const Eigen::VectorXd kx = map_->apply(x);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      switch (map_->preset()) {
        case LinearMap::Preset::identity:
          for (Eigen::Index i = 0; i < n; ++i) h(i, i) = huber_curvature(kx[i], gamma_);
          return h;
        case LinearMap::Preset::first_difference_1d:
          for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double w = huber_curvature(kx[i], gamma_);
            h(i, i) += w;
            h(i + 1, i + 1) += w;
            h(i, i + 1) -= w;
            h(i + 1, i) -= w;
          }
          return h;
        default: {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
          for (Eigen::Index j = 0; j < n; ++j) {
            e[j] = 1.0;
            Eigen::VectorXd ke = map_->apply(e);
            for (Eigen::Index i = 0; i < ke.size(); ++i) ke[i] *= huber_curvature(kx[i], gamma_);
            h.col(j) = map_->apply_transpose(ke);
            e[j] = 0.0;
          }
          return h;
        }
      }
    }
    case Kind::elastic_huber: {
      Eigen::MatrixXd h = beta_ * Eigen::MatrixXd::Identity(n, n);
      for (Eigen::Index i = 0; i < n; ++i) h(i, i) += huber_curvature(x[i], gamma_);
      return h;
    }
  }
  throw DataError("regularizer hessian: unknown kind");
}

double Regularizer::bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const {
  return eval(x) - eval(z) - gradient(z).dot(x - z);
}

double Regularizer::linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const {
  return eval(z) + gradient(z).dot(x - z);
}

double Regularizer::symmetric_bregman(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const {
  return (gradient(x) - gradient(z)).dot(x - z);
}

}  // namespace bilearn
