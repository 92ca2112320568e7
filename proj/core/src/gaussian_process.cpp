#include "marlmap/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace marlmap {

FeatureEncoder::FeatureEncoder(std::span<const ParameterSpec> params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    params_.push_back(&p);
    if (p.kind == ParameterKind::Categorical) {
      categorical_.push_back(i);
      continue;
    }
    const auto [lo_it, hi_it] = std::minmax_element(p.values.begin(), p.values.end());
    Column col{i, *lo_it > 0, static_cast<double>(*lo_it), static_cast<double>(*hi_it)};
    if (col.log_scale) {
      col.lo = std::log(col.lo);
      col.hi = std::log(col.hi);
    }
    numeric_.push_back(col);
  }
}

FeatureVector FeatureEncoder::encode(std::span<const std::size_t> index) const {
  FeatureVector f;
  f.numeric.reserve(numeric_.size());
  for (const auto& col : numeric_) {
    double v = static_cast<double>(params_[col.param]->values[index[col.param]]);
    if (col.log_scale) v = std::log(v);
    f.numeric.push_back(col.hi > col.lo ? (v - col.lo) / (col.hi - col.lo) : 0.0);
  }
  f.categories.reserve(categorical_.size());
  for (auto i : categorical_) f.categories.push_back(index[i]);
  return f;
}

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.numeric.size(); ++i) {
    const double t = a.numeric[i] - b.numeric[i];
    d += t * t;
  }
  for (std::size_t i = 0; i < a.categories.size(); ++i) {
    if (a.categories[i] != b.categories[i]) d += 2.0;
  }
  return d;
}

struct GaussianProcess::Impl {
  double length_scale;
  double noise;
  std::vector<FeatureVector> x;
  std::vector<double> y;
  Eigen::MatrixXd chol;  // lower factor in the leading n x n block
  std::size_t n = 0;

  mutable bool alpha_stale = true;
  mutable Eigen::VectorXd alpha;
  mutable double y_mean = 0.0;
  mutable double y_scale = 1.0;

  double kernel(const FeatureVector& a, const FeatureVector& b) const {
    return std::exp(-squared_distance(a, b) / (2.0 * length_scale * length_scale));
  }

  void reserve(std::size_t cap) {
    if (static_cast<std::size_t>(chol.rows()) >= cap) return;
    std::size_t grown = std::max<std::size_t>(cap, 2 * static_cast<std::size_t>(chol.rows()));
    grown = std::max<std::size_t>(grown, 16);
    Eigen::MatrixXd bigger = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grown), static_cast<Eigen::Index>(grown));
    const auto m = static_cast<Eigen::Index>(n);
    bigger.topLeftCorner(m, m) = chol.topLeftCorner(m, m);
    chol = std::move(bigger);
  }

  bool factor_with(double jitter) {
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
        k(i, j) = v;
        k(j, i) = v;
      }
      k(i, i) += jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return false;
    n = 0;
    reserve(x.size());
    chol.topLeftCorner(m, m) = llt.matrixL();
    n = x.size();
    return true;
  }

  void refactor() {
    alpha_stale = true;
    if (factor_with(noise)) return;
    if (factor_with(10.0 * noise)) {
      noise *= 10.0;
      return;
    }
    throw NumericError("GaussianProcess: Cholesky factorization failed after jitter retry");
  }

  void update_alpha() const {
    if (!alpha_stale) return;
    const auto m = static_cast<Eigen::Index>(n);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(std::max<std::size_t>(1, y.size()));
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(std::max<std::size_t>(1, y.size()));
    y_mean = mean;
    y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
    Eigen::VectorXd target(m);
    for (Eigen::Index i = 0; i < m; ++i) target(i) = (y[static_cast<std::size_t>(i)] - y_mean) / y_scale;
    const auto l = chol.topLeftCorner(m, m).triangularView<Eigen::Lower>();
    alpha = l.solve(target);
    l.transpose().solveInPlace(alpha);
    alpha_stale = false;
  }
};

GaussianProcess::GaussianProcess(double length_scale, double noise) : impl_(std::make_unique<Impl>()) {
  if (!(length_scale > 0.0) || !(noise > 0.0)) {
    throw std::invalid_argument("GaussianProcess: length scale and noise must be > 0");
  }
  impl_->length_scale = length_scale;
  impl_->noise = noise;
}

GaussianProcess::~GaussianProcess() = default;
GaussianProcess::GaussianProcess(GaussianProcess&&) noexcept = default;
GaussianProcess& GaussianProcess::operator=(GaussianProcess&&) noexcept = default;

void GaussianProcess::fit(std::vector<FeatureVector> x, std::vector<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("GaussianProcess::fit: size mismatch");
  impl_->x = std::move(x);
  impl_->y = std::move(y);
  impl_->refactor();
}

void GaussianProcess::add(FeatureVector x, double y) {
  auto& s = *impl_;
  const auto m = static_cast<Eigen::Index>(s.n);
  Eigen::VectorXd k(m);
  for (Eigen::Index i = 0; i < m; ++i) k(i) = s.kernel(s.x[static_cast<std::size_t>(i)], x);
  const double kxx = s.kernel(x, x) + s.noise;
  s.x.push_back(std::move(x));
  s.y.push_back(y);
  s.alpha_stale = true;

  Eigen::VectorXd l = s.chol.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(k);
  const double d = kxx - l.squaredNorm();
  if (!(d > 0.0)) {
    s.refactor();
    return;
  }
  s.reserve(s.n + 1);
  s.chol.block(m, 0, 1, m) = l.transpose();
  s.chol(m, m) = std::sqrt(d);
  s.n += 1;
}

void GaussianProcess::retain(std::span<const std::size_t> keep) {
  auto& s = *impl_;
  std::vector<FeatureVector> x;
  std::vector<double> y;
  for (auto i : keep) {
    x.push_back(s.x.at(i));
    y.push_back(s.y.at(i));
  }
  s.x = std::move(x);
  s.y = std::move(y);
  s.refactor();
}

std::size_t GaussianProcess::size() const { return impl_->n; }
const std::vector<double>& GaussianProcess::targets() const { return impl_->y; }

Posterior GaussianProcess::predict(const FeatureVector& x) const {
  return predict(std::span<const FeatureVector>(&x, 1)).front();
}

std::vector<Posterior> GaussianProcess::predict(std::span<const FeatureVector> xs) const {
  const auto& s = *impl_;
  std::vector<Posterior> out(xs.size());
  if (s.n == 0) {
    for (auto& p : out) p = {0.0, 1.0};
    return out;
  }
  s.update_alpha();
  const auto m = static_cast<Eigen::Index>(s.n);
  const auto p = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd kstar(m, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      kstar(i, j) = s.kernel(s.x[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::VectorXd mean = kstar.transpose() * s.alpha;
  const Eigen::MatrixXd v = s.chol.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(kstar);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = std::max(0.0, 1.0 - v.col(j).squaredNorm());
    out[static_cast<std::size_t>(j)] = {s.y_mean + s.y_scale * mean(j), s.y_scale * s.y_scale * var};
  }
  return out;
}

double expected_improvement(const Posterior& p, double best) {
  const double sigma = std::sqrt(std::max(0.0, p.variance));
  const double gain = p.mean - best;
  if (sigma <= 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  if (z < -6.0) {
    // z*Phi(z) + phi(z) cancels badly in the far tail; use its asymptotic series.
    const double z2 = z * z;
    return sigma * pdf / z2 * (1.0 - 3.0 / z2 + 15.0 / (z2 * z2));
  }
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return sigma * (z * cdf + pdf);
}

}  // namespace marlmap
