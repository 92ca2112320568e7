#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "marlmap/mapspace.hpp"

namespace marlmap {

// Numeric view of an index vector: scaled integer coordinates plus the chosen
// option of every categorical parameter. Squared distance between two points
// is sum((x_i - y_i)^2) + 2 * (number of differing categories), i.e. the
// distance of a one-hot encoding without materializing it.
struct FeatureVector {
  std::vector<double> numeric;
  std::vector<std::size_t> categories;
};

// Maps index vectors to features: tile values log-scaled to [0, 1] (linear
// min-max scaling when an option value is not positive), categorical options
// one-hot.
class FeatureEncoder {
 public:
  explicit FeatureEncoder(std::span<const ParameterSpec> params);
  FeatureVector encode(std::span<const std::size_t> index) const;

 private:
  struct Column {
    std::size_t param;
    bool log_scale;
    double lo, hi;
  };
  std::vector<const ParameterSpec*> params_;
  std::vector<Column> numeric_;
  std::vector<std::size_t> categorical_;
};

double squared_distance(const FeatureVector& a, const FeatureVector& b);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact GP regression with a unit-variance RBF kernel and zero-mean prior on
// standardized targets. Observations are appended with an O(n^2) Cholesky
// extension; retain() rebuilds the factor from a subset.
class GaussianProcess {
 public:
  GaussianProcess(double length_scale, double noise);
  ~GaussianProcess();
  GaussianProcess(GaussianProcess&&) noexcept;
  GaussianProcess& operator=(GaussianProcess&&) noexcept;

  // Throws NumericError if the kernel matrix is not positive definite even
  // after one retry with 10x noise.
  void fit(std::vector<FeatureVector> x, std::vector<double> y);
  void add(FeatureVector x, double y);
  // Keep only the listed observations (indices into the current set).
  void retain(std::span<const std::size_t> keep);

  Posterior predict(const FeatureVector& x) const;
  std::vector<Posterior> predict(std::span<const FeatureVector> xs) const;

  std::size_t size() const;
  const std::vector<double>& targets() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Expected improvement for maximization over the incumbent `best`.
double expected_improvement(const Posterior& p, double best);

}  // namespace marlmap
