#pragma once

// Rectangular Kohonen self-organizing map trained online with a Gaussian
// neighborhood and linearly decaying learning rate and radius.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/random.hpp"

namespace trolldetect::som {

enum class InitMethod {
  random_uniform_in_data_box,
  pca_plane,
};

inline const char* to_string(InitMethod m) {
  return m == InitMethod::pca_plane ? "pca_plane" : "random_uniform_in_data_box";
}

inline InitMethod init_method_from_string(const std::string& s) {
  if (s == "random_uniform_in_data_box" || s == "random") return InitMethod::random_uniform_in_data_box;
  if (s == "pca_plane" || s == "pca") return InitMethod::pca_plane;
  throw Error(ErrorKind::input, "unknown init method '" + s + "'");
}

struct SomConfig {
  std::size_t grid_width = 10;
  std::size_t grid_height = 10;
  double lr_start = 0.3;
  double lr_end = 0.005;
  double radius_start = 4.0;
  double radius_end = 0.1;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::random_uniform_in_data_box;
  /// Stop once the epoch-over-epoch QE improvement stays below 1e-6 for 20
  /// consecutive epochs.
  bool early_stopping = false;

  void validate() const {
    if (grid_width == 0 || grid_height == 0)
      throw Error(ErrorKind::input, "grid dimensions must be positive");
    if (!(0.0 < lr_end && lr_end <= lr_start && lr_start <= 1.0))
      throw Error(ErrorKind::input, "learning rates must satisfy 0 < lr_end <= lr_start <= 1");
    if (!(0.0 < radius_end && radius_end <= radius_start))
      throw Error(ErrorKind::input, "radii must satisfy 0 < radius_end <= radius_start");
    if (max_epochs == 0) throw Error(ErrorKind::input, "max_epochs must be at least 1");
  }

  friend bool operator==(const SomConfig&, const SomConfig&) = default;
};

/// Codebook of width*height nodes. Node n sits at row n / width, column
/// n % width; weights are stored node-major.
class SomGrid {
 public:
  SomGrid() = default;
  SomGrid(std::size_t width, std::size_t height, std::size_t dim)
      : width_(width), height_(height), dim_(dim), weights_(width * height * dim, 0.0) {}
  SomGrid(std::size_t width, std::size_t height, std::size_t dim,
          std::vector<double> weights)
      : width_(width), height_(height), dim_(dim), weights_(std::move(weights)) {
    if (weights_.size() != width * height * dim)
      throw Error(ErrorKind::input, "codebook size does not match grid dimensions");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t node_count() const noexcept { return width_ * height_; }

  std::span<const double> node(std::size_t n) const {
    return std::span<const double>(weights_).subspan(n * dim_, dim_);
  }
  std::span<double> node(std::size_t n) {
    return std::span<double>(weights_).subspan(n * dim_, dim_);
  }

  std::size_t row_of(std::size_t n) const noexcept { return n / width_; }
  std::size_t col_of(std::size_t n) const noexcept { return n % width_; }

  /// Squared Euclidean distance between two nodes' grid coordinates.
  double grid_distance_sq(std::size_t a, std::size_t b) const noexcept {
    const double dr = static_cast<double>(row_of(a)) - static_cast<double>(row_of(b));
    const double dc = static_cast<double>(col_of(a)) - static_cast<double>(col_of(b));
    return dr * dr + dc * dc;
  }

  std::span<const double> weights() const noexcept { return weights_; }

  bool all_finite() const {
    return std::all_of(weights_.begin(), weights_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const SomGrid&, const SomGrid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
};

struct TrainedSom {
  SomGrid grid;
  double initial_qe = 0.0;          // before the first epoch
  std::vector<double> qe_history;   // one entry per completed epoch
  SomConfig config;

  friend bool operator==(const TrainedSom&, const TrainedSom&) = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

/// Index of the node nearest to sample; ties go to the smallest index.
inline std::size_t best_matching_unit(const SomGrid& grid,
                                      std::span<const double> sample) {
  if (sample.size() != grid.dim())
    throw Error(ErrorKind::input, "sample dimension does not match codebook");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double d = squared_distance(grid.node(n), sample);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

struct GridPosition {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const GridPosition&, const GridPosition&) = default;
};

inline GridPosition project(const SomGrid& grid, std::span<const double> sample) {
  const std::size_t n = best_matching_unit(grid, sample);
  return {grid.row_of(n), grid.col_of(n)};
}

/// Linear interpolation from start (epoch 0) to end (epoch max_epochs - 1).
inline double schedule_value(double start, double end, std::size_t epoch,
                             std::size_t max_epochs) {
  if (max_epochs <= 1) return start;
  if (epoch + 1 >= max_epochs) return end;
  const double t = static_cast<double>(epoch) / static_cast<double>(max_epochs - 1);
  return start + (end - start) * t;
}

/// Gaussian neighborhood kernel on squared grid distance.
inline double neighborhood_weight(double grid_dist_sq, double radius) {
  return std::exp(-grid_dist_sq / (2.0 * radius * radius));
}

/// Mean Euclidean distance from each row to its best-matching node.
inline double quantization_error(const SomGrid& grid,
                                 const features::FeatureMatrix& data) {
  if (data.cols() != grid.dim())
    throw Error(ErrorKind::input, "data dimension does not match codebook");
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto row = data.row(r);
    sum += std::sqrt(squared_distance(grid.node(best_matching_unit(grid, row)), row));
  }
  return sum / static_cast<double>(data.rows());
}

namespace detail {

struct Box {
  std::vector<double> lo, hi;
};

inline Box data_box(const features::FeatureMatrix& data) {
  Box box{std::vector<double>(data.cols()), std::vector<double>(data.cols())};
  for (std::size_t c = 0; c < data.cols(); ++c) {
    box.lo[c] = box.hi[c] = data(0, c);
    for (std::size_t r = 1; r < data.rows(); ++r) {
      box.lo[c] = std::min(box.lo[c], data(r, c));
      box.hi[c] = std::max(box.hi[c], data(r, c));
    }
  }
  return box;
}

// Leading eigenvector of a symmetric positive semi-definite matrix by power
// iteration from a fixed start vector.
inline std::vector<double> leading_eigenvector(const std::vector<double>& a,
                                               std::size_t n, double& eigenvalue) {
  std::vector<double> v(n), next(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (auto& x : v) x /= norm;

  eigenvalue = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * v[j];
      next[i] = s;
    }
    norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (norm == 0.0) break;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      change = std::max(change, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    eigenvalue = norm;
    if (change < 1e-12) break;
  }
  // Fix the sign: largest-magnitude component positive.
  const auto big = std::max_element(v.begin(), v.end(), [](double x, double y) {
    return std::abs(x) < std::abs(y);
  });
  if (*big < 0.0)
    for (auto& x : v) x = -x;
  return v;
}

}  // namespace detail

/// Initial codebook. Deterministic in (config, data).
///
/// random_uniform_in_data_box draws each component uniformly from the data's
/// per-dimension range. pca_plane lays the nodes out on the plane of the two
/// leading principal axes (+-2 standard deviations), clamped to the data box.
inline SomGrid init_grid(const SomConfig& config, const features::FeatureMatrix& data) {
  config.validate();
  if (data.empty()) throw Error(ErrorKind::numeric, "no training rows");
  const std::size_t dim = data.cols();
  SomGrid grid(config.grid_width, config.grid_height, dim);
  const auto box = detail::data_box(data);

  if (config.init == InitMethod::random_uniform_in_data_box) {
    Rng rng(derive_seed(config.seed, 1));
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      auto w = grid.node(n);
      for (std::size_t d = 0; d < dim; ++d) w[d] = rng.uniform(box.lo[d], box.hi[d]);
    }
    return grid;
  }

  const auto rows = static_cast<double>(data.rows());
  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += data(r, d);
  for (auto& m : mean) m /= rows;

  std::vector<double> cov(dim * dim, 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        cov[i * dim + j] += (data(r, i) - mean[i]) * (data(r, j) - mean[j]) / rows;

  double l1 = 0.0, l2 = 0.0;
  const auto v1 = detail::leading_eigenvector(cov, dim, l1);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) cov[i * dim + j] -= l1 * v1[i] * v1[j];
  const auto v2 = detail::leading_eigenvector(cov, dim, l2);

  const auto spread = [](std::size_t i, std::size_t count) {
    return count <= 1 ? 0.0
                      : 2.0 * (2.0 * static_cast<double>(i) / static_cast<double>(count - 1) - 1.0);
  };
  const double s1 = std::sqrt(std::max(l1, 0.0));
  const double s2 = std::sqrt(std::max(l2, 0.0));
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double a = spread(grid.col_of(n), grid.width()) * s1;
    const double b = spread(grid.row_of(n), grid.height()) * s2;
    auto w = grid.node(n);
    for (std::size_t d = 0; d < dim; ++d)
      w[d] = std::clamp(mean[d] + a * v1[d] + b * v2[d], box.lo[d], box.hi[d]);
  }
  return grid;
}

/// Moves every node toward the sample by lr * h(grid distance to the BMU).
/// Returns the BMU.
inline std::size_t update_step(SomGrid& grid, std::span<const double> sample,
                               double lr, double radius) {
  const std::size_t bmu = best_matching_unit(grid, sample);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double rate = lr * neighborhood_weight(grid.grid_distance_sq(n, bmu), radius);
    if (rate <= 0.0) continue;
    auto w = grid.node(n);
    for (std::size_t d = 0; d < w.size(); ++d) {
      const double x = sample[d];
      if (rate >= 1.0) {
        w[d] = x;
        continue;
      }
      // Rounding may overshoot the segment [w, x] by an ulp; clamp back.
      const double moved = w[d] + rate * (x - w[d]);
      w[d] = std::clamp(moved, std::min(w[d], x), std::max(w[d], x));
    }
  }
  return bmu;
}

struct NoObserver {
  void operator()(std::size_t /*epoch*/, const SomGrid& /*grid*/) const noexcept {}
};

/// Online training. Each epoch visits every row once in a freshly shuffled
/// order; learning rate and radius are fixed within an epoch. The observer is
/// called after every epoch with the epoch index and the current codebook.
template <typename Observer = NoObserver>
TrainedSom train(const SomConfig& config, const features::FeatureMatrix& data,
                 Observer&& observer = {}) {
  config.validate();
  if (data.empty()) throw Error(ErrorKind::numeric, "no training rows");
  if (!data.all_finite())
    throw Error(ErrorKind::numeric, "training data contains non-finite values");

  TrainedSom result;
  result.config = config;
  result.grid = init_grid(config, data);
  result.initial_qe = quantization_error(result.grid, data);
  result.qe_history.reserve(config.max_epochs);

  Rng order_rng(derive_seed(config.seed, 2));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double previous_qe = result.initial_qe;
  std::size_t stall = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = schedule_value(config.lr_start, config.lr_end, epoch, config.max_epochs);
    const double radius =
        schedule_value(config.radius_start, config.radius_end, epoch, config.max_epochs);
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t r : order) update_step(result.grid, data.row(r), lr, radius);

    const double qe = quantization_error(result.grid, data);
    result.qe_history.push_back(qe);
    observer(epoch, static_cast<const SomGrid&>(result.grid));

    if (config.early_stopping) {
      stall = previous_qe - qe < 1e-6 ? stall + 1 : 0;
      if (stall >= 20) break;
    }
    previous_qe = qe;
  }
  return result;
}

}  // namespace trolldetect::som
