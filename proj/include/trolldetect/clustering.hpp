#pragma once

// Two-level clustering: k-means over the SOM codebook with the cluster count
// picked by mean silhouette, users inheriting the cluster of their BMU, and
// per-feature significance as a scaled correlation ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/parallel.hpp"
#include "trolldetect/random.hpp"
#include "trolldetect/som.hpp"

namespace trolldetect::clustering {

/// Row-major point set viewed as n points of length dim.
struct PointSet {
  std::span<const double> values;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> operator[](std::size_t i) const {
    return values.subspan(i * dim, dim);
  }
};

inline PointSet codebook_points(const som::SomGrid& grid) {
  return {grid.weights(), grid.dim()};
}

struct KMeansResult {
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> centroids;
  std::vector<double> inertia_history;  // within-cluster SS after each iteration
  std::size_t iterations = 0;
};

namespace detail {

inline std::size_t nearest(std::span<const double> p,
                           const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = som::squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

/// Greedy k-means++: each new center is the best of 2 + ln(k) candidates
/// drawn by squared-distance sampling, judged by the resulting potential.
inline std::vector<std::vector<double>> plus_plus_seeds(const PointSet& pts,
                                                        std::size_t k, Rng& rng) {
  const std::size_t n = pts.size();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<bool> chosen(n, false);
  std::vector<std::vector<double>> centers;
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centers.emplace_back(pts[i].begin(), pts[i].end());
  };
  take(static_cast<std::size_t>(rng.below(n)));

  std::vector<double> d2(n), trial(n), best_d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = som::squared_distance(pts[i], centers[0]);
  while (centers.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total <= 0.0) {
      // Every remaining point coincides with a center.
      std::size_t pick = n;
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
      take(pick);
      continue;
    }
    std::size_t best = n;
    double best_potential = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::min(d2[i], som::squared_distance(pts[i], pts[pick]));
        potential += trial[i];
      }
      if (best == n || potential < best_potential) {
        best = pick;
        best_potential = potential;
        best_d2.swap(trial);
      }
    }
    take(best);
    d2.swap(best_d2);
  }
  return centers;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding.
///
/// Iterates until the (post-repair) assignment is a fixed point or
/// max_iterations is reached. An empty cluster is refilled with the point
/// farthest from its own centroid, taken from a cluster that can spare it.
inline KMeansResult kmeans(const PointSet& pts, std::size_t k, std::uint64_t seed,
                           std::size_t max_iterations = 300) {
  const std::size_t n = pts.size();
  if (k == 0) throw Error(ErrorKind::input, "k must be positive");
  if (k > n) throw Error(ErrorKind::input, "k exceeds the number of points");

  Rng rng(seed);
  KMeansResult res;
  res.centroids = detail::plus_plus_seeds(pts, k, rng);
  res.labels.assign(n, 0);

  std::vector<std::size_t> previous;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      res.labels[i] = detail::nearest(pts[i], res.centroids);
      ++sizes[res.labels[i]];
    }

    for (std::size_t e = 0; e < k; ++e) {
      if (sizes[e] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[res.labels[i]] < 2) continue;
        const double d = som::squared_distance(pts[i], res.centroids[res.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[res.labels[far]];
      res.labels[far] = e;
      sizes[e] = 1;
      res.centroids[e].assign(pts[far].begin(), pts[far].end());
    }

    for (auto& c : res.centroids) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = res.centroids[res.labels[i]];
      const auto p = pts[i];
      for (std::size_t d = 0; d < pts.dim; ++d) c[d] += p[d];
    }
    for (std::size_t c = 0; c < k; ++c)
      for (auto& x : res.centroids[c]) x /= static_cast<double>(sizes[c]);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += som::squared_distance(pts[i], res.centroids[res.labels[i]]);
    res.inertia_history.push_back(inertia);
    res.iterations = iter + 1;

    if (res.labels == previous) break;
    previous = res.labels;
  }
  return res;
}

/// Codebook clustering. Cluster ids are canonical: ordered by the centroid's
/// first feature (message count) descending, ties by smallest member node.
struct ClusterModel {
  std::size_t k = 0;
  std::vector<std::size_t> node_to_cluster;
  std::vector<std::vector<double>> centroids;  // normalized feature space

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (auto c : node_to_cluster) ++sizes[c];
    return sizes;
  }

  friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

/// Relabels clusters into canonical order without changing memberships.
inline ClusterModel canonical_model(std::size_t k, const std::vector<std::size_t>& labels,
                                    const std::vector<std::vector<double>>& centroids) {
  std::vector<std::size_t> first_member(k, labels.size());
  for (std::size_t i = labels.size(); i-- > 0;) first_member[labels[i]] = i;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (centroids[a][0] != centroids[b][0]) return centroids[a][0] > centroids[b][0];
    return first_member[a] < first_member[b];
  });
  std::vector<std::size_t> new_id(k);
  for (std::size_t i = 0; i < k; ++i) new_id[order[i]] = i;

  ClusterModel model;
  model.k = k;
  model.node_to_cluster.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) model.node_to_cluster[i] = new_id[labels[i]];
  model.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) model.centroids[new_id[c]] = centroids[c];
  return model;
}

inline ClusterModel kmeans_codebook(const som::SomGrid& grid, std::size_t k,
                                    std::uint64_t seed) {
  if (k > grid.node_count())
    throw Error(ErrorKind::input, "k = " + std::to_string(k) + " exceeds node count " +
                                      std::to_string(grid.node_count()));
  const auto res = kmeans(codebook_points(grid), k, seed);
  return canonical_model(k, res.labels, res.centroids);
}

/// Pairwise Euclidean distances, computed once and shared across k.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(const PointSet& pts) : n_(pts.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        d_[i * n_ + j] = d_[j * n_ + i] = std::sqrt(som::squared_distance(pts[i], pts[j]));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

/// Mean silhouette coefficient. Points in singleton clusters score 0.
inline double mean_silhouette(const DistanceMatrix& dist,
                              const std::vector<std::size_t>& labels, std::size_t k) {
  const std::size_t n = dist.size();
  if (n == 0 || k < 2) return 0.0;
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = labels[i];
    if (sizes[own] < 2) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sums[labels[j]] += dist(i, j);
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

struct AutoClusterResult {
  std::size_t k = 0;
  ClusterModel model;
  std::vector<std::pair<std::size_t, double>> silhouettes;  // (k, score)
  bool degenerate = false;  // all codebook vectors identical
};

/// Fits k-means for every k in [k_min, k_max] and keeps the k with the
/// highest mean silhouette (smaller k on ties). k_max is capped at the node
/// count. Per-k seeds derive from `seed` and k, so fits may run on any
/// number of threads with identical results.
inline AutoClusterResult auto_cluster_count(const som::SomGrid& grid,
                                            std::size_t k_min = 2,
                                            std::size_t k_max = 15,
                                            std::uint64_t seed = 0,
                                            std::size_t threads = 1) {
  if (k_min < 2) throw Error(ErrorKind::input, "k_min must be at least 2");
  k_max = std::min(k_max, grid.node_count());
  if (k_max < k_min)
    throw Error(ErrorKind::input, "k range [" + std::to_string(k_min) + ", " +
                                      std::to_string(k_max) + "] is empty for this grid");

  AutoClusterResult out;
  const auto pts = codebook_points(grid);
  bool identical = true;
  for (std::size_t i = 1; i < pts.size() && identical; ++i)
    identical = som::squared_distance(pts[0], pts[i]) == 0.0;
  if (identical) {
    out.k = k_min;
    out.model = kmeans_codebook(grid, k_min, derive_seed(seed, k_min));
    out.degenerate = true;
    return out;
  }

  const DistanceMatrix dist(pts);
  const std::size_t count = k_max - k_min + 1;
  std::vector<ClusterModel> models(count);
  std::vector<double> scores(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const std::size_t k = k_min + i;
    models[i] = kmeans_codebook(grid, k, derive_seed(seed, k));
    scores[i] = mean_silhouette(dist, models[i].node_to_cluster, k);
  });

  std::size_t best = 0;
  for (std::size_t i = 0; i < count; ++i) {
    out.silhouettes.emplace_back(k_min + i, scores[i]);
    if (scores[i] > scores[best]) best = i;
  }
  out.k = k_min + best;
  out.model = std::move(models[best]);
  return out;
}

using Assignments = std::map<std::string, std::size_t, std::less<>>;

/// Cluster of every user's best-matching node.
inline Assignments assign_users(const som::SomGrid& grid, const ClusterModel& model,
                                const features::FeatureMatrix& normalized) {
  if (normalized.cols() != grid.dim())
    throw Error(ErrorKind::input, "feature matrix does not match codebook dimension");
  if (model.node_to_cluster.size() != grid.node_count())
    throw Error(ErrorKind::input, "cluster model does not match codebook");
  Assignments out;
  for (std::size_t r = 0; r < normalized.rows(); ++r)
    out[normalized.user_ids()[r]] =
        model.node_to_cluster[som::best_matching_unit(grid, normalized.row(r))];
  return out;
}

struct SignificanceReport {
  std::vector<std::string> features;
  std::vector<double> eta_squared;  // between-cluster / total variance
  std::vector<double> scores;       // eta_squared scaled so the maximum is 100

  friend bool operator==(const SignificanceReport&, const SignificanceReport&) = default;
};

/// Correlation ratio of every feature with respect to the user clustering.
inline SignificanceReport field_significance(const features::FeatureMatrix& m,
                                             const Assignments& assignments) {
  std::vector<std::size_t> label(m.rows());
  std::map<std::size_t, std::size_t> index_of;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto it = assignments.find(m.user_ids()[r]);
    if (it == assignments.end())
      throw Error(ErrorKind::input, "user '" + m.user_ids()[r] + "' has no cluster assignment");
    label[r] = index_of.try_emplace(it->second, index_of.size()).first->second;
  }
  if (index_of.size() < 2)
    throw Error(ErrorKind::numeric,
                "significance is undefined with fewer than two populated clusters");

  const std::size_t groups = index_of.size();
  SignificanceReport rep;
  rep.features = m.columns();
  rep.eta_squared.assign(m.cols(), 0.0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double lo = m(0, c), hi = m(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r) {
      lo = std::min(lo, m(r, c));
      hi = std::max(hi, m(r, c));
    }
    // A rounded mean of a constant column leaves residue in both sums.
    if (lo == hi) continue;

    std::vector<double> sum(groups, 0.0);
    std::vector<std::size_t> count(groups, 0);
    double grand = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      sum[label[r]] += m(r, c);
      ++count[label[r]];
      grand += m(r, c);
    }
    const double mean = grand / static_cast<double>(m.rows());
    double total = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) total += (m(r, c) - mean) * (m(r, c) - mean);
    double between = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      const double gm = sum[g] / static_cast<double>(count[g]);
      between += static_cast<double>(count[g]) * (gm - mean) * (gm - mean);
    }
    rep.eta_squared[c] = total > 0.0 ? std::min(1.0, between / total) : 0.0;
  }

  const double top = *std::max_element(rep.eta_squared.begin(), rep.eta_squared.end());
  rep.scores.assign(m.cols(), 0.0);
  if (top > 0.0)
    for (std::size_t c = 0; c < m.cols(); ++c) rep.scores[c] = 100.0 * (rep.eta_squared[c] / top);
  return rep;
}

}  // namespace trolldetect::clustering
