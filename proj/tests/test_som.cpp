#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "trolldetect/som.hpp"

using namespace trolldetect;
using som::SomConfig;
using som::SomGrid;

namespace {

SomConfig small_config(std::size_t epochs = 50) {
  SomConfig c;
  c.grid_width = 5;
  c.grid_height = 4;
  c.max_epochs = epochs;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(Schedule, ExactEndpoints) {
  EXPECT_EQ(som::schedule_value(0.3, 0.005, 0, 1000), 0.3);
  EXPECT_EQ(som::schedule_value(0.3, 0.005, 999, 1000), 0.005);
  EXPECT_EQ(som::schedule_value(4.0, 0.1, 0, 1000), 4.0);
  EXPECT_EQ(som::schedule_value(4.0, 0.1, 999, 1000), 0.1);
  EXPECT_EQ(som::schedule_value(4.0, 0.1, 0, 1), 4.0);
}

TEST(Schedule, LinearAndMonotone) {
  EXPECT_DOUBLE_EQ(som::schedule_value(1.0, 0.0, 5, 11), 0.5);
  double prev = 1e9;
  for (std::size_t e = 0; e < 100; ++e) {
    const double v = som::schedule_value(4.0, 0.1, e, 100);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Neighborhood, GaussianKernel) {
  EXPECT_EQ(som::neighborhood_weight(0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(som::neighborhood_weight(4.0, 2.0), std::exp(-0.5));
  EXPECT_LT(som::neighborhood_weight(1.0, 0.1), 1e-20);
}

TEST(Grid, GeometryAndIndexing) {
  const SomGrid g(4, 3, 2);
  EXPECT_EQ(g.node_count(), 12u);
  EXPECT_EQ(g.row_of(5), 1u);
  EXPECT_EQ(g.col_of(5), 1u);
  EXPECT_EQ(g.grid_distance_sq(0, 11), 9.0 + 4.0);
  EXPECT_THROW(SomGrid(2, 2, 3, std::vector<double>(11)), Error);
}

TEST(Bmu, MatchesBruteForceWithPlantedTies) {
  Rng rng(123);
  for (int t = 0; t < 500; ++t) {
    const std::size_t w = 1 + rng.below(8), h = 1 + rng.below(8), dim = 1 + rng.below(6);
    auto grid = support::random_grid(w, h, dim, rng);
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform();
    if (t % 2 == 0 && grid.node_count() > 1) {
      // Duplicate node i at j > i and query exactly at it.
      const std::size_t i = rng.below(grid.node_count() - 1);
      const std::size_t j = i + 1 + rng.below(grid.node_count() - i - 1);
      for (std::size_t d = 0; d < dim; ++d) grid.node(j)[d] = grid.node(i)[d];
      x.assign(grid.node(i).begin(), grid.node(i).end());
      ASSERT_EQ(som::best_matching_unit(grid, x), i);
    }
    ASSERT_EQ(som::best_matching_unit(grid, x), support::brute_bmu(grid, x));
  }
}

TEST(Bmu, AllEqualNodesPickZero) {
  const SomGrid g(3, 3, 2, std::vector<double>(18, 0.5));
  const std::vector<double> x{0.1, 0.9};
  EXPECT_EQ(som::best_matching_unit(g, x), 0u);
  EXPECT_EQ(som::project(g, x), (som::GridPosition{0, 0}));
}

TEST(Update, FullRateCopiesSampleAndStaysOnSegment) {
  SomGrid g(3, 1, 2, {0.0, 0.0, 1.0, 1.0, 0.2, 0.8});
  const std::vector<double> x{0.9, 0.8};
  const auto bmu = som::update_step(g, x, 1.0, 0.1);
  EXPECT_EQ(bmu, 1u);
  EXPECT_EQ(g.node(1)[0], 0.9);
  EXPECT_EQ(g.node(1)[1], 0.8);
  // Neighbours barely move at radius 0.1 and never overshoot the sample.
  EXPECT_LE(g.node(0)[0], 0.9);
  EXPECT_LE(g.node(0)[1], 0.8);
  EXPECT_LE(g.node(2)[0], 0.9);
}

TEST(Init, RandomInitInsideDataBox) {
  Rng rng(2);
  const auto data = support::random_matrix(30, 4, rng, -2.0, 3.0);
  const auto grid = som::init_grid(small_config(), data);
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    for (std::size_t d = 0; d < 4; ++d) {
      double lo = 1e9, hi = -1e9;
      for (std::size_t r = 0; r < data.rows(); ++r) {
        lo = std::min(lo, data(r, d));
        hi = std::max(hi, data(r, d));
      }
      EXPECT_GE(grid.node(n)[d], lo);
      EXPECT_LE(grid.node(n)[d], hi);
    }
}

TEST(Init, PcaPlaneIsDeterministicAndSpansLeadingAxis) {
  // Points along the diagonal of the unit square.
  std::vector<double> v;
  for (int i = 0; i <= 20; ++i) {
    v.push_back(i / 20.0);
    v.push_back(i / 20.0);
  }
  const auto data = support::make_matrix(21, 2, v);
  auto c = small_config();
  c.init = som::InitMethod::pca_plane;
  const auto a = som::init_grid(c, data);
  c.seed = 999;  // seed is irrelevant for PCA
  EXPECT_EQ(som::init_grid(c, data), a);
  // Left and right columns sit at opposite ends of the diagonal.
  EXPECT_LT(a.node(0)[0], 0.2);
  EXPECT_GT(a.node(4)[0], 0.8);
  EXPECT_NEAR(a.node(4)[0], a.node(4)[1], 1e-9);
}

TEST(Init, UnitDataBoxGivesUnitWeights) {
  Rng rng(3);
  const auto data = support::random_matrix(50, 12, rng);
  SomConfig c;
  c.seed = 1;
  const auto grid = som::init_grid(c, data);
  EXPECT_EQ(grid.node_count(), 100u);
  EXPECT_EQ(grid.dim(), 12u);
  for (double w : grid.weights()) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(Config, ValidateRejectsBadValues) {
  auto c = small_config();
  c.grid_width = 0;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.lr_start = 0.001;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.radius_end = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = small_config();
  c.max_epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(som::init_method_from_string("pca"), som::InitMethod::pca_plane);
  EXPECT_THROW(som::init_method_from_string("zeros"), Error);
}

TEST(Train, BoxContainmentEveryEpoch) {
  Rng rng(6);
  const auto data = support::random_matrix(40, 3, rng, 0.2, 0.7);
  std::size_t epochs_seen = 0;
  som::train(small_config(60), data, [&](std::size_t, const SomGrid& g) {
    ++epochs_seen;
    for (double w : g.weights()) {
      ASSERT_GE(w, 0.2);
      ASSERT_LE(w, 0.7);
    }
  });
  EXPECT_EQ(epochs_seen, 60u);
}

TEST(Train, DeterministicAndSeedSensitive) {
  Rng rng(6);
  const auto data = support::random_matrix(40, 3, rng);
  const auto a = som::train(small_config(), data);
  const auto b = som::train(small_config(), data);
  EXPECT_EQ(a, b);
  auto c = small_config();
  c.seed = 18;
  EXPECT_NE(som::train(c, data).grid, a.grid);
}

TEST(Train, QuantizationErrorDrops) {
  // Six tight blobs: a trained map should fit them far better than a random one.
  Rng rng(8);
  auto data = support::random_matrix(60, 4, rng);
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t c = 0; c < 4; ++c)
      data(r, c) = 0.15 * static_cast<double>((r % 6 + c) % 6) + 0.02 * data(r, c);
  const auto t = som::train(small_config(100), data);
  ASSERT_EQ(t.qe_history.size(), 100u);
  EXPECT_LE(t.qe_history.back(), 0.5 * t.initial_qe);
  EXPECT_DOUBLE_EQ(t.qe_history.back(), som::quantization_error(t.grid, data));
}

TEST(Train, EarlyStoppingEndsOnStall) {
  // A single point: the error reaches zero and then stalls.
  const auto data = support::make_matrix(1, 2, {0.3, 0.6});
  auto c = small_config(1000);
  c.early_stopping = true;
  const auto t = som::train(c, data);
  EXPECT_LT(t.qe_history.size(), 1000u);
}

TEST(Train, RejectsNonFiniteAndEmptyData) {
  const auto bad = support::make_matrix(2, 1, {0.0, std::nan("")});
  try {
    som::train(small_config(), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
  EXPECT_THROW(som::train(small_config(), features::FeatureMatrix{}), Error);
}
