#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "trolldetect/detect.hpp"

using namespace trolldetect;

namespace {

// 145 users: 141 with M in 1..3, four with M around 30. Column 1 is noise.
struct Scenario {
  features::FeatureMatrix raw;
  features::NormalizationParams norm;
  clustering::ClusterModel model;
  clustering::Assignments assignments;
};

Scenario make_scenario() {
  Rng rng(1);
  std::vector<double> v;
  std::vector<std::string> ids;
  for (int u = 0; u < 145; ++u) {
    const bool troll = u >= 141;
    ids.push_back("user" + std::to_string(u));
    v.push_back(troll ? 28.0 + u - 141 : 1.0 + static_cast<double>(rng.below(3)));
    v.push_back(rng.uniform(10.0, 200.0));
  }
  Scenario s;
  s.raw = features::FeatureMatrix(ids, {"M", "L"}, v);
  s.norm = features::fit_normalization(s.raw);
  const auto n = features::apply_normalization(s.raw, s.norm);
  // Cluster 0: trolls; 1: normals; 2: an empty cluster with a large M.
  double troll_m = 0.0, normal_m = 0.0;
  for (std::size_t r = 0; r < 145; ++r) (r >= 141 ? troll_m : normal_m) += n(r, 0);
  s.model = {3, {0, 1, 2}, {{troll_m / 4, 0.5}, {normal_m / 141, 0.5}, {0.99, 0.5}}};
  for (std::size_t r = 0; r < 145; ++r) s.assignments[ids[r]] = r >= 141 ? 0 : 1;
  return s;
}

detect::TrollReport report_for(const Scenario& s, const std::set<std::size_t>& flagged) {
  const auto sig = clustering::field_significance(
      features::apply_normalization(s.raw, s.norm), s.assignments);
  detect::ReportMetadata meta;
  meta.seed = 5;
  meta.silhouettes = {{2, 0.25}, {3, 0.125}};
  return detect::build_report({s.raw, s.norm, s.model, s.assignments, flagged, sig, meta});
}

}  // namespace

TEST(Identify, FlagsSmallHighActivityCluster) {
  const auto s = make_scenario();
  EXPECT_EQ(detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments),
            (std::set<std::size_t>{0}));
}

TEST(Identify, EmptyClusterNeverFlagged) {
  const auto s = make_scenario();
  const auto flagged = detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments);
  EXPECT_FALSE(flagged.contains(2));
}

TEST(Identify, SimilarClustersGiveEmptySet) {
  auto s = make_scenario();
  s.model.centroids[0][0] = s.model.centroids[1][0];
  EXPECT_TRUE(detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments).empty());
}

TEST(Identify, SizeLimit) {
  const auto s = make_scenario();
  detect::DetectionParams p;
  p.max_cluster_fraction = 3.0 / 145.0;
  EXPECT_TRUE(detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments, p).empty());
  p.max_cluster_fraction = 4.0 / 145.0;
  EXPECT_EQ(detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments, p).size(), 1u);
}

TEST(Identify, RaisingZNeverAddsClusters) {
  const auto s = make_scenario();
  std::set<std::size_t> prev{0, 1, 2};
  for (double z = -3.0; z <= 10.0; z += 0.25) {
    const auto cur = detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments,
                                                     {z, 1.0});
    EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end())) << z;
    prev = cur;
  }
  EXPECT_TRUE(prev.empty());
}

TEST(Identify, InvariantUnderClusterRelabeling) {
  const auto s = make_scenario();
  auto p = s;
  const std::size_t perm[] = {2, 0, 1};  // old id -> new id
  for (auto& c : p.model.node_to_cluster) c = perm[c];
  for (std::size_t c = 0; c < 3; ++c) p.model.centroids[perm[c]] = s.model.centroids[c];
  for (auto& [u, c] : p.assignments) c = perm[c];
  const auto a = detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments);
  const auto b = detect::identify_troll_clusters(p.model, p.raw, p.norm, p.assignments);
  std::set<std::size_t> mapped;
  for (auto c : a) mapped.insert(perm[c]);
  EXPECT_EQ(mapped, b);
}

TEST(Identify, MultipleClustersMayBeFlagged) {
  auto s = make_scenario();
  s.model = {3, {0, 1, 2}, {s.model.centroids[0], s.model.centroids[0], s.model.centroids[1]}};
  int i = 0;
  for (auto& [u, c] : s.assignments)
    if (c == 1) c = 2;
    else c = (i++ % 2);
  EXPECT_EQ(detect::identify_troll_clusters(s.model, s.raw, s.norm, s.assignments),
            (std::set<std::size_t>{0, 1}));
}

TEST(Identify, NeedsTwoClusters) {
  const auto s = make_scenario();
  clustering::ClusterModel one{1, {0, 0, 0}, {{0.5, 0.5}}};
  EXPECT_THROW(detect::identify_troll_clusters(one, s.raw, s.norm, s.assignments), Error);
}

TEST(Report, FlagConsistencyAndOrdering) {
  const auto s = make_scenario();
  const auto rep = report_for(s, {0});
  ASSERT_EQ(rep.users.size(), 145u);
  EXPECT_TRUE(std::is_sorted(rep.users.begin(), rep.users.end(),
                             [](const auto& a, const auto& b) { return a.user_id < b.user_id; }));
  for (const auto& u : rep.users) EXPECT_EQ(u.troll, rep.clusters[u.cluster].troll);
  EXPECT_EQ(rep.trolls().size(), 4u);
  EXPECT_EQ(rep.clusters[0].size, 4u);
  EXPECT_EQ(rep.clusters[2].size, 0u);
  // Centroids are reported in raw units.
  EXPECT_GT(rep.clusters[0].centroid[0], 25.0);
}

TEST(Report, JsonRoundTripAndKeyOrder) {
  const auto s = make_scenario();
  const auto rep = report_for(s, {0});
  const auto text = detect::serialize(rep);
  auto back = detect::parse(text);
  // Scores are rounded to one decimal in the file only.
  for (std::size_t i = 0; i < rep.significance.scores.size(); ++i)
    EXPECT_EQ(back.significance.scores[i], detect::round_1dp(rep.significance.scores[i]));
  back.significance.scores = rep.significance.scores;
  EXPECT_EQ(back, rep);
  EXPECT_EQ(detect::serialize(detect::parse(text)), text);

  const auto j = detect::Json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"metadata", "features", "k", "trolls", "clusters",
                                            "users", "significance"}));
}

TEST(Report, RejectsCorruptJson) {
  EXPECT_THROW(detect::parse("{"), Error);
  EXPECT_THROW(detect::parse("{\"metadata\": 1}"), Error);
}

TEST(Report, RoundingHelper) {
  EXPECT_EQ(detect::round_1dp(92.46), 92.5);
  EXPECT_EQ(detect::round_1dp(100.0), 100.0);
  EXPECT_EQ(detect::round_1dp(0.04), 0.0);
}
