#pragma once

// Interpretation: decide which clusters hold trolls and assemble the report.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trolldetect/clustering.hpp"
#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/model.hpp"
#include "trolldetect/som.hpp"

namespace trolldetect::detect {

using Json = nlohmann::ordered_json;

struct DetectionParams {
  double z_threshold = 2.0;
  double max_cluster_fraction = 0.2;

  friend bool operator==(const DetectionParams&, const DetectionParams&) = default;
};

/// Flags clusters whose centroid message count (in raw units) lies above
/// mean + z * stddev of the per-user message counts and that hold at most
/// max_cluster_fraction of all users. Clusters without users are never
/// flagged. The result may be empty.
inline std::set<std::size_t> identify_troll_clusters(
    const clustering::ClusterModel& model, const features::FeatureMatrix& raw,
    const features::NormalizationParams& norm, const clustering::Assignments& assignments,
    const DetectionParams& params = {}) {
  if (model.k < 2) throw Error(ErrorKind::numeric, "troll detection needs at least two clusters");
  if (raw.empty()) return {};

  const auto col = features::kMessageCountColumn;
  const auto n = static_cast<double>(raw.rows());
  double mean = 0.0;
  for (std::size_t r = 0; r < raw.rows(); ++r) mean += raw(r, col);
  mean /= n;
  double var = 0.0;
  for (std::size_t r = 0; r < raw.rows(); ++r) var += (raw(r, col) - mean) * (raw(r, col) - mean);
  const double threshold = mean + params.z_threshold * std::sqrt(var / n);

  std::vector<std::size_t> members(model.k, 0);
  for (const auto& [user, cluster] : assignments) ++members[cluster];

  std::set<std::size_t> flagged;
  for (std::size_t c = 0; c < model.k; ++c) {
    if (members[c] == 0) continue;
    const double centroid_m = norm.denormalize(col, model.centroids[c][col]);
    if (centroid_m > threshold &&
        static_cast<double>(members[c]) <= params.max_cluster_fraction * n)
      flagged.insert(c);
  }
  return flagged;
}

struct UserRecord {
  std::string user_id;
  std::size_t cluster = 0;
  std::vector<double> features;  // raw units
  bool troll = false;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct ClusterRecord {
  std::size_t id = 0;
  std::size_t size = 0;           // users
  std::size_t nodes = 0;          // codebook nodes
  std::vector<double> centroid;   // raw units
  bool troll = false;

  friend bool operator==(const ClusterRecord&, const ClusterRecord&) = default;
};

struct ReportMetadata {
  std::uint64_t seed = 0;
  som::SomConfig config;
  model::ClusteringSettings clustering;
  DetectionParams detection;
  std::vector<std::pair<std::size_t, double>> silhouettes;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct TrollReport {
  ReportMetadata metadata;
  std::vector<std::string> features;
  std::size_t k = 0;
  std::vector<ClusterRecord> clusters;
  std::vector<UserRecord> users;
  clustering::SignificanceReport significance;

  std::vector<std::string> trolls() const {
    std::vector<std::string> out;
    for (const auto& u : users)
      if (u.troll) out.push_back(u.user_id);
    return out;
  }

  friend bool operator==(const TrollReport&, const TrollReport&) = default;
};

struct ReportInputs {
  const features::FeatureMatrix& raw;
  const features::NormalizationParams& normalization;
  const clustering::ClusterModel& model;
  const clustering::Assignments& assignments;
  const std::set<std::size_t>& troll_clusters;
  const clustering::SignificanceReport& significance;
  ReportMetadata metadata;
};

/// Users are ordered by user_id and clusters by id.
inline TrollReport build_report(const ReportInputs& in) {
  if (in.assignments.size() != in.raw.rows())
    throw Error(ErrorKind::input, "assignments and feature matrix disagree on the user set");

  TrollReport rep;
  rep.metadata = in.metadata;
  rep.features = in.raw.columns();
  rep.k = in.model.k;
  rep.significance = in.significance;

  std::map<std::string_view, std::size_t> row_of;
  for (std::size_t r = 0; r < in.raw.rows(); ++r) row_of[in.raw.user_ids()[r]] = r;

  std::vector<std::size_t> sizes(in.model.k, 0);
  for (const auto& [user, cluster] : in.assignments) {
    auto it = row_of.find(user);
    if (it == row_of.end())
      throw Error(ErrorKind::input, "assigned user '" + user + "' missing from feature matrix");
    if (cluster >= in.model.k)
      throw Error(ErrorKind::input, "user '" + user + "' assigned to unknown cluster");
    const auto row = in.raw.row(it->second);
    rep.users.push_back({user, cluster, std::vector<double>(row.begin(), row.end()),
                         in.troll_clusters.contains(cluster)});
    ++sizes[cluster];
  }

  const auto nodes = in.model.cluster_sizes();
  for (std::size_t c = 0; c < in.model.k; ++c) {
    ClusterRecord rec{c, sizes[c], nodes[c], {}, in.troll_clusters.contains(c)};
    for (std::size_t d = 0; d < in.model.centroids[c].size(); ++d)
      rec.centroid.push_back(in.normalization.denormalize(d, in.model.centroids[c][d]));
    rep.clusters.push_back(std::move(rec));
  }
  return rep;
}

inline double round_1dp(double v) { return std::round(v * 10.0) / 10.0; }

namespace detail {

inline Json named_values(const std::vector<std::string>& names, const std::vector<double>& v) {
  Json j = Json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = v.at(i);
  return j;
}

inline std::vector<double> values_in_order(const Json& j, const std::vector<std::string>& names) {
  std::vector<double> v;
  for (const auto& n : names) v.push_back(j.at(n).get<double>());
  return v;
}

}  // namespace detail

/// Report JSON. Keys appear in a fixed order; significance scores are
/// rounded to one decimal here and only here.
inline Json to_json(const TrollReport& r) {
  Json j;
  Json meta;
  meta["seed"] = r.metadata.seed;
  meta["som"] = model::config_to_json(r.metadata.config);
  meta["clustering"] = {{"k_min", r.metadata.clustering.k_min},
                        {"k_max", r.metadata.clustering.k_max}};
  meta["detection"] = {{"z_threshold", r.metadata.detection.z_threshold},
                       {"max_cluster_fraction", r.metadata.detection.max_cluster_fraction}};
  Json sil = Json::array();
  for (const auto& [k, s] : r.metadata.silhouettes) sil.push_back({{"k", k}, {"silhouette", s}});
  meta["silhouettes"] = sil;
  j["metadata"] = meta;
  j["features"] = r.features;
  j["k"] = r.k;
  j["trolls"] = r.trolls();

  Json clusters = Json::array();
  for (const auto& c : r.clusters) {
    Json cj;
    cj["id"] = c.id;
    cj["size"] = c.size;
    cj["nodes"] = c.nodes;
    cj["troll"] = c.troll;
    cj["centroid"] = detail::named_values(r.features, c.centroid);
    clusters.push_back(cj);
  }
  j["clusters"] = clusters;

  Json users = Json::array();
  for (const auto& u : r.users) {
    Json uj;
    uj["user_id"] = u.user_id;
    uj["cluster"] = u.cluster;
    uj["troll"] = u.troll;
    uj["features"] = detail::named_values(r.features, u.features);
    users.push_back(uj);
  }
  j["users"] = users;

  Json sig = Json::array();
  for (std::size_t i = 0; i < r.significance.features.size(); ++i) {
    sig.push_back({{"feature", r.significance.features[i]},
                   {"eta_squared", r.significance.eta_squared[i]},
                   {"score", round_1dp(r.significance.scores[i])}});
  }
  j["significance"] = sig;
  return j;
}

inline TrollReport from_json(const Json& j) {
  try {
    TrollReport r;
    const auto& meta = j.at("metadata");
    r.metadata.seed = meta.at("seed").get<std::uint64_t>();
    r.metadata.config = model::config_from_json(meta.at("som"));
    r.metadata.clustering.k_min = meta.at("clustering").at("k_min").get<std::size_t>();
    r.metadata.clustering.k_max = meta.at("clustering").at("k_max").get<std::size_t>();
    r.metadata.detection.z_threshold = meta.at("detection").at("z_threshold").get<double>();
    r.metadata.detection.max_cluster_fraction =
        meta.at("detection").at("max_cluster_fraction").get<double>();
    for (const auto& s : meta.at("silhouettes"))
      r.metadata.silhouettes.emplace_back(s.at("k").get<std::size_t>(),
                                          s.at("silhouette").get<double>());
    r.features = j.at("features").get<std::vector<std::string>>();
    r.k = j.at("k").get<std::size_t>();
    for (const auto& c : j.at("clusters"))
      r.clusters.push_back({c.at("id").get<std::size_t>(), c.at("size").get<std::size_t>(),
                            c.at("nodes").get<std::size_t>(),
                            detail::values_in_order(c.at("centroid"), r.features),
                            c.at("troll").get<bool>()});
    for (const auto& u : j.at("users"))
      r.users.push_back({u.at("user_id").get<std::string>(), u.at("cluster").get<std::size_t>(),
                         detail::values_in_order(u.at("features"), r.features),
                         u.at("troll").get<bool>()});
    for (const auto& s : j.at("significance")) {
      r.significance.features.push_back(s.at("feature").get<std::string>());
      r.significance.eta_squared.push_back(s.at("eta_squared").get<double>());
      r.significance.scores.push_back(s.at("score").get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("corrupt report: ") + e.what());
  }
}

inline std::string serialize(const TrollReport& r) { return to_json(r).dump(2) + "\n"; }

inline TrollReport parse(std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::input, "corrupt report: malformed JSON");
  return from_json(j);
}

}  // namespace trolldetect::detect
