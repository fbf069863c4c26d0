#pragma once

// End-to-end pipeline: comments -> per-user features -> SOM -> codebook
// clusters -> troll report, plus component-plane export.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trolldetect/clustering.hpp"
#include "trolldetect/corpus.hpp"
#include "trolldetect/detect.hpp"
#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/model.hpp"
#include "trolldetect/netpbm.hpp"
#include "trolldetect/random.hpp"
#include "trolldetect/som.hpp"
#include "trolldetect/text.hpp"

namespace trolldetect::pipeline {

namespace fs = std::filesystem;

/// Stream tags for seeds derived from the master seed.
inline constexpr std::uint64_t kSomStream = 0x736f6d;         // "som"
inline constexpr std::uint64_t kClusterStream = 0x636c7573;   // "clus"

using WarningSink = std::function<void(const std::string&)>;

struct PipelineConfig {
  fs::path input;
  corpus::Format format = corpus::Format::jsonl;
  bool lenient = false;
  std::size_t min_messages = 1;
  std::string symbols = features::SymbolSet::standard().to_utf8();
  bool homoglyphs = false;
  som::SomConfig som;  // som.seed is ignored; it is derived from `seed`
  model::ClusteringSettings clustering;
  detect::DetectionParams detection;
  fs::path output_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

inline std::uint64_t som_seed(std::uint64_t master) { return derive_seed(master, kSomStream); }
inline std::uint64_t cluster_seed(std::uint64_t master) {
  return derive_seed(master, kClusterStream);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "failed reading '" + path.string() + "'");
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorKind::io, "cannot create directory '" + dir.string() + "'");
}

/// Runs fn, prefixing any error with the stage name.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

// --- individual stages -----------------------------------------------------

/// Parses, groups and extracts. Returns the raw (unnormalized) matrix.
inline features::FeatureMatrix extract_stage(std::string_view input_bytes,
                                             const PipelineConfig& config,
                                             const WarningSink& warn = {}) {
  const auto parsed = stage("corpus", [&] {
    auto result = corpus::parse_comments(input_bytes, {config.format, config.lenient});
    if (warn) {
      for (const auto& issue : result.skipped) warn("skipped " + corpus::describe(issue));
      if (!result.skipped.empty())
        warn("skipped " + std::to_string(result.skipped.size()) + " record(s)");
    }
    if (result.comments.empty()) throw Error(ErrorKind::input, "no comments in input");
    return result;
  });
  const auto docs = stage("corpus", [&] {
    auto d = corpus::group_by_user(parsed.comments, config.min_messages);
    if (d.empty())
      throw Error(ErrorKind::input, "no user has at least " +
                                        std::to_string(config.min_messages) + " message(s)");
    return d;
  });
  return stage("features", [&] {
    const auto symbols = features::SymbolSet::from_utf8(config.symbols);
    const auto vectors =
        features::extract_all(docs, symbols, {config.homoglyphs}, config.threads);
    if (warn) {
      for (const auto& v : vectors)
        if (v.all_empty()) warn("user '" + v.user_id + "' has only empty messages");
    }
    return features::build_matrix(vectors, symbols);
  });
}

/// Fits normalization on the raw matrix and trains the map.
inline model::ModelFile train_stage(const features::FeatureMatrix& raw,
                                    const PipelineConfig& config) {
  return stage("som", [&] {
    if (raw.columns() != features::SymbolSet::from_utf8(config.symbols).column_names())
      throw Error(ErrorKind::input, "feature columns do not match the symbol set");
    if (!raw.all_finite()) throw Error(ErrorKind::numeric, "feature matrix is not finite");
    model::ModelFile m;
    m.seed = config.seed;
    m.symbols = config.symbols;
    m.features = raw.columns();
    m.clustering = config.clustering;
    m.normalization = features::fit_normalization(raw);
    som::SomConfig sc = config.som;
    sc.seed = som_seed(config.seed);
    m.som = som::train(sc, features::apply_normalization(raw, m.normalization));
    return m;
  });
}

inline clustering::AutoClusterResult cluster_codebook(const model::ModelFile& m,
                                                      std::size_t threads,
                                                      const WarningSink& warn = {}) {
  return stage("clustering", [&] {
    auto result = clustering::auto_cluster_count(m.som.grid, m.clustering.k_min,
                                                 m.clustering.k_max, cluster_seed(m.seed),
                                                 threads);
    if (result.degenerate && warn)
      warn("all codebook vectors are identical; using k = " + std::to_string(result.k));
    return result;
  });
}

/// Checks that a feature matrix was produced with the model's column layout.
inline void check_columns(const features::FeatureMatrix& raw, const model::ModelFile& m) {
  if (raw.columns() != m.features)
    throw Error(ErrorKind::input, "feature columns do not match the model");
}

inline clustering::SignificanceReport significance_stage(
    const features::FeatureMatrix& normalized, const clustering::Assignments& assignments,
    const WarningSink& warn = {}) {
  std::set<std::size_t> populated;
  for (const auto& [user, c] : assignments) populated.insert(c);
  if (populated.size() < 2) {
    if (warn) warn("users fall into a single cluster; significance is reported as zero");
    return {normalized.columns(), std::vector<double>(normalized.cols(), 0.0),
            std::vector<double>(normalized.cols(), 0.0)};
  }
  return clustering::field_significance(normalized, assignments);
}

/// Clusters the codebook, assigns users, flags troll clusters and assembles
/// the report.
inline detect::TrollReport detect_stage(const model::ModelFile& m,
                                        const features::FeatureMatrix& raw,
                                        const detect::DetectionParams& params,
                                        std::size_t threads = 1,
                                        const WarningSink& warn = {}) {
  check_columns(raw, m);
  const auto clusters = cluster_codebook(m, threads, warn);
  return stage("detect", [&] {
    const auto normalized = features::apply_normalization(raw, m.normalization);
    const auto assignments = clustering::assign_users(m.som.grid, clusters.model, normalized);
    const auto significance = significance_stage(normalized, assignments, warn);
    const auto trolls = detect::identify_troll_clusters(clusters.model, raw, m.normalization,
                                                        assignments, params);
    detect::ReportMetadata meta{m.seed, m.som.config, m.clustering, params,
                                clusters.silhouettes};
    return detect::build_report(
        {raw, m.normalization, clusters.model, assignments, trolls, significance, meta});
  });
}

/// Writes one heatmap per feature (plane_<feature>.pgm) and a cluster map
/// (clusters.ppm). Returns the written paths in a fixed order.
inline std::vector<fs::path> export_component_planes(const model::ModelFile& m,
                                                     const fs::path& output_dir,
                                                     std::size_t threads = 1,
                                                     const WarningSink& warn = {}) {
  const auto clusters = cluster_codebook(m, threads, warn);
  return stage("export-planes", [&] {
    ensure_directory(output_dir);
    const auto& grid = m.som.grid;
    std::vector<fs::path> written;
    std::vector<double> plane(grid.node_count());
    for (std::size_t d = 0; d < grid.dim(); ++d) {
      for (std::size_t n = 0; n < grid.node_count(); ++n) plane[n] = grid.node(n)[d];
      const auto path = output_dir / ("plane_" + m.features[d] + ".pgm");
      write_file(path, netpbm::heatmap_pgm(plane, grid.width(), grid.height()));
      written.push_back(path);
    }
    const auto path = output_dir / "clusters.ppm";
    write_file(path, netpbm::categorical_ppm(clusters.model.node_to_cluster, grid.width(),
                                             grid.height()));
    written.push_back(path);
    return written;
  });
}

// --- full run --------------------------------------------------------------

inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kModelFile = "model.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kPlanesDir = "planes";

/// Runs every stage and writes features.csv, model.json, report.json and
/// planes/ under config.output_dir. Output bytes depend only on the config
/// (minus the thread count) and the input bytes.
inline detect::TrollReport run_pipeline(const PipelineConfig& config,
                                        const WarningSink& warn = {}) {
  const std::string input = stage("corpus", [&] { return read_file(config.input); });
  const auto raw = extract_stage(input, config, warn);
  const auto m = train_stage(raw, config);
  auto report = detect_stage(m, raw, config.detection, config.threads, warn);

  stage("output", [&] {
    ensure_directory(config.output_dir);
    write_file(config.output_dir / kFeaturesFile, features::to_csv(raw));
    write_file(config.output_dir / kModelFile, model::serialize(m));
    write_file(config.output_dir / kReportFile, detect::serialize(report));
  });
  export_component_planes(m, config.output_dir / kPlanesDir, config.threads, warn);
  return report;
}

}  // namespace trolldetect::pipeline
