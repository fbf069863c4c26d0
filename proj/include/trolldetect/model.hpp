#pragma once

// Model file: everything `train` produces and later stages consume.
//
//   {
//     "format": "trolldetect-model", "version": 1,
//     "seed": <master seed>,
//     "symbols": "<tracked symbols, UTF-8>",
//     "features": [column names],
//     "config": {SomConfig fields},
//     "clustering": {"k_min": .., "k_max": ..},
//     "normalization": {"min": [..], "max": [..]},
//     "grid": {"width": .., "height": .., "dim": .., "weights": [row-major]},
//     "initial_qe": .., "qe_history": [..]
//   }

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trolldetect/error.hpp"
#include "trolldetect/features.hpp"
#include "trolldetect/som.hpp"

namespace trolldetect::model {

using Json = nlohmann::ordered_json;

inline constexpr const char* kFormatTag = "trolldetect-model";
inline constexpr int kFormatVersion = 1;

struct ClusteringSettings {
  std::size_t k_min = 2;
  std::size_t k_max = 15;

  friend bool operator==(const ClusteringSettings&, const ClusteringSettings&) = default;
};

struct ModelFile {
  std::uint64_t seed = 0;
  std::string symbols;
  std::vector<std::string> features;
  ClusteringSettings clustering;
  features::NormalizationParams normalization;
  som::TrainedSom som;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

inline Json config_to_json(const som::SomConfig& c) {
  Json j;
  j["grid_width"] = c.grid_width;
  j["grid_height"] = c.grid_height;
  j["lr_start"] = c.lr_start;
  j["lr_end"] = c.lr_end;
  j["radius_start"] = c.radius_start;
  j["radius_end"] = c.radius_end;
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["init"] = som::to_string(c.init);
  j["early_stopping"] = c.early_stopping;
  return j;
}

inline som::SomConfig config_from_json(const Json& j) {
  som::SomConfig c;
  c.grid_width = j.at("grid_width").get<std::size_t>();
  c.grid_height = j.at("grid_height").get<std::size_t>();
  c.lr_start = j.at("lr_start").get<double>();
  c.lr_end = j.at("lr_end").get<double>();
  c.radius_start = j.at("radius_start").get<double>();
  c.radius_end = j.at("radius_end").get<double>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init = som::init_method_from_string(j.at("init").get<std::string>());
  c.early_stopping = j.at("early_stopping").get<bool>();
  return c;
}

inline Json to_json(const ModelFile& m) {
  const auto& grid = m.som.grid;
  Json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["seed"] = m.seed;
  j["symbols"] = m.symbols;
  j["features"] = m.features;
  j["config"] = config_to_json(m.som.config);
  j["clustering"] = {{"k_min", m.clustering.k_min}, {"k_max", m.clustering.k_max}};
  j["normalization"] = {{"min", m.normalization.min}, {"max", m.normalization.max}};
  j["grid"] = {{"width", grid.width()},
               {"height", grid.height()},
               {"dim", grid.dim()},
               {"weights", std::vector<double>(grid.weights().begin(), grid.weights().end())}};
  j["initial_qe"] = m.som.initial_qe;
  j["qe_history"] = m.som.qe_history;
  return j;
}

inline ModelFile from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormatTag)
      throw Error(ErrorKind::input, "not a trolldetect model file");
    if (j.at("version").get<int>() != kFormatVersion)
      throw Error(ErrorKind::input, "unsupported model file version");

    ModelFile m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.symbols = j.at("symbols").get<std::string>();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.clustering.k_min = j.at("clustering").at("k_min").get<std::size_t>();
    m.clustering.k_max = j.at("clustering").at("k_max").get<std::size_t>();
    m.normalization.min = j.at("normalization").at("min").get<std::vector<double>>();
    m.normalization.max = j.at("normalization").at("max").get<std::vector<double>>();
    m.som.config = config_from_json(j.at("config"));
    const auto& g = j.at("grid");
    m.som.grid = som::SomGrid(g.at("width").get<std::size_t>(), g.at("height").get<std::size_t>(),
                              g.at("dim").get<std::size_t>(),
                              g.at("weights").get<std::vector<double>>());
    m.som.initial_qe = j.at("initial_qe").get<double>();
    m.som.qe_history = j.at("qe_history").get<std::vector<double>>();

    if (m.features.size() != m.som.grid.dim() || m.normalization.min.size() != m.som.grid.dim() ||
        m.normalization.max.size() != m.som.grid.dim())
      throw Error(ErrorKind::input, "model file dimensions are inconsistent");
    if (!m.som.grid.all_finite())
      throw Error(ErrorKind::input, "model file contains non-finite weights");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("corrupt model file: ") + e.what());
  }
}

inline std::string serialize(const ModelFile& m) { return to_json(m).dump(2) + "\n"; }

inline ModelFile parse(std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::input, "corrupt model file: malformed JSON");
  return from_json(j);
}

}  // namespace trolldetect::model
