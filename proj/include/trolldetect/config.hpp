#pragma once

// Flat JSON run configuration. Keys mirror the PipelineConfig and SomConfig
// field names:
//
//   {"input": "comments.jsonl", "format": "jsonl", "lenient": false,
//    "min_messages": 1, "symbols": "аеиоуэюя!?", "homoglyphs": false,
//    "grid_width": 10, "grid_height": 10, "lr_start": 0.3, "lr_end": 0.005,
//    "radius_start": 4, "radius_end": 0.1, "max_epochs": 1000,
//    "init": "random_uniform_in_data_box", "early_stopping": false,
//    "k_min": 2, "k_max": 15, "z_threshold": 2.0, "max_cluster_fraction": 0.2,
//    "output": "out", "seed": 0, "threads": 1}
//
// Every key is optional; unknown keys are rejected.

#include <cmath>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trolldetect/corpus.hpp"
#include "trolldetect/error.hpp"
#include "trolldetect/pipeline.hpp"

namespace trolldetect::config {

using Json = nlohmann::json;

inline corpus::Format format_from_string(const std::string& s) {
  if (s == "jsonl") return corpus::Format::jsonl;
  if (s == "csv") return corpus::Format::csv;
  throw Error(ErrorKind::input, "unknown input format '" + s + "' (expected jsonl or csv)");
}

inline const char* to_string(corpus::Format f) {
  return f == corpus::Format::csv ? "csv" : "jsonl";
}

/// Overwrites the fields of `cfg` named in `j`.
inline void apply(pipeline::PipelineConfig& cfg, const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::input, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "input") cfg.input = value.get<std::string>();
      else if (key == "format") cfg.format = format_from_string(value.get<std::string>());
      else if (key == "lenient") cfg.lenient = value.get<bool>();
      else if (key == "min_messages") cfg.min_messages = value.get<std::size_t>();
      else if (key == "symbols") cfg.symbols = value.get<std::string>();
      else if (key == "homoglyphs") cfg.homoglyphs = value.get<bool>();
      else if (key == "grid_width") cfg.som.grid_width = value.get<std::size_t>();
      else if (key == "grid_height") cfg.som.grid_height = value.get<std::size_t>();
      else if (key == "lr_start") cfg.som.lr_start = value.get<double>();
      else if (key == "lr_end") cfg.som.lr_end = value.get<double>();
      else if (key == "radius_start") cfg.som.radius_start = value.get<double>();
      else if (key == "radius_end") cfg.som.radius_end = value.get<double>();
      else if (key == "max_epochs") cfg.som.max_epochs = value.get<std::size_t>();
      else if (key == "init") cfg.som.init = som::init_method_from_string(value.get<std::string>());
      else if (key == "early_stopping") cfg.som.early_stopping = value.get<bool>();
      else if (key == "k_min") cfg.clustering.k_min = value.get<std::size_t>();
      else if (key == "k_max") cfg.clustering.k_max = value.get<std::size_t>();
      else if (key == "z_threshold") cfg.detection.z_threshold = value.get<double>();
      else if (key == "max_cluster_fraction") cfg.detection.max_cluster_fraction = value.get<double>();
      else if (key == "output") cfg.output_dir = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "threads") cfg.threads = value.get<std::size_t>();
      else throw Error(ErrorKind::input, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::input, "config key '" + key + "' has the wrong type");
    }
  }
}

inline void apply_text(pipeline::PipelineConfig& cfg, std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::input, "config is not valid JSON");
  config::apply(cfg, j);
}

/// Range checks that do not need the data.
inline void validate(const pipeline::PipelineConfig& cfg) {
  cfg.som.validate();
  if (cfg.min_messages < 1) throw Error(ErrorKind::input, "min_messages must be at least 1");
  if (cfg.clustering.k_min < 2) throw Error(ErrorKind::input, "k_min must be at least 2");
  if (cfg.clustering.k_max < cfg.clustering.k_min)
    throw Error(ErrorKind::input, "k_max must not be smaller than k_min");
  if (!(cfg.detection.max_cluster_fraction > 0.0 && cfg.detection.max_cluster_fraction <= 1.0))
    throw Error(ErrorKind::input, "max_cluster_fraction must lie in (0, 1]");
  if (!std::isfinite(cfg.detection.z_threshold))
    throw Error(ErrorKind::input, "z_threshold must be finite");
}

}  // namespace trolldetect::config
