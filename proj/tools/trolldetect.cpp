// trolldetect: command-line front end for the troll-detection pipeline.
//
//   trolldetect run --input comments.jsonl --output out/
//   trolldetect extract --input comments.jsonl --output features.csv
//   trolldetect train --features features.csv --output model.json
//   trolldetect detect --model model.json --features features.csv --output report.json
//   trolldetect significance --model model.json --features features.csv
//   trolldetect export-planes --model model.json --output planes/
//
// Exit codes: 0 success, 2 input or usage error, 3 numeric error, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trolldetect/trolldetect.hpp"

namespace td = trolldetect;

namespace {

// Flags left unset do not override the config file or the defaults.
struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<std::string> features_file;
  std::optional<std::string> model_file;
  std::optional<std::string> format;
  std::optional<std::string> symbols;
  std::optional<std::string> grid;
  std::optional<std::string> init;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> min_messages;
  std::optional<std::size_t> k_min;
  std::optional<std::size_t> k_max;
  std::optional<std::size_t> threads;
  std::optional<double> lr_start;
  std::optional<double> lr_end;
  std::optional<double> radius_start;
  std::optional<double> radius_end;
  std::optional<double> z_threshold;
  std::optional<double> max_cluster_fraction;
  bool lenient = false;
  bool homoglyphs = false;
  bool early_stopping = false;
};

void add_config(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "Flat JSON config; flags override its keys");
}

void add_threads(CLI::App* app, Flags& f) {
  app->add_option("--threads", f.threads, "Worker threads (0 = all cores); output is unaffected");
}

void add_corpus(CLI::App* app, Flags& f) {
  app->add_option("--input", f.input, "Comment file");
  app->add_option("--format", f.format, "Input format: jsonl or csv");
  app->add_flag("--lenient", f.lenient, "Skip malformed records instead of failing");
  app->add_option("--min-messages", f.min_messages, "Drop users with fewer messages");
  app->add_option("--symbols", f.symbols, "Tracked symbols as one UTF-8 string");
  app->add_flag("--homoglyphs", f.homoglyphs, "Fold Latin look-alikes onto Cyrillic letters");
}

void add_training(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--grid", f.grid, "Map size as WxH");
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--lr-start", f.lr_start, "Initial learning rate");
  app->add_option("--lr-end", f.lr_end, "Final learning rate");
  app->add_option("--radius-start", f.radius_start, "Initial neighborhood radius");
  app->add_option("--radius-end", f.radius_end, "Final neighborhood radius");
  app->add_option("--init", f.init, "Initialization: random_uniform_in_data_box or pca_plane");
  app->add_flag("--early-stopping", f.early_stopping, "Stop once the quantization error stalls");
  app->add_option("--k-min", f.k_min, "Smallest cluster count tried");
  app->add_option("--k-max", f.k_max, "Largest cluster count tried");
}

void add_detection(CLI::App* app, Flags& f) {
  app->add_option("--z-threshold", f.z_threshold, "Troll cluster message-count z threshold");
  app->add_option("--max-cluster-fraction", f.max_cluster_fraction,
                  "Largest share of users a troll cluster may hold");
}

void parse_grid(const std::string& s, td::som::SomConfig& c) {
  const auto x = s.find_first_of("xX");
  std::size_t w = 0, h = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    w = std::stoul(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    h = std::stoul(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument(s);
  } catch (const std::logic_error&) {
    throw td::Error(td::ErrorKind::input, "--grid expects WxH, got '" + s + "'");
  }
  c.grid_width = w;
  c.grid_height = h;
}

// Defaults, then the config file, then explicit flags.
td::pipeline::PipelineConfig resolve(const Flags& f) {
  td::pipeline::PipelineConfig cfg;
  if (f.config_file) td::config::apply_text(cfg, td::pipeline::read_file(*f.config_file));
  if (f.input) cfg.input = *f.input;
  if (f.output) cfg.output_dir = *f.output;
  if (f.format) cfg.format = td::config::format_from_string(*f.format);
  if (f.symbols) cfg.symbols = *f.symbols;
  if (f.lenient) cfg.lenient = true;
  if (f.homoglyphs) cfg.homoglyphs = true;
  if (f.min_messages) cfg.min_messages = *f.min_messages;
  if (f.seed) cfg.seed = *f.seed;
  if (f.grid) parse_grid(*f.grid, cfg.som);
  if (f.epochs) cfg.som.max_epochs = *f.epochs;
  if (f.lr_start) cfg.som.lr_start = *f.lr_start;
  if (f.lr_end) cfg.som.lr_end = *f.lr_end;
  if (f.radius_start) cfg.som.radius_start = *f.radius_start;
  if (f.radius_end) cfg.som.radius_end = *f.radius_end;
  if (f.init) cfg.som.init = td::som::init_method_from_string(*f.init);
  if (f.early_stopping) cfg.som.early_stopping = true;
  if (f.k_min) cfg.clustering.k_min = *f.k_min;
  if (f.k_max) cfg.clustering.k_max = *f.k_max;
  if (f.z_threshold) cfg.detection.z_threshold = *f.z_threshold;
  if (f.max_cluster_fraction) cfg.detection.max_cluster_fraction = *f.max_cluster_fraction;
  if (f.threads) cfg.threads = *f.threads;
  td::config::validate(cfg);
  return cfg;
}

const std::filesystem::path& require(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw td::Error(td::ErrorKind::input, std::string(what) + " is required");
  return p;
}

std::string require(const std::optional<std::string>& s, const char* what) {
  if (!s) throw td::Error(td::ErrorKind::input, std::string(what) + " is required");
  return *s;
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

td::model::ModelFile load_model(const Flags& f) {
  const auto path = require(f.model_file, "--model");
  return td::pipeline::stage("model", [&] {
    return td::model::parse(td::pipeline::read_file(path));
  });
}

td::features::FeatureMatrix load_features(const Flags& f) {
  const auto path = require(f.features_file, "--features");
  return td::pipeline::stage("features", [&] {
    return td::features::from_csv(td::pipeline::read_file(path));
  });
}

void print_report_summary(const td::detect::TrollReport& report) {
  std::cout << "clusters: " << report.k << "\n";
  const auto trolls = report.trolls();
  std::cout << "trolls: " << trolls.size() << "\n";
  for (const auto& t : trolls) std::cout << "  " << t << "\n";
}

int run(const Flags& f) {
  auto cfg = resolve(f);
  require(cfg.input, "--input");
  require(cfg.output_dir, "--output");
  const auto report = td::pipeline::run_pipeline(cfg, warn);
  print_report_summary(report);
  return 0;
}

int extract(const Flags& f) {
  const auto cfg = resolve(f);
  require(cfg.input, "--input");
  const auto out = require(cfg.output_dir, "--output");
  const auto input = td::pipeline::stage("corpus", [&] { return td::pipeline::read_file(cfg.input); });
  const auto raw = td::pipeline::extract_stage(input, cfg, warn);
  td::pipeline::stage("output", [&] { td::pipeline::write_file(out, td::features::to_csv(raw)); });
  std::cout << "users: " << raw.rows() << "\n";
  return 0;
}

int train(const Flags& f) {
  const auto cfg = resolve(f);
  const auto out = require(cfg.output_dir, "--output");
  const auto raw = load_features(f);
  const auto m = td::pipeline::train_stage(raw, cfg);
  td::pipeline::stage("output", [&] { td::pipeline::write_file(out, td::model::serialize(m)); });
  std::cout << "quantization error: " << m.som.initial_qe << " -> "
            << (m.som.qe_history.empty() ? m.som.initial_qe : m.som.qe_history.back()) << "\n";
  return 0;
}

int detect(const Flags& f) {
  const auto cfg = resolve(f);
  const auto out = require(cfg.output_dir, "--output");
  const auto m = load_model(f);
  const auto raw = load_features(f);
  const auto report = td::pipeline::detect_stage(m, raw, cfg.detection, cfg.threads, warn);
  td::pipeline::stage("output",
                      [&] { td::pipeline::write_file(out, td::detect::serialize(report)); });
  print_report_summary(report);
  return 0;
}

int significance(const Flags& f) {
  const auto cfg = resolve(f);
  const auto m = load_model(f);
  const auto raw = load_features(f);
  const auto report = td::pipeline::detect_stage(m, raw, cfg.detection, cfg.threads, warn);
  const auto& sig = report.significance;
  std::size_t width = 7;
  for (const auto& name : sig.features) width = std::max(width, name.size());
  std::printf("%-*s  %6s\n", static_cast<int>(width), "feature", "score");
  for (std::size_t i = 0; i < sig.features.size(); ++i)
    std::printf("%-*s  %6.1f\n", static_cast<int>(width), sig.features[i].c_str(),
                td::detect::round_1dp(sig.scores[i]));
  return 0;
}

int export_planes(const Flags& f) {
  const auto cfg = resolve(f);
  const auto out = require(cfg.output_dir, "--output");
  const auto m = load_model(f);
  for (const auto& p : td::pipeline::export_component_planes(m, out, cfg.threads, warn))
    std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Troll detection in discussion threads with a self-organizing map"};
  app.require_subcommand(1);
  Flags f;

  auto* run_cmd = app.add_subcommand("run", "Full pipeline: features, model, report and planes");
  add_config(run_cmd, f);
  add_corpus(run_cmd, f);
  add_training(run_cmd, f);
  add_detection(run_cmd, f);
  add_threads(run_cmd, f);
  run_cmd->add_option("--output", f.output, "Output directory");

  auto* extract_cmd = app.add_subcommand("extract", "Comments to a per-user feature CSV");
  add_config(extract_cmd, f);
  add_corpus(extract_cmd, f);
  add_threads(extract_cmd, f);
  extract_cmd->add_option("--output", f.output, "Feature CSV to write");

  auto* train_cmd = app.add_subcommand("train", "Train the map on a feature CSV");
  add_config(train_cmd, f);
  add_training(train_cmd, f);
  train_cmd->add_option("--symbols", f.symbols, "Symbols the feature CSV was built with");
  train_cmd->add_option("--features", f.features_file, "Feature CSV");
  train_cmd->add_option("--output", f.output, "Model JSON to write");

  auto* detect_cmd = app.add_subcommand("detect", "Cluster the map and write the troll report");
  add_config(detect_cmd, f);
  add_detection(detect_cmd, f);
  add_threads(detect_cmd, f);
  detect_cmd->add_option("--model", f.model_file, "Model JSON");
  detect_cmd->add_option("--features", f.features_file, "Feature CSV");
  detect_cmd->add_option("--output", f.output, "Report JSON to write");

  auto* sig_cmd = app.add_subcommand("significance", "Print the feature significance table");
  add_config(sig_cmd, f);
  add_threads(sig_cmd, f);
  sig_cmd->add_option("--model", f.model_file, "Model JSON");
  sig_cmd->add_option("--features", f.features_file, "Feature CSV");

  auto* planes_cmd = app.add_subcommand("export-planes", "Write component planes and a cluster map");
  add_config(planes_cmd, f);
  add_threads(planes_cmd, f);
  planes_cmd->add_option("--model", f.model_file, "Model JSON");
  planes_cmd->add_option("--output", f.output, "Directory for the images");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return td::exit_code(td::ErrorKind::input);
  }

  try {
    if (*run_cmd) return run(f);
    if (*extract_cmd) return extract(f);
    if (*train_cmd) return train(f);
    if (*detect_cmd) return detect(f);
    if (*sig_cmd) return significance(f);
    if (*planes_cmd) return export_planes(f);
  } catch (const td::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return td::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
