#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lookplan/dates.hpp"
#include "lookplan/errors.hpp"
#include "lookplan/pipeline.hpp"

namespace {

using lookplan::pipeline::PipelineConfig;
using lookplan::pipeline::ScanFormat;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-utilization lookahead planner: point-cloud ingestion, feature "
               "assembly, sequence forecasting, and banded lookahead plans"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool fixed_clock = false;
  auto* config_opt = app.add_option("--config", config_path, "Flat key = value config file");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed for training and synthesis");
  app.add_flag("--fixed-clock", fixed_clock,
               "Zero out wall-clock fields so reruns are byte-identical");

  auto* synth = app.add_subcommand("synth", "Write a synthetic site: BIM, scans, observations");
  double noise = 0.0;
  auto* noise_opt = synth->add_option("--noise", noise, "Uniform +-noise on observed pct");

  auto* ingest = app.add_subcommand(
      "ingest-scan", "Register one scan, classify it, and append spatial metrics");
  std::string scan_path;
  std::string date_text;
  ScanFormat scan_format = ScanFormat::Auto;
  ingest->add_option("--scan", scan_path, "Point-cloud file")->required();
  ingest->add_option("--date", date_text, "Capture date (YYYY-MM-DD)")->required();
  std::map<std::string, ScanFormat> format_names{
      {"auto", ScanFormat::Auto}, {"xyz", ScanFormat::Xyz}, {"ply", ScanFormat::Ply}};
  ingest->add_option("--format", scan_format, "Scan format (default: by extension)")
      ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));

  auto* build = app.add_subcommand(
      "build-features", "Fuse observations with the metrics log into the feature table");

  auto* train = app.add_subcommand("train", "Fit the forecaster and write a checkpoint");
  int epochs = 0;
  int units = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  std::string optimizer;
  auto* epochs_opt = train->add_option("--epochs", epochs, "Override train.epochs");
  auto* units_opt = train->add_option("--units", units, "Override train.units");
  auto* batch_opt = train->add_option("--batch-size", batch_size, "Override train.batch_size");
  auto* lr_opt = train->add_option("--learning-rate", learning_rate,
                                   "Override train.learning_rate");
  auto* opt_opt = train->add_option("--optimizer", optimizer, "adam or sgd");

  auto* grid = app.add_subcommand("grid-search",
                                  "Train one candidate per (learning rate, units) pair");
  int grid_epochs = 0;
  int grid_batch = 0;
  auto* grid_epochs_opt = grid->add_option("--epochs", grid_epochs, "Override train.epochs");
  auto* grid_batch_opt = grid->add_option("--batch-size", grid_batch,
                                          "Override train.batch_size");

  auto* forecast = app.add_subcommand(
      "forecast", "Predict the next window per task and emit the banded plan");
  double mae = 0.0;
  auto* mae_opt = forecast->add_option("--mae", mae, "Band half-width override in pct");

  auto* report = app.add_subcommand("report", "Print a summary of the latest plan");

  for (auto* sub : {synth, ingest, build, train, grid, forecast, report}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config;
    if (*config_opt) config = lookplan::pipeline::load_config(config_path);
    if (*seed_opt) {
      config.train.seed = seed;
      config.scene_seed = seed;
      config.progress_seed = seed;
    }
    config.fixed_clock = fixed_clock;

    if (*noise_opt) config.synth_noise = noise;
    if (*epochs_opt) config.train.epochs = epochs;
    if (*units_opt) config.train.units = units;
    if (*batch_opt) config.train.batch_size = batch_size;
    if (*lr_opt) config.train.learning_rate = learning_rate;
    if (*opt_opt) config.train.optimizer = optimizer;
    if (*grid_epochs_opt) config.train.epochs = grid_epochs;
    if (*grid_batch_opt) config.train.batch_size = grid_batch;
    if (*mae_opt) config.band_mae = mae;

    if (synth->parsed()) {
      lookplan::pipeline::cmd_synth(config);
    } else if (ingest->parsed()) {
      lookplan::pipeline::cmd_ingest_scan(config, scan_path, lookplan::Date::parse(date_text),
                                          scan_format);
    } else if (build->parsed()) {
      lookplan::pipeline::cmd_build_features(config);
    } else if (train->parsed()) {
      lookplan::pipeline::cmd_train(config);
    } else if (grid->parsed()) {
      lookplan::pipeline::cmd_grid_search(config);
    } else if (forecast->parsed()) {
      lookplan::pipeline::cmd_forecast(config);
    } else if (report->parsed()) {
      lookplan::pipeline::cmd_report(config);
    }
    return 0;
  } catch (const lookplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lookplan::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
