#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lookplan/geometry.hpp"
#include "lookplan/gru.hpp"

namespace lookplan::pipeline {

// Everything a run needs, collected from one flat key = value config file so
// a run is reproducible from a single artifact. Relative paths resolve
// against the config file's directory.
struct PipelineConfig {
  std::filesystem::path bim = "bim.json";
  std::filesystem::path observations = "observations.csv";
  std::filesystem::path scans_dir = "scans";
  std::filesystem::path metrics_log = "metrics.csv";
  std::filesystem::path checkpoint = "checkpoint.json";
  std::filesystem::path output_dir = "out";
  std::filesystem::path feature_table;  // defaults to output_dir/features.csv

  double allowance = 0.02;
  std::string floor_element = "floor_slab";
  std::optional<geometry::RigidTransform> transform;
  std::filesystem::path correspondences;

  int test_count = 18;
  int window = 18;

  gru::TrainConfig train;

  std::optional<double> band_mae;  // pct override for the forecast band

  double synth_noise = 0.0;
  std::uint64_t scene_seed = 0;
  std::uint64_t progress_seed = 0;

  bool fixed_clock = false;

  std::filesystem::path feature_table_path() const {
    return feature_table.empty() ? output_dir / "features.csv" : feature_table;
  }
  std::filesystem::path train_report_path() const {
    return output_dir / "train_report.json";
  }
};

PipelineConfig load_config(const std::filesystem::path& path);

enum class ScanFormat { Auto, Xyz, Ply };

// Steps 1-6 over one scan: register, classify against the BIM enclosures,
// reduce to spatial metrics, append to the log. Idempotent per
// (date, file hash); a changed file on a logged date is an error.
void cmd_ingest_scan(const PipelineConfig& config, const std::filesystem::path& scan,
                     Date date, ScanFormat format);

void cmd_build_features(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_grid_search(const PipelineConfig& config);
void cmd_forecast(const PipelineConfig& config);
void cmd_synth(const PipelineConfig& config);
void cmd_report(const PipelineConfig& config);

}  // namespace lookplan::pipeline
