#include "lookplan/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lookplan/bim.hpp"
#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"
#include "lookplan/features.hpp"
#include "lookplan/lookahead.hpp"
#include "lookplan/rng.hpp"
#include "lookplan/synth.hpp"

namespace lookplan::pipeline {

namespace fs = std::filesystem;
using geometry::Point3;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double config_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value, "config key '" + key + "'");
  } catch (const Error&) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "': not a number: '" + value + "'");
  }
}

long config_long(const std::string& key, const std::string& value) {
  try {
    return parse_long(value, "config key '" + key + "'");
  } catch (const Error&) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "': not an integer: '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string current;
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

fs::path config_path(const fs::path& base, const std::string& key, const std::string& value) {
  if (value.empty()) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "': empty path");
  }
  fs::path p = value;
  return p.is_absolute() ? p : base / p;
}

geometry::RigidTransform parse_transform_literal(const std::string& key,
                                                 const std::string& value) {
  std::vector<std::string> parts = split_list(value);
  if (parts.size() != 12) {
    raise(ErrorCode::InvalidConfig,
          "config key '" + key + "': expected 12 numbers (rotation rows then translation), got " +
              std::to_string(parts.size()));
  }
  std::vector<double> v;
  v.reserve(12);
  for (const auto& part : parts) v.push_back(config_double(key, part));
  geometry::RigidTransform t;
  t.rotation << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  t.translation << v[9], v[10], v[11];
  t.validate();
  return t;
}

std::string format_thousands(long value) {
  std::string digits = std::to_string(value);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0 && std::isdigit(static_cast<unsigned char>(*it))) {
      out.push_back(',');
    }
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, value);
  return buf;
}

fs::path journal_path(const PipelineConfig& config) {
  fs::path p = config.metrics_log;
  p += ".journal";
  return p;
}

struct JournalEntry {
  std::string date;
  std::string hash;
};

std::vector<JournalEntry> read_journal(const fs::path& path) {
  std::vector<JournalEntry> entries;
  if (!fs::exists(path)) return entries;
  std::string text = read_text_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    std::size_t sep = line.find(' ');
    if (sep == std::string::npos) {
      raise(ErrorCode::ParseError, path.string() + ": malformed journal line '" + line + "'");
    }
    entries.push_back({line.substr(0, sep), trim(line.substr(sep + 1))});
  }
  return entries;
}

void ensure_parent_dir(const fs::path& file) {
  fs::path parent = file.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<geometry::Enclosure> build_enclosures(const bim::Bim4D& model, double allowance) {
  std::vector<geometry::Enclosure> enclosures;
  enclosures.reserve(model.elements.size());
  for (const auto& element : model.elements) {
    enclosures.push_back(geometry::build_enclosure(element.vertices, element.id, allowance));
  }
  return enclosures;
}

features::TaskSeries load_series(const PipelineConfig& config, const bim::Bim4D& model) {
  return features::read_feature_table(config.feature_table_path(), model);
}

// Band half-width in percentage units: an explicit override wins; otherwise
// the held-out test MAE from the train report, mapped back through the pct
// channel's scaling span.
double resolve_band_mae(const PipelineConfig& config, const features::ScalerParams& scaler) {
  if (config.band_mae) return *config.band_mae;
  fs::path report_path = config.train_report_path();
  if (!fs::exists(report_path)) {
    raise(ErrorCode::InvalidConfig,
          "no band.mae configured and no train report at " + report_path.string() +
              "; run train first or set band.mae");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(report_path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, report_path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("test_mae") || !doc["test_mae"].is_number()) {
    raise(ErrorCode::SchemaViolation,
          report_path.string() + ": missing numeric field 'test_mae'");
  }
  double span = scaler.max_v(features::kPctFeature) - scaler.min_v(features::kPctFeature);
  return doc["test_mae"].get<double>() * span;
}

}  // namespace

PipelineConfig load_config(const fs::path& path) {
  PipelineConfig cfg;
  std::string text = read_text_file(path);
  fs::path base = path.parent_path();

  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    if (start == text.size()) break;
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::InvalidConfig, path.string() + ":" + std::to_string(line_no) +
                                          ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));

    if (key == "paths.bim") {
      cfg.bim = config_path(base, key, value);
    } else if (key == "paths.observations") {
      cfg.observations = config_path(base, key, value);
    } else if (key == "paths.scans_dir") {
      cfg.scans_dir = config_path(base, key, value);
    } else if (key == "paths.metrics_log") {
      cfg.metrics_log = config_path(base, key, value);
    } else if (key == "paths.checkpoint") {
      cfg.checkpoint = config_path(base, key, value);
    } else if (key == "paths.output_dir") {
      cfg.output_dir = config_path(base, key, value);
    } else if (key == "paths.feature_table") {
      cfg.feature_table = config_path(base, key, value);
    } else if (key == "geometry.allowance") {
      cfg.allowance = config_double(key, value);
      require(cfg.allowance >= 0.0, ErrorCode::InvalidConfig,
              "config key 'geometry.allowance': must be >= 0");
    } else if (key == "geometry.floor_element") {
      require(!value.empty(), ErrorCode::InvalidConfig,
              "config key 'geometry.floor_element': empty value");
      cfg.floor_element = value;
    } else if (key == "geometry.transform") {
      cfg.transform = parse_transform_literal(key, value);
    } else if (key == "geometry.correspondences") {
      cfg.correspondences = config_path(base, key, value);
    } else if (key == "features.test_count") {
      long n = config_long(key, value);
      require(n >= 1, ErrorCode::InvalidConfig, "config key 'features.test_count': must be >= 1");
      cfg.test_count = static_cast<int>(n);
    } else if (key == "features.window") {
      long n = config_long(key, value);
      require(n >= 1, ErrorCode::InvalidConfig, "config key 'features.window': must be >= 1");
      cfg.window = static_cast<int>(n);
    } else if (key == "train.learning_rate") {
      cfg.train.learning_rate = config_double(key, value);
    } else if (key == "train.epochs") {
      cfg.train.epochs = static_cast<int>(config_long(key, value));
    } else if (key == "train.batch_size") {
      cfg.train.batch_size = static_cast<int>(config_long(key, value));
    } else if (key == "train.seed") {
      cfg.train.seed = static_cast<std::uint64_t>(config_long(key, value));
    } else if (key == "train.units") {
      cfg.train.units = static_cast<int>(config_long(key, value));
    } else if (key == "train.optimizer") {
      cfg.train.optimizer = value;
    } else if (key == "train.beta1") {
      cfg.train.beta1 = config_double(key, value);
    } else if (key == "train.beta2") {
      cfg.train.beta2 = config_double(key, value);
    } else if (key == "train.epsilon") {
      cfg.train.epsilon = config_double(key, value);
    } else if (key == "train.grid_learning_rates") {
      cfg.train.grid_learning_rates.clear();
      for (const auto& part : split_list(value)) {
        cfg.train.grid_learning_rates.push_back(config_double(key, part));
      }
    } else if (key == "train.grid_units") {
      cfg.train.grid_units.clear();
      for (const auto& part : split_list(value)) {
        cfg.train.grid_units.push_back(static_cast<int>(config_long(key, part)));
      }
    } else if (key == "band.mae") {
      double mae = config_double(key, value);
      require(mae >= 0.0, ErrorCode::InvalidConfig, "config key 'band.mae': must be >= 0");
      cfg.band_mae = mae;
    } else if (key == "synth.noise") {
      cfg.synth_noise = config_double(key, value);
      require(cfg.synth_noise >= 0.0, ErrorCode::InvalidConfig,
              "config key 'synth.noise': must be >= 0");
    } else if (key == "synth.scene_seed") {
      cfg.scene_seed = static_cast<std::uint64_t>(config_long(key, value));
    } else if (key == "synth.progress_seed") {
      cfg.progress_seed = static_cast<std::uint64_t>(config_long(key, value));
    } else {
      raise(ErrorCode::InvalidConfig,
            path.string() + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
  }
  return cfg;
}

void cmd_ingest_scan(const PipelineConfig& config, const fs::path& scan, Date date,
                     ScanFormat format) {
  std::string bytes = read_text_file(scan);
  std::string hash = hex64(fnv1a64(bytes));

  fs::path journal = journal_path(config);
  for (const auto& entry : read_journal(journal)) {
    if (entry.date != date.iso()) continue;
    if (entry.hash == hash) {
      std::cerr << "warning: scan for " << date.iso() << " already ingested (hash " << hash
                << "); skipping\n";
      return;
    }
    raise(ErrorCode::DuplicateDate, "a different scan for " + date.iso() +
                                        " is already in the metrics log (journal hash " +
                                        entry.hash + ", new hash " + hash + ")");
  }

  geometry::CloudFormat cloud_format;
  if (format == ScanFormat::Ply) {
    cloud_format = geometry::CloudFormat::PlyAscii;
  } else if (format == ScanFormat::Xyz) {
    cloud_format = geometry::CloudFormat::XyzAscii;
  } else {
    std::string ext = scan.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    cloud_format =
        ext == ".ply" ? geometry::CloudFormat::PlyAscii : geometry::CloudFormat::XyzAscii;
  }

  bim::Bim4D model = bim::load_bim(config.bim);
  std::vector<geometry::Enclosure> enclosures = build_enclosures(model, config.allowance);

  geometry::PointCloud cloud = geometry::load_point_cloud(scan, cloud_format);
  cloud.capture_date = date;

  geometry::RigidTransform transform;
  if (config.transform) {
    transform = *config.transform;
  } else if (!config.correspondences.empty()) {
    transform = geometry::load_transform_from_correspondences(config.correspondences);
  } else {
    raise(ErrorCode::MissingTransform,
          "no registration configured: set geometry.transform or geometry.correspondences");
  }
  geometry::PointCloud registered = geometry::apply_rigid_transform(cloud, transform);

  geometry::ClassificationResult classified = geometry::classify_points(registered, enclosures);
  geometry::SpatialMetrics metrics =
      geometry::compute_spatial_metrics(classified, registered, config.floor_element, date);

  geometry::append_metrics_row(config.metrics_log, metrics);
  ensure_parent_dir(journal);
  std::string line = date.iso() + " " + hash + "\n";
  if (fs::exists(journal)) {
    std::string existing = read_text_file(journal);
    if (!existing.empty() && existing.back() != '\n') existing.push_back('\n');
    write_text_file(journal, existing + line);
  } else {
    write_text_file(journal, line);
  }

  std::cout << "ingested " << scan.string() << " for " << date.iso() << ": "
            << registered.points.size() << " points, " << metrics.n_temp << " temporary, "
            << metrics.n_floor << " on " << config.floor_element
            << ", utilization_extent=" << format_double(metrics.utilization_extent) << "\n";
  std::cout << "metrics log: " << config.metrics_log.string() << "\n";
}

void cmd_build_features(const PipelineConfig& config) {
  bim::Bim4D model = bim::load_bim(config.bim);
  features::ObservationSet observations = features::read_observations(config.observations);
  std::vector<geometry::SpatialMetrics> metrics = geometry::read_metrics_log(config.metrics_log);

  features::TaskSeries series = features::build_feature_rows(observations, metrics, model);

  fs::path table = config.feature_table_path();
  ensure_parent_dir(table);
  features::write_feature_table(table, series);

  std::size_t rows = 0;
  long windows = 0;
  for (const auto& [task, task_rows] : series) {
    rows += task_rows.size();
    long span = static_cast<long>(task_rows.size()) - 2L * config.window + 1L;
    if (span > 0) windows += span;
  }
  std::cout << "feature table: " << rows << " rows across " << series.size() << " tasks -> "
            << windows << " windows of " << config.window << "+" << config.window << " days\n";
  std::cout << "written to " << table.string() << "\n";
}

void cmd_train(const PipelineConfig& config) {
  bim::Bim4D model = bim::load_bim(config.bim);
  features::TaskSeries series = load_series(config, model);
  features::Dataset dataset =
      features::prepare_dataset(series, config.window, config.test_count);

  gru::GruSeq2SeqParams params =
      gru::init_params(config.train.seed, config.train.units, features::kFeatureWidth);
  gru::ParamCount counts = gru::param_count(params);
  std::cout << "trainable parameters: " << format_thousands(counts.total) << " (encoder "
            << format_thousands(counts.encoder) << ", decoder " << format_thousands(counts.decoder)
            << ", head " << format_thousands(counts.dense) << ")\n";
  std::cout << "windows: " << dataset.split.train.size() << " train, "
            << dataset.split.validation.size() << " validation, " << dataset.split.test.size()
            << " test\n";

  gru::TrainReport report = gru::train(params, dataset.split, config.train);
  if (config.fixed_clock) report.wall_seconds = 0.0;

  int stride = std::max(1, config.train.epochs / 10);
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    if ((i + 1) % static_cast<std::size_t>(stride) != 0 && i + 1 != report.epochs.size()) continue;
    const auto& m = report.epochs[i];
    std::cout << "epoch " << (i + 1) << "/" << report.epochs.size()
              << " train_mse=" << format_double(m.train_mse)
              << " val_mse=" << format_double(m.val_mse)
              << " val_mae=" << format_double(m.val_mae) << "\n";
  }
  std::cout << "test_mse=" << format_double(report.test_mse)
            << " test_mae=" << format_double(report.test_mae) << " (scaled units)\n";

  ensure_parent_dir(config.checkpoint);
  gru::save_checkpoint(config.checkpoint, params, dataset.scaler, config.window);
  fs::path report_path = config.train_report_path();
  ensure_parent_dir(report_path);
  write_text_file(report_path, gru::report_to_json(report));

  std::cout << "checkpoint: " << config.checkpoint.string() << "\n";
  std::cout << "report: " << report_path.string() << "\n";
}

void cmd_grid_search(const PipelineConfig& config) {
  bim::Bim4D model = bim::load_bim(config.bim);
  features::TaskSeries series = load_series(config, model);
  features::Dataset dataset =
      features::prepare_dataset(series, config.window, config.test_count);

  gru::GridResult result =
      gru::grid_search(dataset.split, config.train, features::kFeatureWidth);
  if (config.fixed_clock) {
    for (auto& cell : result.cells) cell.report.wall_seconds = 0.0;
  }

  nlohmann::ordered_json doc;
  doc["best"] = {{"learning_rate", result.best_learning_rate},
                 {"units", result.best_units},
                 {"index", result.best_index}};
  doc["cells"] = nlohmann::ordered_json::array();
  for (const auto& cell : result.cells) {
    const auto& final_epoch = cell.report.epochs.back();
    nlohmann::ordered_json c;
    c["learning_rate"] = cell.learning_rate;
    c["units"] = cell.units;
    c["epochs"] = cell.report.epochs.size();
    c["train_mse"] = final_epoch.train_mse;
    c["val_mse"] = final_epoch.val_mse;
    c["val_mae"] = final_epoch.val_mae;
    c["test_mse"] = cell.report.test_mse;
    c["test_mae"] = cell.report.test_mae;
    c["wall_seconds"] = cell.report.wall_seconds;
    doc["cells"].push_back(c);
  }

  fs::path report_path = config.output_dir / "grid_report.json";
  ensure_parent_dir(report_path);
  write_text_file(report_path, doc.dump(2) + "\n");

  for (const auto& cell : result.cells) {
    std::cout << "cell lr=" << format_double(cell.learning_rate) << " units=" << cell.units
              << ": val_mse=" << format_double(cell.report.epochs.back().val_mse)
              << " val_mae=" << format_double(cell.report.epochs.back().val_mae) << "\n";
  }
  std::cout << "best: learning_rate=" << format_double(result.best_learning_rate)
            << " units=" << result.best_units << "\n";
  std::cout << "report: " << report_path.string() << "\n";
}

void cmd_forecast(const PipelineConfig& config) {
  gru::Checkpoint checkpoint = gru::load_checkpoint(config.checkpoint);
  if (checkpoint.window != config.window) {
    raise(ErrorCode::StaleCheckpoint,
          "checkpoint was built for window " + std::to_string(checkpoint.window) +
              " but the config requests " + std::to_string(config.window));
  }

  bim::Bim4D model = bim::load_bim(config.bim);
  features::TaskSeries series = load_series(config, model);
  require(!series.empty(), ErrorCode::InsufficientHistory,
          "feature table " + config.feature_table_path().string() + " holds no rows");

  std::map<std::string, Eigen::VectorXd> predictions;
  Date last_date = series.begin()->second.front().date;
  for (const auto& [task_id, rows] : series) {
    if (rows.size() < static_cast<std::size_t>(config.window)) {
      raise(ErrorCode::InsufficientHistory,
            "task '" + task_id + "' has " + std::to_string(rows.size()) +
                " rows; a trailing window needs " + std::to_string(config.window));
    }
    Eigen::MatrixXd latest(config.window, features::kFeatureWidth);
    std::size_t start = rows.size() - static_cast<std::size_t>(config.window);
    for (int i = 0; i < config.window; ++i) {
      latest.row(i) = rows[start + static_cast<std::size_t>(i)].features();
    }
    predictions[task_id] =
        gru::predict_horizon(checkpoint.params, checkpoint.scaler.apply(latest),
                             checkpoint.scaler);
    last_date = std::max(last_date, rows.back().date);
  }

  double mae = resolve_band_mae(config, checkpoint.scaler);
  lookahead::LookaheadPlan plan =
      lookahead::build_lookahead_plan(predictions, mae, model, last_date);

  fs::create_directories(config.output_dir);
  lookahead::emit_plan(plan, lookahead::PlanFormat::Csv, config.output_dir / "plan.csv");
  lookahead::emit_plan(plan, lookahead::PlanFormat::Json, config.output_dir / "plan.json");
  lookahead::emit_plan(plan, lookahead::PlanFormat::Markdown, config.output_dir / "plan.md");

  // History plus forecast in one long table for plotting.
  std::string series_csv = "task,date,kind,pct,lower,upper,planned\n";
  for (const auto& [task_id, rows] : series) {
    const bim::PlannedTask& task = model.task(task_id);
    for (const auto& row : rows) {
      series_csv += task_id + "," + row.date.iso() + ",actual," + format_double(row.pct) +
                    ",,," + format_double(bim::planned_fraction_at(task, row.date)) + "\n";
    }
    for (const auto& band : plan.bands) {
      if (band.task_id != task_id) continue;
      series_csv += task_id + "," + band.date.iso() + ",forecast," +
                    format_double(band.median) + "," + format_double(band.lower) + "," +
                    format_double(band.upper) + "," + format_double(band.planned) + "\n";
    }
  }
  write_text_file(config.output_dir / "series.csv", series_csv);

  std::cout << "lookahead plan: " << plan.horizon.size() << " working days "
            << plan.horizon.front().iso() << " .. " << plan.horizon.back().iso()
            << ", band half-width " << format_double(plan.mae) << " pct\n";
  for (const auto& [task_id, flag] : plan.flags) {
    const lookahead::ForecastBand* final_band = nullptr;
    for (const auto& band : plan.bands) {
      if (band.task_id == task_id && band.date == plan.horizon.back()) final_band = &band;
    }
    std::cout << "  " << task_id << ": " << lookahead::flag_name(flag);
    if (final_band != nullptr) {
      std::cout << " (median " << format_double(final_band->median) << ", planned "
                << format_double(final_band->planned) << " on " << final_band->date.iso() << ")";
    }
    std::cout << "\n";
  }
  std::cout << "outputs: " << (config.output_dir / "plan.csv").string() << " .json .md, "
            << (config.output_dir / "series.csv").string() << "\n";
}

void cmd_synth(const PipelineConfig& config) {
  synth::SynthSceneSpec scene_spec = synth::default_scene_spec();
  scene_spec.allowance = config.allowance;
  scene_spec.seed = config.scene_seed;

  synth::SynthProgressSpec progress_spec = synth::default_progress_spec();
  progress_spec.noise = config.synth_noise;
  progress_spec.seed = config.progress_seed;

  bim::Bim4D model = synth::default_bim(scene_spec);
  ensure_parent_dir(config.bim);
  bim::save_bim(model, config.bim);
  std::cout << "bim: " << config.bim.string() << " (" << model.elements.size() << " elements, "
            << model.tasks.size() << " tasks)\n";

  synth::SynthProgress progress = synth::gen_progress(progress_spec);
  ensure_parent_dir(config.observations);
  features::write_observations(config.observations, progress.observations);
  std::cout << "observations: " << config.observations.string() << " ("
            << progress.observations.records.size() << " records)\n";

  std::vector<Date> dates = synth::default_scan_dates();
  fs::create_directories(config.scans_dir);
  for (std::size_t i = 0; i < dates.size(); ++i) {
    synth::SynthSceneSpec spec = scene_spec;
    spec.seed = Rng::derive(scene_spec.seed, i);
    // Material piles shrink as the work progresses.
    double factor = 1.0 - 0.08 * static_cast<double>(i);
    for (auto& obstacle : spec.obstacles) {
      auto scaled = static_cast<long long>(
          std::llround(static_cast<double>(obstacle.point_count) * factor));
      obstacle.point_count = static_cast<std::size_t>(std::max(1LL, scaled));
    }
    synth::SynthScene scene = synth::gen_scene(spec, dates[i]);
    fs::path scan = config.scans_dir / ("scan_" + dates[i].iso() + ".xyz");
    geometry::save_point_cloud(scene.cloud, scan);
    std::cout << "scan: " << scan.string() << " (" << scene.cloud.points.size() << " points, "
              << scene.expected.n_temp << " temporary)\n";
  }

  if (!config.correspondences.empty()) {
    // Identity correspondences on the slab corners, enough for registration.
    std::string csv = "src_x,src_y,src_z,dst_x,dst_y,dst_z\n";
    const std::vector<Point3> corners = {
        {0.0, 0.0, 0.0},
        {scene_spec.room_length, 0.0, 0.0},
        {0.0, scene_spec.room_width, 0.0},
        {scene_spec.room_length, scene_spec.room_width, 1.0}};
    for (const auto& c : corners) {
      std::string row = format_double(c.x()) + "," + format_double(c.y()) + "," +
                        format_double(c.z());
      csv += row + "," + row + "\n";
    }
    ensure_parent_dir(config.correspondences);
    write_text_file(config.correspondences, csv);
    std::cout << "correspondences: " << config.correspondences.string() << "\n";
  }
}

void cmd_report(const PipelineConfig& config) {
  fs::path plan_path = config.output_dir / "plan.json";
  if (!fs::exists(plan_path)) {
    raise(ErrorCode::IoFailure,
          plan_path.string() + " not found; run forecast before report");
  }
  lookahead::LookaheadPlan plan = lookahead::read_plan_json(plan_path);

  std::cout << "Lookahead plan generated on " << plan.generated_on.iso() << "\n";
  std::cout << "horizon: " << plan.horizon.size() << " working days "
            << plan.horizon.front().iso() << " .. " << plan.horizon.back().iso() << "\n";
  std::cout << "band half-width: " << format_double(plan.mae) << " pct\n\n";

  std::cout << "final-date outlook:\n";
  for (const auto& [task_id, flag] : plan.flags) {
    for (const auto& band : plan.bands) {
      if (band.task_id != task_id || band.date != plan.horizon.back()) continue;
      char line[256];
      std::snprintf(line, sizeof line, "  %-24s %-8s planned %-7s median %-7s band [%s, %s]",
                    task_id.c_str(), lookahead::flag_name(flag),
                    format_double(band.planned).c_str(), format_double(band.median).c_str(),
                    format_double(band.lower).c_str(), format_double(band.upper).c_str());
      std::cout << line << "\n";
    }
  }

  fs::path report_path = config.train_report_path();
  if (fs::exists(report_path)) {
    nlohmann::json doc = nlohmann::json::parse(read_text_file(report_path), nullptr, false);
    if (doc.is_object() && doc.contains("test_mse") && doc.contains("test_mae")) {
      std::cout << "\nmodel test metrics (scaled units): mse="
                << format_double(doc["test_mse"].get<double>())
                << " mae=" << format_double(doc["test_mae"].get<double>()) << "\n";
    }
  }
}

}  // namespace lookplan::pipeline
