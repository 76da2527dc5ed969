#include "lookplan/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"

namespace lookplan::features {

namespace {

const std::vector<std::string> kQuantityHeader = {"date", "material_condition",
                                                  "observed_quantity", "unit"};
const std::vector<std::string> kPctHeader = {"date", "material_condition", "pct"};
const std::vector<std::string> kFeatureTableHeader = {
    "date",        "pct",         "material_condition", "closeness_x",
    "closeness_y", "closeness_z", "utilization_extent"};

void check_pct_range(double pct, const std::string& where) {
  require(std::isfinite(pct) && pct >= 0.0 && pct <= 100.0, ErrorCode::SchemaViolation,
          where + ": pct must lie in [0,100], got " + format_double(pct));
}

}  // namespace

Eigen::RowVectorXd FeatureRow::features() const {
  Eigen::RowVectorXd v(kFeatureWidth);
  v(0) = code[0];
  v(1) = code[1];
  v(2) = code[2];
  v(3) = code[3];
  v(kPctFeature) = pct;
  const Point3 cl = closeness.value_or(Point3::Zero());
  v(5) = cl.x();
  v(6) = cl.y();
  v(7) = cl.z();
  v(8) = utilization_extent;
  const DateParts parts = decompose_date(date);
  v(9) = parts.day_of_month;
  v(10) = parts.month;
  v(11) = parts.year;
  return v;
}

ObservationSet read_observations(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  ObservationSet set;
  if (table.header == kQuantityHeader) {
    set.mode = ObservationMode::Quantity;
  } else if (table.header == kPctHeader) {
    set.mode = ObservationMode::Pct;
  } else {
    raise(ErrorCode::SchemaViolation,
          path.string() + ": header must be date,material_condition,observed_quantity,"
                          "unit or date,material_condition,pct");
  }
  set.records.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    Observation obs;
    obs.date = Date::parse(r[0]);
    obs.material_condition = r[1];
    require(!obs.material_condition.empty(), ErrorCode::SchemaViolation,
            path.string() + ": empty material_condition on " + r[0]);
    obs.value = parse_double(r[2], path.string() + " row " + r[0]);
    if (set.mode == ObservationMode::Quantity) {
      require(obs.value >= 0.0, ErrorCode::SchemaViolation,
              path.string() + ": negative observed_quantity on " + r[0]);
      obs.unit = r[3];
      require(!obs.unit.empty(), ErrorCode::SchemaViolation,
              path.string() + ": empty unit on " + r[0]);
    } else {
      check_pct_range(obs.value, path.string() + " " + r[0]);
    }
    set.records.push_back(std::move(obs));
  }
  return set;
}

void write_observations(const std::filesystem::path& path, const ObservationSet& set) {
  CsvTable table;
  table.header =
      set.mode == ObservationMode::Quantity ? kQuantityHeader : kPctHeader;
  for (const auto& obs : set.records) {
    std::vector<std::string> row = {obs.date.iso(), obs.material_condition,
                                    format_double(obs.value)};
    if (set.mode == ObservationMode::Quantity) row.push_back(obs.unit);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

double compute_percentage_complete(const Observation& obs, const PlannedTask& task) {
  require(task.planned_quantity > 0.0, ErrorCode::SchemaViolation,
          "task \"" + task.id + "\" has non-positive planned_quantity");
  require(obs.unit == task.unit, ErrorCode::UnitMismatch,
          "observation of \"" + obs.material_condition + "\" in \"" + obs.unit +
              "\" but task \"" + task.id + "\" plans in \"" + task.unit + "\"");
  require(obs.value >= 0.0, ErrorCode::SchemaViolation,
          "negative observed_quantity for \"" + obs.material_condition + "\"");
  return std::clamp(100.0 * obs.value / task.planned_quantity, 0.0, 100.0);
}

std::array<int, 4> encode_material_condition(const std::string& name,
                                             const std::vector<std::string>& vocabulary) {
  require(vocabulary.size() <= kMaxVocabulary, ErrorCode::VocabularyOverflow,
          "vocabulary of " + std::to_string(vocabulary.size()) +
              " terms exceeds the 4-bit capacity of 15");
  require(std::is_sorted(vocabulary.begin(), vocabulary.end()), ErrorCode::InvalidConfig,
          "vocabulary must be sorted for a stable encoding");
  const auto it = std::find(vocabulary.begin(), vocabulary.end(), name);
  require(it != vocabulary.end(), ErrorCode::UnknownCondition,
          "material condition \"" + name + "\" is not in the vocabulary");
  const int value = static_cast<int>(it - vocabulary.begin()) + 1;
  return {(value >> 3) & 1, (value >> 2) & 1, (value >> 1) & 1, value & 1};
}

DateParts decompose_date(Date date) {
  return {date.day(), date.month(), date.year()};
}

ScalerParams fit_scaler(const Eigen::MatrixXd& rows) {
  require(rows.rows() >= 1, ErrorCode::EmptyFit, "scaler fit needs at least one row");
  ScalerParams params;
  params.min_v = rows.colwise().minCoeff();
  params.max_v = rows.colwise().maxCoeff();
  return params;
}

Eigen::MatrixXd ScalerParams::apply(const Eigen::MatrixXd& rows) const {
  require(rows.cols() == min_v.size(), ErrorCode::ShapeMismatch,
          "scaler fitted on " + std::to_string(min_v.size()) + " features, applied to " +
              std::to_string(rows.cols()));
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i, j) = apply_one(j, rows(i, j));
  }
  return out;
}

Eigen::MatrixXd ScalerParams::invert(const Eigen::MatrixXd& rows) const {
  require(rows.cols() == min_v.size(), ErrorCode::ShapeMismatch,
          "scaler fitted on " + std::to_string(min_v.size()) + " features, applied to " +
              std::to_string(rows.cols()));
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i, j) = invert_one(j, rows(i, j));
  }
  return out;
}

double ScalerParams::apply_one(Eigen::Index feature, double x) const {
  const double span = max_v(feature) - min_v(feature);
  if (span == 0.0) return 0.0;
  return (x - min_v(feature)) / span;
}

double ScalerParams::invert_one(Eigen::Index feature, double x) const {
  const double span = max_v(feature) - min_v(feature);
  if (span == 0.0) return min_v(feature);
  return min_v(feature) + x * span;
}

TaskSeries build_feature_rows(const ObservationSet& observations,
                              std::vector<SpatialMetrics> metrics_log, const Bim4D& bim) {
  std::sort(metrics_log.begin(), metrics_log.end(),
            [](const SpatialMetrics& a, const SpatialMetrics& b) {
              return a.capture_date < b.capture_date;
            });
  for (std::size_t i = 1; i < metrics_log.size(); ++i) {
    require(metrics_log[i - 1].capture_date < metrics_log[i].capture_date,
            ErrorCode::DuplicateDate,
            "metrics log has two records for " + metrics_log[i].capture_date.iso());
  }

  const std::vector<std::string> vocabulary = bim.vocabulary();
  TaskSeries series;
  for (const auto& obs : observations.records) {
    const PlannedTask& task = bim.task_for_condition(obs.material_condition);

    FeatureRow row;
    row.date = obs.date;
    row.task_id = task.id;
    row.material_condition = obs.material_condition;
    row.code = encode_material_condition(obs.material_condition, vocabulary);
    if (observations.mode == ObservationMode::Quantity) {
      row.pct = compute_percentage_complete(obs, task);
    } else {
      check_pct_range(obs.value, "observation of \"" + obs.material_condition +
                                     "\" on " + obs.date.iso());
      row.pct = obs.value;
    }

    // Latest scan at or before the observation date supplies the spatial view.
    const SpatialMetrics* latest = nullptr;
    for (const auto& m : metrics_log) {
      if (m.capture_date > obs.date) break;
      latest = &m;
    }
    require(latest != nullptr, ErrorCode::NoMetricsBeforeDate,
            "no spatial metrics on or before " + obs.date.iso());
    row.closeness = latest->closeness;
    row.utilization_extent = latest->utilization_extent;

    series[task.id].push_back(std::move(row));
  }

  for (auto& [task_id, rows] : series) {
    std::sort(rows.begin(), rows.end(),
              [](const FeatureRow& a, const FeatureRow& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      require(rows[i - 1].date < rows[i].date, ErrorCode::DuplicateDate,
              "task \"" + task_id + "\" observed twice on " + rows[i].date.iso());
    }
  }
  return series;
}

void write_feature_table(const std::filesystem::path& path, const TaskSeries& series) {
  std::vector<const FeatureRow*> rows;
  for (const auto& [task_id, task_rows] : series) {
    for (const auto& r : task_rows) rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](const FeatureRow* a, const FeatureRow* b) {
    if (a->date != b->date) return a->date < b->date;
    return a->material_condition < b->material_condition;
  });

  CsvTable table;
  table.header = kFeatureTableHeader;
  for (const FeatureRow* r : rows) {
    std::vector<std::string> out(7);
    out[0] = r->date.iso();
    out[1] = format_double(r->pct);
    out[2] = r->material_condition;
    if (r->closeness) {
      out[3] = format_double(r->closeness->x());
      out[4] = format_double(r->closeness->y());
      out[5] = format_double(r->closeness->z());
    }
    out[6] = format_double(r->utilization_extent);
    table.rows.push_back(std::move(out));
  }
  write_csv(path, table);
}

TaskSeries read_feature_table(const std::filesystem::path& path, const Bim4D& bim) {
  const CsvTable table = read_csv(path);
  require(table.header == kFeatureTableHeader, ErrorCode::SchemaViolation,
          path.string() + ": unexpected feature table header");

  const std::vector<std::string> vocabulary = bim.vocabulary();
  TaskSeries series;
  for (const auto& r : table.rows) {
    FeatureRow row;
    row.date = Date::parse(r[0]);
    row.pct = parse_double(r[1], path.string() + " row " + r[0]);
    check_pct_range(row.pct, path.string() + " " + r[0]);
    row.material_condition = r[2];
    const PlannedTask& task = bim.task_for_condition(row.material_condition);
    row.task_id = task.id;
    row.code = encode_material_condition(row.material_condition, vocabulary);
    const bool absent = r[3].empty() && r[4].empty() && r[5].empty();
    const bool present = !r[3].empty() && !r[4].empty() && !r[5].empty();
    require(absent || present, ErrorCode::SchemaViolation,
            path.string() + ": closeness fields must be all present or all empty on " +
                r[0]);
    if (present) {
      const std::string where = path.string() + " row " + r[0];
      row.closeness = Point3(parse_double(r[3], where), parse_double(r[4], where),
                             parse_double(r[5], where));
    }
    row.utilization_extent = parse_double(r[6], path.string() + " row " + r[0]);
    series[task.id].push_back(std::move(row));
  }

  for (auto& [task_id, rows] : series) {
    std::sort(rows.begin(), rows.end(),
              [](const FeatureRow& a, const FeatureRow& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      require(rows[i - 1].date < rows[i].date, ErrorCode::DuplicateDate,
              "task \"" + task_id + "\" appears twice on " + rows[i].date.iso());
    }
  }
  return series;
}

std::vector<FeatureWindow> make_windows(const TaskSeries& series, int window) {
  require(window >= 1, ErrorCode::InvalidConfig, "window length must be positive");
  std::vector<FeatureWindow> windows;
  for (const auto& [task_id, rows] : series) {
    const std::size_t need = 2 * static_cast<std::size_t>(window);
    require(rows.size() >= need, ErrorCode::SeriesTooShort,
            "task \"" + task_id + "\" has " + std::to_string(rows.size()) +
                " rows; " + std::to_string(need) + " needed for one window");

    Eigen::MatrixXd all(static_cast<Eigen::Index>(rows.size()), kFeatureWidth);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      all.row(static_cast<Eigen::Index>(i)) = rows[i].features();
    }

    const std::size_t count = rows.size() - need + 1;
    for (std::size_t s = 0; s < count; ++s) {
      FeatureWindow w;
      w.task_id = task_id;
      w.anchor_date = rows[s + static_cast<std::size_t>(window) - 1].date;
      w.inputs = all.middleRows(static_cast<Eigen::Index>(s), window);
      w.targets = all.block(static_cast<Eigen::Index>(s) + window, kPctFeature,
                            window, 1);
      windows.push_back(std::move(w));
    }
  }
  std::sort(windows.begin(), windows.end(),
            [](const FeatureWindow& a, const FeatureWindow& b) {
              if (a.anchor_date != b.anchor_date) return a.anchor_date < b.anchor_date;
              return a.task_id < b.task_id;
            });
  return windows;
}

DatasetSplit split_dataset(std::vector<FeatureWindow> windows, int test_count) {
  require(test_count >= 1, ErrorCode::InvalidConfig, "test_count must be positive");
  const std::size_t total = windows.size();
  const std::size_t test_n = static_cast<std::size_t>(test_count);
  require(total >= test_n + 2, ErrorCode::InsufficientWindows,
          std::to_string(total) + " windows cannot supply " + std::to_string(test_n) +
              " test windows plus training and validation");

  const std::size_t remainder = total - test_n;
  const std::size_t val_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(remainder))));
  const std::size_t train_n = remainder - val_n;
  require(train_n >= 1, ErrorCode::InsufficientWindows,
          "no training windows left after the validation cut");

  DatasetSplit split;
  split.train.assign(std::make_move_iterator(windows.begin()),
                     std::make_move_iterator(windows.begin() + train_n));
  split.validation.assign(std::make_move_iterator(windows.begin() + train_n),
                          std::make_move_iterator(windows.begin() + remainder));
  split.test.assign(std::make_move_iterator(windows.begin() + remainder),
                    std::make_move_iterator(windows.end()));
  return split;
}

Dataset prepare_dataset(const TaskSeries& series, int window, int test_count) {
  Dataset dataset;
  dataset.window = window;
  dataset.split = split_dataset(make_windows(series, window), test_count);

  Eigen::Index n_rows = 0;
  for (const auto& w : dataset.split.train) n_rows += w.inputs.rows();
  Eigen::MatrixXd train_rows(n_rows, kFeatureWidth);
  Eigen::Index at = 0;
  for (const auto& w : dataset.split.train) {
    train_rows.middleRows(at, w.inputs.rows()) = w.inputs;
    at += w.inputs.rows();
  }
  dataset.scaler = fit_scaler(train_rows);

  auto scale_windows = [&](std::vector<FeatureWindow>& windows) {
    for (auto& w : windows) {
      w.inputs = dataset.scaler.apply(w.inputs);
      for (Eigen::Index i = 0; i < w.targets.size(); ++i) {
        w.targets(i) = dataset.scaler.apply_one(kPctFeature, w.targets(i));
      }
    }
  };
  scale_windows(dataset.split.train);
  scale_windows(dataset.split.validation);
  scale_windows(dataset.split.test);
  return dataset;
}

}  // namespace lookplan::features
