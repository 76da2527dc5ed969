#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lookplan/bim.hpp"
#include "lookplan/dates.hpp"
#include "lookplan/geometry.hpp"

namespace lookplan::features {

using bim::Bim4D;
using bim::PlannedTask;
using geometry::Point3;
using geometry::SpatialMetrics;

inline constexpr Eigen::Index kFeatureWidth = 12;
inline constexpr Eigen::Index kPctFeature = 4;  // column of pct in the feature vector
inline constexpr int kDefaultWindow = 18;
inline constexpr std::size_t kMaxVocabulary = 15;  // 4 bits, code 0000 reserved

// Observations come in two file flavours: measured quantities to be divided
// by the plan, or percentages recorded directly.
enum class ObservationMode { Quantity, Pct };

struct Observation {
  Date date;
  std::string material_condition;
  double value = 0.0;
  std::string unit;  // empty in Pct mode
};

struct ObservationSet {
  ObservationMode mode = ObservationMode::Pct;
  std::vector<Observation> records;
};

// One date of one task, with the carried spatial metrics attached. The
// flattened feature vector layout is
//   [code3, code2, code1, code0, pct, clx, cly, clz, extent, day, month, year]
struct FeatureRow {
  Date date;
  std::string task_id;
  std::string material_condition;
  std::array<int, 4> code = {0, 0, 0, 0};  // most-significant digit first
  double pct = 0.0;
  std::optional<Point3> closeness;  // absent scans contribute zeros
  double utilization_extent = 0.0;

  Eigen::RowVectorXd features() const;
};

using TaskSeries = std::map<std::string, std::vector<FeatureRow>>;

// Per-feature min/max recorded on the training population.
struct ScalerParams {
  Eigen::VectorXd min_v;
  Eigen::VectorXd max_v;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const;
  double apply_one(Eigen::Index feature, double x) const;
  double invert_one(Eigen::Index feature, double x) const;
};

struct FeatureWindow {
  Eigen::MatrixXd inputs;   // window x 12
  Eigen::VectorXd targets;  // pct of the next `window` rows of the same task
  Date anchor_date;         // date of the last input row
  std::string task_id;
};

struct DatasetSplit {
  std::vector<FeatureWindow> train;
  std::vector<FeatureWindow> validation;
  std::vector<FeatureWindow> test;
};

// Split plus everything needed to undo the scaling downstream.
struct Dataset {
  DatasetSplit split;
  ScalerParams scaler;
  int window = kDefaultWindow;
};

ObservationSet read_observations(const std::filesystem::path& path);
void write_observations(const std::filesystem::path& path, const ObservationSet& set);

// 100 * observed / planned, clamped to [0,100]; units must agree.
double compute_percentage_complete(const Observation& obs, const PlannedTask& task);

// Digits of (1 + sorted index) in base 2, most-significant first.
std::array<int, 4> encode_material_condition(const std::string& name,
                                             const std::vector<std::string>& vocabulary);

struct DateParts {
  int day_of_month;
  int month;
  int year;
};
DateParts decompose_date(Date date);

ScalerParams fit_scaler(const Eigen::MatrixXd& rows);

// Long-format assembly: percentage per observation, spatial metrics carried
// forward from the latest scan at or before the observation date.
TaskSeries build_feature_rows(const ObservationSet& observations,
                              std::vector<SpatialMetrics> metrics_log, const Bim4D& bim);

// Feature table CSV (date,pct,material_condition,closeness_x,closeness_y,
// closeness_z,utilization_extent), sorted by (date, material_condition).
void write_feature_table(const std::filesystem::path& path, const TaskSeries& series);
TaskSeries read_feature_table(const std::filesystem::path& path, const Bim4D& bim);

// Stride-1 windows over every task series, unscaled, ordered by
// (anchor_date, task_id). Each series must afford at least one window.
std::vector<FeatureWindow> make_windows(const TaskSeries& series, int window);

// Chronological partition: last test_count windows are the test set; of the
// remainder the trailing ceil(10%) (at least 1) is validation.
DatasetSplit split_dataset(std::vector<FeatureWindow> windows, int test_count);

// make_windows + split_dataset + scaler fit on training inputs only, then
// scales every window in place (targets use the pct feature's range).
Dataset prepare_dataset(const TaskSeries& series, int window, int test_count);

}  // namespace lookplan::features
