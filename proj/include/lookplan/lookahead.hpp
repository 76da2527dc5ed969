#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lookplan/bim.hpp"
#include "lookplan/dates.hpp"

namespace lookplan::lookahead {

using bim::Bim4D;

enum class TaskFlag { OnTrack, AtRisk };
const char* flag_name(TaskFlag flag);
TaskFlag parse_flag(const std::string& text);

// One forecast date of one task. Values are stored already rounded to two
// decimals so every emitted format round-trips exactly.
struct ForecastBand {
  Date date;
  std::string task_id;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double planned = 0.0;  // as-planned fraction on this date
};

struct LookaheadPlan {
  Date generated_on;
  std::vector<Date> horizon;                // ordered forecast dates
  std::vector<ForecastBand> bands;          // ordered by (task, date)
  std::map<std::string, TaskFlag> flags;    // task -> plan comparison verdict
  double mae = 0.0;                         // band half-width in pct
};

enum class PlanFormat { Csv, Json, Markdown };

// Symmetric band around the median, clamped to the percentage range.
std::pair<double, double> error_bands(double median, double mae);

// Bands for every task's horizon predictions on the next working days after
// start_date; tasks are flagged AT_RISK when the as-planned fraction exceeds
// the band's upper limit on the final horizon date.
LookaheadPlan build_lookahead_plan(const std::map<std::string, Eigen::VectorXd>& predictions,
                                   double mae, const Bim4D& bim, Date start_date);

// CSV columns: task,date,median,lower,upper,planned,flag. JSON mirrors the
// plan struct. Markdown renders a final-date summary table per task.
void emit_plan(const LookaheadPlan& plan, PlanFormat format,
               const std::filesystem::path& path);

// Readers for the lossless formats. The CSV carries no generated_on/mae, so
// those fields come back defaulted; bands and flags are exact.
LookaheadPlan read_plan_csv(const std::filesystem::path& path);
LookaheadPlan read_plan_json(const std::filesystem::path& path);

}  // namespace lookplan::lookahead
