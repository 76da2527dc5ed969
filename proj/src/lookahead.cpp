#include "lookplan/lookahead.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"

namespace lookplan::lookahead {

namespace {

double round2(double value) { return std::round(value * 100.0) / 100.0; }

// Table-style rendering: at most two decimals, trailing zeros trimmed, so a
// whole percentage prints as "100" rather than "100.00".
std::string trim_pct(double value) {
  std::string text = format_fixed(value, 2);
  while (!text.empty() && text.back() == '0') text.pop_back();
  if (!text.empty() && text.back() == '.') text.pop_back();
  return text;
}

const std::vector<std::string> kPlanHeader = {"task",  "date",    "median", "lower",
                                              "upper", "planned", "flag"};

void write_plan_csv(const LookaheadPlan& plan, const std::filesystem::path& path) {
  CsvTable table;
  table.header = kPlanHeader;
  for (const auto& band : plan.bands) {
    table.rows.push_back({band.task_id, band.date.iso(), format_fixed(band.median, 2),
                          format_fixed(band.lower, 2), format_fixed(band.upper, 2),
                          format_fixed(band.planned, 2),
                          flag_name(plan.flags.at(band.task_id))});
  }
  write_csv(path, table);
}

void write_plan_json(const LookaheadPlan& plan, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["generated_on"] = plan.generated_on.iso();
  doc["mae"] = plan.mae;
  doc["horizon"] = nlohmann::ordered_json::array();
  for (const Date& d : plan.horizon) doc["horizon"].push_back(d.iso());
  doc["tasks"] = nlohmann::ordered_json::object();
  for (const auto& [task_id, flag] : plan.flags) {
    nlohmann::ordered_json entry;
    entry["flag"] = flag_name(flag);
    entry["bands"] = nlohmann::ordered_json::array();
    for (const auto& band : plan.bands) {
      if (band.task_id != task_id) continue;
      entry["bands"].push_back({{"date", band.date.iso()},
                                {"median", band.median},
                                {"lower", band.lower},
                                {"upper", band.upper},
                                {"planned", band.planned}});
    }
    doc["tasks"][task_id] = std::move(entry);
  }
  write_text_file(path, doc.dump(2) + "\n");
}

void write_plan_markdown(const LookaheadPlan& plan, const std::filesystem::path& path) {
  const Date final_date = plan.horizon.back();
  std::string out;
  out += "# Lookahead plan\n\n";
  out += "Generated on " + plan.generated_on.iso() + " for " +
         std::to_string(plan.horizon.size()) + " working days (" +
         plan.horizon.front().iso() + " to " + final_date.iso() + "), band half-width " +
         trim_pct(plan.mae) + "%.\n\n";
  out += "| Task | Planned | Upper limit (+MAE) | Median | Lower limit (-MAE) | Flag |\n";
  out += "| --- | --- | --- | --- | --- | --- |\n";
  for (const auto& [task_id, flag] : plan.flags) {
    const ForecastBand* final_band = nullptr;
    for (const auto& band : plan.bands) {
      if (band.task_id == task_id && band.date == final_date) final_band = &band;
    }
    require(final_band != nullptr, ErrorCode::ShapeMismatch,
            "task \"" + task_id + "\" lacks a band on the final horizon date");
    out += "| " + task_id + " | " + trim_pct(final_band->planned) + " | " +
           trim_pct(final_band->upper) + " | " + trim_pct(final_band->median) + " | " +
           trim_pct(final_band->lower) + " | " + flag_name(flag) + " |\n";
  }
  write_text_file(path, out);
}

}  // namespace

const char* flag_name(TaskFlag flag) {
  return flag == TaskFlag::AtRisk ? "AT_RISK" : "ON_TRACK";
}

TaskFlag parse_flag(const std::string& text) {
  if (text == "AT_RISK") return TaskFlag::AtRisk;
  if (text == "ON_TRACK") return TaskFlag::OnTrack;
  raise(ErrorCode::SchemaViolation, "unknown flag \"" + text + "\"");
}

std::pair<double, double> error_bands(double median, double mae) {
  require(median >= 0.0 && median <= 100.0, ErrorCode::InvalidConfig,
          "median must lie in [0,100], got " + format_double(median));
  require(mae >= 0.0, ErrorCode::InvalidConfig, "mae must be non-negative");
  return {std::max(median - mae, 0.0), std::min(median + mae, 100.0)};
}

LookaheadPlan build_lookahead_plan(
    const std::map<std::string, Eigen::VectorXd>& predictions, double mae,
    const Bim4D& bim, Date start_date) {
  require(!predictions.empty(), ErrorCode::InsufficientHistory,
          "no predictions to plan from");
  require(mae >= 0.0, ErrorCode::InvalidConfig, "mae must be non-negative");
  const Eigen::Index horizon_len = predictions.begin()->second.size();
  require(horizon_len >= 1, ErrorCode::ShapeMismatch, "empty prediction horizon");
  for (const auto& [task_id, preds] : predictions) {
    require(preds.size() == horizon_len, ErrorCode::ShapeMismatch,
            "task \"" + task_id + "\" has a different horizon length");
  }

  LookaheadPlan plan;
  plan.generated_on = start_date;
  plan.mae = mae;
  plan.horizon = next_working_days(start_date, static_cast<int>(horizon_len));

  for (const auto& [task_id, preds] : predictions) {
    const bim::PlannedTask& task = bim.task(task_id);
    double final_upper = 0.0;
    double final_planned = 0.0;
    for (Eigen::Index t = 0; t < horizon_len; ++t) {
      const double median = std::clamp(preds(t), 0.0, 100.0);
      const auto [lower, upper] = error_bands(median, mae);

      ForecastBand band;
      band.date = plan.horizon[static_cast<std::size_t>(t)];
      band.task_id = task_id;
      band.median = round2(median);
      band.lower = round2(lower);
      band.upper = round2(upper);
      band.planned = round2(bim::planned_fraction_at(task, band.date));
      if (t == horizon_len - 1) {
        final_upper = band.upper;
        final_planned = band.planned;
      }
      plan.bands.push_back(std::move(band));
    }
    plan.flags[task_id] =
        final_planned > final_upper ? TaskFlag::AtRisk : TaskFlag::OnTrack;
  }
  return plan;
}

void emit_plan(const LookaheadPlan& plan, PlanFormat format,
               const std::filesystem::path& path) {
  require(!plan.horizon.empty(), ErrorCode::InvalidConfig, "plan has an empty horizon");
  require(plan.bands.size() == plan.flags.size() * plan.horizon.size(),
          ErrorCode::ShapeMismatch,
          "every task must carry exactly one band per horizon date");
  switch (format) {
    case PlanFormat::Csv: write_plan_csv(plan, path); return;
    case PlanFormat::Json: write_plan_json(plan, path); return;
    case PlanFormat::Markdown: write_plan_markdown(plan, path); return;
  }
  raise(ErrorCode::InvalidConfig, "invalid plan format value");
}

LookaheadPlan read_plan_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require(table.header == kPlanHeader, ErrorCode::SchemaViolation,
          path.string() + ": unexpected plan header");

  LookaheadPlan plan;
  std::set<Date> dates;
  for (const auto& r : table.rows) {
    ForecastBand band;
    band.task_id = r[0];
    band.date = Date::parse(r[1]);
    const std::string where = path.string() + " row " + r[0] + " " + r[1];
    band.median = parse_double(r[2], where);
    band.lower = parse_double(r[3], where);
    band.upper = parse_double(r[4], where);
    band.planned = parse_double(r[5], where);
    const TaskFlag flag = parse_flag(r[6]);
    const auto it = plan.flags.find(band.task_id);
    require(it == plan.flags.end() || it->second == flag, ErrorCode::SchemaViolation,
            path.string() + ": task \"" + band.task_id + "\" has conflicting flags");
    plan.flags[band.task_id] = flag;
    dates.insert(band.date);
    plan.bands.push_back(std::move(band));
  }
  plan.horizon.assign(dates.begin(), dates.end());
  return plan;
}

LookaheadPlan read_plan_json(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  LookaheadPlan plan;
  plan.generated_on = Date::parse(doc.at("generated_on").get<std::string>());
  plan.mae = doc.at("mae").get<double>();
  for (const auto& d : doc.at("horizon")) {
    plan.horizon.push_back(Date::parse(d.get<std::string>()));
  }
  // nlohmann::json stores object keys sorted, matching the plan's task order.
  for (const auto& [task_id, entry] : doc.at("tasks").items()) {
    plan.flags[task_id] = parse_flag(entry.at("flag").get<std::string>());
    for (const auto& b : entry.at("bands")) {
      ForecastBand band;
      band.task_id = task_id;
      band.date = Date::parse(b.at("date").get<std::string>());
      band.median = b.at("median").get<double>();
      band.lower = b.at("lower").get<double>();
      band.upper = b.at("upper").get<double>();
      band.planned = b.at("planned").get<double>();
      plan.bands.push_back(std::move(band));
    }
  }
  return plan;
}

}  // namespace lookplan::lookahead
