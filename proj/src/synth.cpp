#include "lookplan/synth.hpp"

#include <algorithm>
#include <cmath>

#include "lookplan/errors.hpp"
#include "lookplan/rng.hpp"

namespace lookplan::synth {

namespace {

void validate_scene_spec(const SynthSceneSpec& spec) {
  require(spec.room_length > 0.0 && spec.room_width > 0.0, ErrorCode::InvalidConfig,
          "room extents must be positive");
  require(spec.floor_points_per_m2 > 0.0, ErrorCode::InvalidConfig,
          "floor point density must be positive");
  require(spec.allowance >= 0.0, ErrorCode::InvalidConfig,
          "allowance must be non-negative");
  for (const auto& box : spec.obstacles) {
    require(box.dimensions.minCoeff() > 0.0, ErrorCode::InvalidConfig,
            "obstacle dimensions must be positive");
    require(box.point_count >= 1, ErrorCode::InvalidConfig,
            "obstacle needs at least one point");
    const Point3 lo = box.center - box.dimensions / 2.0;
    const Point3 hi = box.center + box.dimensions / 2.0;
    require(lo.x() >= 0.0 && lo.y() >= 0.0 && hi.x() <= spec.room_length &&
                hi.y() <= spec.room_width,
            ErrorCode::ObstacleOutsideRoom,
            "obstacle footprint leaves the room footprint");
    // Points inside the slab's allowance would classify as floor, breaking
    // the ground truth.
    require(lo.z() > spec.allowance, ErrorCode::ObstacleOutsideRoom,
            "obstacle must sit strictly above the floor allowance");
  }
}

double wall_gap(const SynthSceneSpec& spec) {
  return std::max(0.05, 3.0 * spec.allowance);
}

}  // namespace

SynthScene gen_scene(const SynthSceneSpec& spec, Date capture_date) {
  validate_scene_spec(spec);
  const auto floor_count = static_cast<std::size_t>(
      std::llround(spec.floor_points_per_m2 * spec.room_length * spec.room_width));
  require(floor_count >= 1, ErrorCode::InvalidConfig,
          "floor density yields no floor points");

  Rng rng(spec.seed);
  SynthScene scene;
  scene.cloud.capture_date = capture_date;
  scene.cloud.frame = geometry::Frame::Scanner;
  scene.cloud.points.reserve(floor_count);
  scene.labels.reserve(floor_count);

  for (std::size_t i = 0; i < floor_count; ++i) {
    const double x = rng.uniform(0.0, spec.room_length);
    const double y = rng.uniform(0.0, spec.room_width);
    scene.cloud.points.emplace_back(x, y, 0.0);
    scene.labels.emplace_back(kFloorElementId);
  }

  Point3 temp_sum = Point3::Zero();
  std::size_t temp_count = 0;
  for (const auto& box : spec.obstacles) {
    const Point3 lo = box.center - box.dimensions / 2.0;
    const Point3 hi = box.center + box.dimensions / 2.0;
    for (std::size_t i = 0; i < box.point_count; ++i) {
      const double x = rng.uniform(lo.x(), hi.x());
      const double y = rng.uniform(lo.y(), hi.y());
      const double z = rng.uniform(lo.z(), hi.z());
      scene.cloud.points.emplace_back(x, y, z);
      scene.labels.emplace_back(geometry::kTemporaryLabel);
      // Same accumulation order as the metric computation, so the expected
      // closeness is bit-identical, not merely close.
      temp_sum += scene.cloud.points.back();
      ++temp_count;
    }
  }

  scene.expected.capture_date = capture_date;
  scene.expected.n_floor = floor_count;
  scene.expected.n_temp = temp_count;
  scene.expected.utilization_extent =
      static_cast<double>(temp_count) / static_cast<double>(temp_count + floor_count);
  if (temp_count > 0) {
    scene.expected.closeness = temp_sum / static_cast<double>(temp_count);
  }
  return scene;
}

std::vector<bim::BimElement> scene_elements(const SynthSceneSpec& spec) {
  validate_scene_spec(spec);
  const double lx = spec.room_length;
  const double ly = spec.room_width;
  const double gap = wall_gap(spec);

  auto box_vertices = [](const Point3& lo, const Point3& hi) {
    std::vector<Point3> v;
    for (const double z : {lo.z(), hi.z()}) {
      for (const double y : {lo.y(), hi.y()}) {
        for (const double x : {lo.x(), hi.x()}) v.emplace_back(x, y, z);
      }
    }
    return v;
  };

  bim::BimElement floor;
  floor.id = kFloorElementId;
  floor.kind = bim::ElementKind::Floor;
  floor.vertices = box_vertices(Point3(0.0, 0.0, -0.2), Point3(lx, ly, 0.0));

  bim::BimElement wall;
  wall.id = kWallElementId;
  wall.kind = bim::ElementKind::Wall;
  wall.vertices =
      box_vertices(Point3(0.0, ly + gap, 0.0), Point3(lx, ly + gap + 0.2, 3.0));

  return {std::move(floor), std::move(wall)};
}

double curve_value(const TaskCurve& curve, Date date) {
  require(!curve.points.empty(), ErrorCode::InvalidConfig,
          "curve \"" + curve.material_condition + "\" has no breakpoints");
  if (date <= curve.points.front().date) return curve.points.front().pct;
  if (date >= curve.points.back().date) return curve.points.back().pct;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const ProgressBreakpoint& a = curve.points[i - 1];
    const ProgressBreakpoint& b = curve.points[i];
    if (date > b.date) continue;
    const double span = static_cast<double>(b.date - a.date);
    const double t = static_cast<double>(date - a.date) / span;
    return a.pct + t * (b.pct - a.pct);
  }
  return curve.points.back().pct;  // unreachable: the scan above covers the range
}

SynthProgress gen_progress(const SynthProgressSpec& spec) {
  require(!spec.curves.empty(), ErrorCode::InvalidConfig, "no progress curves given");
  require(spec.first <= spec.last, ErrorCode::InvalidConfig,
          "progress span is empty (first > last)");
  require(spec.noise >= 0.0, ErrorCode::InvalidConfig, "noise must be non-negative");
  for (const auto& curve : spec.curves) {
    require(!curve.points.empty(), ErrorCode::InvalidConfig,
            "curve \"" + curve.material_condition + "\" has no breakpoints");
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const double pct = curve.points[i].pct;
      require(pct >= 0.0 && pct <= 100.0, ErrorCode::InvalidConfig,
              "curve \"" + curve.material_condition + "\" leaves [0,100]");
      if (i == 0) continue;
      require(curve.points[i - 1].date < curve.points[i].date,
              ErrorCode::DecreasingBreakpoints,
              "curve \"" + curve.material_condition + "\" dates must increase");
      require(curve.points[i - 1].pct <= pct, ErrorCode::DecreasingBreakpoints,
              "curve \"" + curve.material_condition + "\" pct must not decrease");
    }
  }

  const std::vector<Date> days = working_days(spec.first, spec.last, spec.excluded);
  Rng rng(spec.seed);
  SynthProgress out;
  out.observations.mode = features::ObservationMode::Pct;
  out.actuals.mode = features::ObservationMode::Pct;
  std::vector<double> previous(spec.curves.size(), 0.0);

  for (const Date& day : days) {
    for (std::size_t c = 0; c < spec.curves.size(); ++c) {
      const TaskCurve& curve = spec.curves[c];
      const double exact = curve_value(curve, day);
      double observed = exact;
      if (spec.noise > 0.0) {
        observed = std::clamp(exact + rng.uniform(-spec.noise, spec.noise),
                              std::max(previous[c], 0.0), 100.0);
      }
      previous[c] = observed;
      out.actuals.records.push_back({day, curve.material_condition, exact, {}});
      out.observations.records.push_back({day, curve.material_condition, observed, {}});
    }
  }
  return out;
}

SynthSceneSpec default_scene_spec() {
  SynthSceneSpec spec;
  spec.room_length = 8.0;
  spec.room_width = 6.0;
  spec.floor_points_per_m2 = 20.0;
  spec.allowance = 0.02;
  spec.obstacles = {
      {Point3(2.0, 3.0, 0.55), Point3(1.0, 1.0, 1.0), 300},
      {Point3(5.5, 2.0, 0.35), Point3(0.8, 1.2, 0.5), 180},
  };
  spec.seed = 0;
  return spec;
}

SynthProgressSpec default_progress_spec() {
  auto d = [](int month, int day) { return Date(2022, month, day); };
  SynthProgressSpec spec;
  spec.first = d(2, 2);
  spec.last = d(7, 18);
  spec.curves = {
      {"CMU", {{d(2, 2), 100.0}}},
      {"Wall drilling for conduit", {{d(2, 2), 65.0}, {d(2, 14), 100.0}}},
      {"Conduit installation", {{d(2, 2), 0.0}, {d(2, 14), 100.0}}},
      {"First coat plaster",
       {{d(2, 2), 0.0}, {d(2, 20), 85.0}, {d(5, 30), 85.0}, {d(6, 2), 100.0}}},
      {"Second coat plaster",
       {{d(2, 2), 0.0}, {d(2, 20), 80.0}, {d(5, 30), 80.0}, {d(6, 2), 100.0}}},
      {"Epoxy paint",
       {{d(2, 2), 0.0}, {d(3, 7), 0.0}, {d(6, 8), 64.0}, {d(7, 17), 71.0}}},
      {"HVAC_paint",
       {{d(2, 2), 0.0}, {d(4, 15), 0.0}, {d(6, 8), 29.0}, {d(7, 18), 55.0}}},
      {"Fix DBs and fixtures",
       {{d(2, 2), 0.0},
        {d(2, 5), 5.0},
        {d(2, 20), 55.0},
        {d(3, 22), 55.0},
        {d(4, 21), 90.0},
        {d(6, 8), 93.0},
        {d(7, 18), 97.0}}},
  };
  return spec;
}

std::vector<bim::PlannedTask> default_tasks() {
  auto task = [](const char* id, const char* condition, double quantity,
                 const char* unit, Date start, int days) {
    bim::PlannedTask t;
    t.id = id;
    t.material_condition = condition;
    t.element_id = kWallElementId;
    t.planned_quantity = quantity;
    t.unit = unit;
    t.start_date = start;
    t.duration_days = days;
    return t;
  };
  return {
      task("cmu_wall", "CMU", 37.6, "m2", Date(2022, 1, 1), 19),
      task("drill_conduit", "Wall drilling for conduit", 44.0, "m", Date(2022, 2, 1),
           10),
      task("install_conduit", "Conduit installation", 44.0, "m", Date(2022, 3, 19), 37),
      task("plaster_first", "First coat plaster", 37.6, "m2", Date(2022, 3, 1), 22),
      task("plaster_second", "Second coat plaster", 37.6, "m2", Date(2022, 3, 23), 23),
      task("paint_epoxy", "Epoxy paint", 37.6, "m2", Date(2022, 4, 15), 30),
      task("paint_hvac", "HVAC_paint", 37.6, "m2", Date(2022, 4, 15), 30),
      task("fix_dbs", "Fix DBs and fixtures", 4.0, "count", Date(2022, 5, 1), 45),
  };
}

Bim4D default_bim(const SynthSceneSpec& scene_spec) {
  Bim4D bim;
  bim.elements = scene_elements(scene_spec);
  bim.tasks = default_tasks();
  return bim;
}

std::vector<Date> default_scan_dates() {
  return {Date(2022, 2, 1),  Date(2022, 2, 12), Date(2022, 3, 25), Date(2022, 4, 15),
          Date(2022, 4, 22), Date(2022, 6, 29), Date(2022, 7, 13)};
}

}  // namespace lookplan::synth
