#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "lookplan/bim.hpp"
#include "lookplan/dates.hpp"
#include "lookplan/features.hpp"
#include "lookplan/geometry.hpp"

namespace lookplan::synth {

using bim::Bim4D;
using geometry::Point3;
using geometry::PointCloud;
using geometry::SpatialMetrics;

// A box of loose material sitting on site: its points must classify as
// temporary, so it has to float above the floor slab's allowance.
struct ObstacleBox {
  Point3 center;
  Point3 dimensions;
  std::size_t point_count = 0;
};

struct SynthSceneSpec {
  double room_length = 8.0;  // x extent in meters
  double room_width = 6.0;   // y extent in meters
  double floor_points_per_m2 = 20.0;
  double allowance = 0.02;  // must match the classification config
  std::vector<ObstacleBox> obstacles;
  std::uint64_t seed = 0;
};

struct SynthScene {
  PointCloud cloud;                 // floor points first, then obstacle points
  std::vector<std::string> labels;  // ground truth per point
  SpatialMetrics expected;          // exact, from the realized samples
};

// Floor points sampled on the slab surface, obstacle points uniform in their
// boxes; expected extent is the integer count ratio and expected closeness
// the running mean of the obstacle samples in cloud order.
SynthScene gen_scene(const SynthSceneSpec& spec, Date capture_date);

// The elements the scene's classifier needs: the floor slab and one wall
// placed behind a gap wide enough that no scene point can reach it.
std::vector<bim::BimElement> scene_elements(const SynthSceneSpec& spec);

inline constexpr const char* kFloorElementId = "floor_slab";
inline constexpr const char* kWallElementId = "wall_north";

struct ProgressBreakpoint {
  Date date;
  double pct = 0.0;
};

struct TaskCurve {
  std::string material_condition;
  std::vector<ProgressBreakpoint> points;  // dates increasing, pct non-decreasing
};

struct SynthProgressSpec {
  std::vector<TaskCurve> curves;
  Date first;
  Date last;
  std::set<Date> excluded;  // holidays on top of weekends
  double noise = 0.0;       // uniform +-noise on observations, kept monotone
  std::uint64_t seed = 0;
};

struct SynthProgress {
  features::ObservationSet observations;  // pct mode, possibly noisy
  features::ObservationSet actuals;       // pct mode, exact curve values
};

// Piecewise-linear lookup over calendar days; flat before the first and
// after the last breakpoint.
double curve_value(const TaskCurve& curve, Date date);

// One observation per curve per working day in [first, last].
SynthProgress gen_progress(const SynthProgressSpec& spec);

// Default fixtures: an 8-condition progress story over
// Feb 2 to Jul 18, 2022, its schedule, and a handful of scan dates.
SynthSceneSpec default_scene_spec();
SynthProgressSpec default_progress_spec();
std::vector<bim::PlannedTask> default_tasks();
Bim4D default_bim(const SynthSceneSpec& scene_spec);
std::vector<Date> default_scan_dates();

}  // namespace lookplan::synth
