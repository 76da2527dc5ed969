// Acceptance gate: one self-checking scenario per release criterion, each
// printing a single PASS/FAIL line. The first argument must be the CLI
// binary, which the last two criteria drive end to end.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"
#include "lookplan/features.hpp"
#include "lookplan/geometry.hpp"
#include "lookplan/gru.hpp"
#include "lookplan/lookahead.hpp"
#include "lookplan/rng.hpp"
#include "lookplan/synth.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;
using lookplan::Date;
using lookplan::Rng;
using lookplan::testing::TempDir;
namespace features = lookplan::features;
namespace geometry = lookplan::geometry;
namespace gru = lookplan::gru;
namespace synth = lookplan::synth;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome ok(std::string detail) { return {true, std::move(detail)}; }
Outcome bad(std::string detail) { return {false, std::move(detail)}; }

std::string num(double v) { return lookplan::format_double(v); }

// ---------------------------------------------------------------- fixtures

// The default site fixture: eight progress curves sampled every working day,
// spatial metrics from the shrinking-pile scan series, assembled into the
// supervised dataset with a chronological holdout.
features::Dataset default_fixture_dataset() {
  synth::SynthSceneSpec scene_spec = synth::default_scene_spec();
  synth::SynthProgressSpec progress_spec = synth::default_progress_spec();
  synth::SynthProgress progress = synth::gen_progress(progress_spec);

  std::vector<geometry::SpatialMetrics> metrics;
  const std::vector<Date> dates = synth::default_scan_dates();
  for (std::size_t i = 0; i < dates.size(); ++i) {
    synth::SynthSceneSpec spec = scene_spec;
    spec.seed = Rng::derive(scene_spec.seed, i);
    double factor = 1.0 - 0.08 * static_cast<double>(i);
    for (auto& obstacle : spec.obstacles) {
      auto scaled = static_cast<long long>(
          std::llround(static_cast<double>(obstacle.point_count) * factor));
      obstacle.point_count = static_cast<std::size_t>(std::max(1LL, scaled));
    }
    metrics.push_back(synth::gen_scene(spec, dates[i]).expected);
  }

  lookplan::bim::Bim4D model = synth::default_bim(scene_spec);
  features::TaskSeries series =
      features::build_feature_rows(progress.observations, metrics, model);
  return features::prepare_dataset(series, 18, 18);
}

Matrix3d rotation_from_axis_angle(Vector3d axis, double angle) {
  axis.normalize();
  Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Matrix3d::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
}

// ---------------------------------------------------------------- criteria

Outcome criterion_1_param_count() {
  auto params = gru::init_params(42, 64, 12);
  auto counts = gru::param_count(params);
  if (counts.encoder != 29952 || counts.decoder != 74496 || counts.dense != 129 ||
      counts.total != 104577) {
    return bad("expected (29952, 74496, 129, 104577), got (" +
               std::to_string(counts.encoder) + ", " + std::to_string(counts.decoder) +
               ", " + std::to_string(counts.dense) + ", " + std::to_string(counts.total) +
               ")");
  }
  return ok("units 64, width 12 -> 104,577 trainable parameters");
}

Outcome criterion_2_error_bands() {
  auto [lower_a, upper_a] = lookplan::lookahead::error_bands(79.0, 16.57);
  auto [lower_b, upper_b] = lookplan::lookahead::error_bands(94.0, 16.57);
  auto close = [](double got, double want) { return std::abs(got - want) <= 0.01; };
  if (!close(lower_a, 62.43) || !close(upper_a, 95.57) || !close(lower_b, 77.43) ||
      !close(upper_b, 100.0)) {
    return bad("bands (" + num(lower_a) + ", " + num(upper_a) + ") and (" + num(lower_b) +
               ", " + num(upper_b) + ") miss (62.43, 95.57) / (77.43, 100)");
  }
  return ok("(79, 16.57) -> (62.43, 95.57); (94, 16.57) -> (77.43, 100)");
}

Outcome criterion_3_gradients() {
  Rng rng(59);
  auto params = gru::init_params(61, 4, 3);
  for (auto* dir : {&params.encoder_fw, &params.encoder_bw, &params.decoder_fw,
                    &params.decoder_bw}) {
    for (Eigen::Index i = 0; i < dir->b_in.size(); ++i) {
      dir->b_in(i) = rng.uniform(-0.5, 0.5);
      dir->b_rec(i) = rng.uniform(-0.5, 0.5);
    }
  }

  std::vector<MatrixXd> batch;
  for (int b = 0; b < 2; ++b) {
    MatrixXd window(3, 3);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) window(r, c) = rng.uniform();
    }
    batch.push_back(window);
  }
  MatrixXd target(2, 3);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) target(r, c) = rng.uniform();
  }

  gru::ForwardCache cache;
  MatrixXd pred = gru::forward(params, batch, &cache);
  MatrixXd d_pred = 2.0 * (pred - target) / double(pred.size());
  auto analytic = gru::backward(params, cache, d_pred);

  auto refs = gru::tensor_refs(params);
  auto grad_refs = gru::tensor_refs(analytic);
  const double step = 1e-5;
  double worst = 0.0;
  long checked = 0;
  for (std::size_t t = 0; t < refs.size(); ++t) {
    for (Eigen::Index i = 0; i < refs[t].size; ++i) {
      const double saved = refs[t].data[i];
      refs[t].data[i] = saved + step;
      const double up = gru::loss_mse(gru::forward(params, batch), target);
      refs[t].data[i] = saved - step;
      const double down = gru::loss_mse(gru::forward(params, batch), target);
      refs[t].data[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = grad_refs[t].data[i];
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-7});
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  if (worst >= 1e-4) {
    return bad("worst relative gradient error " + num(worst) + " across " +
               std::to_string(checked) + " parameters");
  }
  return ok(std::to_string(checked) + " parameters, worst relative error " + num(worst));
}

Outcome criterion_4_geometry_oracle() {
  synth::SynthSceneSpec spec = synth::default_scene_spec();
  std::vector<geometry::Enclosure> enclosures;
  for (const auto& element : synth::scene_elements(spec)) {
    enclosures.push_back(
        geometry::build_enclosure(element.vertices, element.id, spec.allowance));
  }

  double worst_closeness = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    spec.seed = seed;
    synth::SynthScene scene = synth::gen_scene(spec, Date(2022, 3, 25));
    scene.cloud.frame = geometry::Frame::Bim;

    auto result = geometry::classify_points(scene.cloud, enclosures);
    auto metrics = geometry::compute_spatial_metrics(
        result, scene.cloud, synth::kFloorElementId, scene.cloud.capture_date);

    if (result.labels != scene.labels) {
      return bad("seed " + std::to_string(seed) + ": classified labels disagree");
    }
    if (metrics.utilization_extent != scene.expected.utilization_extent ||
        metrics.n_temp != scene.expected.n_temp ||
        metrics.n_floor != scene.expected.n_floor) {
      return bad("seed " + std::to_string(seed) + ": extent " +
                 num(metrics.utilization_extent) + " != " +
                 num(scene.expected.utilization_extent));
    }
    if (!metrics.closeness || !scene.expected.closeness) {
      return bad("seed " + std::to_string(seed) + ": missing closeness");
    }
    const double diff =
        (*metrics.closeness - *scene.expected.closeness).cwiseAbs().maxCoeff();
    worst_closeness = std::max(worst_closeness, diff);
    if (diff >= 1e-9) {
      return bad("seed " + std::to_string(seed) + ": closeness off by " + num(diff));
    }
  }
  return ok("50 scenes, extents exact, worst closeness gap " + num(worst_closeness));
}

Outcome criterion_5_registration() {
  Rng rng(12345);
  double worst_rms = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    geometry::RigidTransform truth;
    truth.rotation = rotation_from_axis_angle(
        Vector3d(rng.normal(), rng.normal(), rng.normal()), rng.uniform(-3.0, 3.0));
    truth.translation =
        Vector3d(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));

    std::vector<Vector3d> src, dst;
    for (int i = 0; i < 10; ++i) {
      src.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
      dst.push_back(truth(src.back()));
    }

    geometry::RigidTransform estimate = geometry::estimate_rigid_transform(src, dst);
    double squared = 0.0;
    for (int i = 0; i < 10; ++i) squared += (estimate(src[std::size_t(i)]) -
                                             dst[std::size_t(i)]).squaredNorm();
    const double rms = std::sqrt(squared / 10.0);
    worst_rms = std::max(worst_rms, rms);
    if (rms >= 1e-9) {
      return bad("trial " + std::to_string(trial) + ": RMS residual " + num(rms));
    }
  }
  return ok("100 transforms recovered, worst RMS residual " + num(worst_rms));
}

Outcome criterion_6_training(const features::Dataset& dataset) {
  // (a) Memorize ten windows from the fixture at the default learning rate.
  gru::DatasetSplit tiny;
  tiny.train.assign(dataset.split.train.begin(), dataset.split.train.begin() + 10);
  tiny.validation.assign(dataset.split.validation.begin(),
                         dataset.split.validation.begin() + 2);

  gru::TrainConfig overfit_config;
  overfit_config.learning_rate = 0.001;
  overfit_config.epochs = 500;
  overfit_config.batch_size = 8;
  overfit_config.units = 32;
  overfit_config.seed = 42;
  auto overfit_params = gru::init_params(overfit_config.seed, overfit_config.units,
                                         features::kFeatureWidth);
  auto overfit_report = gru::train(overfit_params, tiny, overfit_config);
  const double final_mse = overfit_report.epochs.back().train_mse;
  if (final_mse >= 1e-3) {
    return bad("10-window overfit stalled at training MSE " + num(final_mse));
  }

  // (b) Chronological holdout on the full fixture.
  gru::TrainConfig config;
  config.learning_rate = 0.001;
  config.epochs = 12;
  config.batch_size = 8;
  config.units = 16;
  config.seed = 42;
  auto params = gru::init_params(config.seed, config.units, features::kFeatureWidth);
  auto report = gru::train(params, dataset.split, config);
  if (report.test_mae > 0.17) {
    return bad("held-out test MAE " + num(report.test_mae) + " exceeds 0.17");
  }
  if (report.test_mse > report.test_mae) {
    return bad("test MSE " + num(report.test_mse) + " exceeds test MAE " +
               num(report.test_mae));
  }
  return ok("overfit MSE " + num(final_mse) + "; holdout MAE " + num(report.test_mae) +
            ", MSE " + num(report.test_mse));
}

Outcome criterion_7_preprocessing() {
  // Scaler: invert(apply(x)) = x within 1e-12 on non-constant features.
  Rng rng(77);
  MatrixXd rows(40, features::kFeatureWidth);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) rows(r, c) = rng.uniform(-7, 13);
  }
  features::ScalerParams scaler = features::fit_scaler(rows);
  const double gap = (scaler.invert(scaler.apply(rows)) - rows).cwiseAbs().maxCoeff();
  if (gap >= 1e-12) return bad("scaler round-trip off by " + num(gap));

  // Binary codes: the eight-condition vocabulary maps to 0001 .. 1000.
  const std::vector<std::string> vocabulary =
      synth::default_bim(synth::default_scene_spec()).vocabulary();
  if (vocabulary.size() != 8) {
    return bad("fixture vocabulary has " + std::to_string(vocabulary.size()) + " terms");
  }
  std::set<std::array<int, 4>> seen;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    const auto code = features::encode_material_condition(vocabulary[i], vocabulary);
    const int value = code[0] * 8 + code[1] * 4 + code[2] * 2 + code[3];
    if (value != static_cast<int>(i) + 1) {
      return bad("\"" + vocabulary[i] + "\" encoded as " + std::to_string(value) +
                 ", expected " + std::to_string(i + 1));
    }
    seen.insert(code);
  }
  if (seen.size() != 8) return bad("binary codes are not injective");

  // Date decomposition on fixture-period dates.
  const auto feb = features::decompose_date(Date(2022, 2, 2));
  const auto jun = features::decompose_date(Date(2022, 6, 8));
  const auto jul = features::decompose_date(Date(2022, 7, 18));
  if (feb.day_of_month != 2 || feb.month != 2 || feb.year != 2022 ||
      jun.day_of_month != 8 || jun.month != 6 || jun.year != 2022 ||
      jul.day_of_month != 18 || jul.month != 7 || jul.year != 2022) {
    return bad("date decomposition mismatch");
  }
  return ok("scaler gap " + num(gap) + "; codes 0001..1000 injective; dates decompose");
}

// Shared CLI-project state built by criterion 9 and reused by criterion 8.
struct CliProject {
  TempDir dir;
  fs::path binary;
  bool ready = false;

  int run(const std::string& args) const {
    const std::string command = "cd \"" + dir.path.string() + "\" && \"" +
                                binary.string() + "\" --config run.conf " + args +
                                " >> cli.log 2>&1";
    const int rc = std::system(command.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string slurp(const std::string& name) const {
    return lookplan::read_text_file(dir.file(name));
  }
};

Outcome criterion_9_end_to_end(CliProject& project) {
  lookplan::write_text_file(project.dir.file("run.conf"),
                            "paths.bim = bim.json\n"
                            "paths.observations = observations.csv\n"
                            "paths.scans_dir = scans\n"
                            "paths.metrics_log = metrics.csv\n"
                            "paths.checkpoint = checkpoint.json\n"
                            "paths.output_dir = out\n"
                            "geometry.transform = 1 0 0 0 1 0 0 0 1 0 0 0\n"
                            "train.units = 16\n"
                            "train.epochs = 8\n"
                            "train.batch_size = 8\n"
                            "train.seed = 42\n"
                            "train.grid_learning_rates = 0.001 0.01\n"
                            "train.grid_units = 16\n");

  if (int rc = project.run("synth"); rc != 0) {
    return bad("synth exited with " + std::to_string(rc));
  }
  for (const Date& date : synth::default_scan_dates()) {
    const std::string args =
        "ingest-scan --scan scans/scan_" + date.iso() + ".xyz --date " + date.iso();
    if (int rc = project.run(args); rc != 0) {
      return bad("ingest-scan " + date.iso() + " exited with " + std::to_string(rc));
    }
  }
  if (int rc = project.run("build-features"); rc != 0) {
    return bad("build-features exited with " + std::to_string(rc));
  }
  if (int rc = project.run("--fixed-clock train"); rc != 0) {
    return bad("train exited with " + std::to_string(rc));
  }
  if (int rc = project.run("--fixed-clock forecast"); rc != 0) {
    return bad("forecast exited with " + std::to_string(rc));
  }

  lookplan::lookahead::LookaheadPlan plan =
      lookplan::lookahead::read_plan_json(project.dir.file("out/plan.json"));
  std::map<std::string, int> bands_per_task;
  for (const auto& band : plan.bands) {
    if (!(0.0 <= band.lower && band.lower <= band.median && band.median <= band.upper &&
          band.upper <= 100.0)) {
      return bad("band " + band.task_id + " " + band.date.iso() + " violates 0 <= " +
                 num(band.lower) + " <= " + num(band.median) + " <= " + num(band.upper) +
                 " <= 100");
    }
    bands_per_task[band.task_id] += 1;
  }
  if (bands_per_task.size() != 8) {
    return bad("plan covers " + std::to_string(bands_per_task.size()) + " tasks, not 8");
  }
  for (const auto& [task_id, count] : bands_per_task) {
    if (count != 18) {
      return bad("task " + task_id + " has " + std::to_string(count) + " bands, not 18");
    }
  }
  project.ready = true;
  return ok("synth -> ingest x7 -> build-features -> train -> forecast; " +
            std::to_string(plan.bands.size()) + " ordered bands across 8 tasks");
}

Outcome criterion_8_determinism(CliProject& project) {
  if (!project.ready) return bad("skipped: the end-to-end pipeline did not complete");

  const std::string checkpoint = project.slurp("checkpoint.json");
  const std::string report = project.slurp("out/train_report.json");
  const std::string plan = project.slurp("out/plan.json");
  const std::string plan_csv = project.slurp("out/plan.csv");

  if (int rc = project.run("--fixed-clock train"); rc != 0) {
    return bad("train rerun exited with " + std::to_string(rc));
  }
  if (project.slurp("checkpoint.json") != checkpoint) {
    return bad("checkpoint.json changed between identical train runs");
  }
  if (project.slurp("out/train_report.json") != report) {
    return bad("train_report.json changed between identical train runs");
  }

  if (int rc = project.run("--fixed-clock forecast"); rc != 0) {
    return bad("forecast rerun exited with " + std::to_string(rc));
  }
  if (project.slurp("out/plan.json") != plan || project.slurp("out/plan.csv") != plan_csv) {
    return bad("plan outputs changed between identical forecast runs");
  }

  if (int rc = project.run("--fixed-clock grid-search"); rc != 0) {
    return bad("grid-search exited with " + std::to_string(rc));
  }
  const std::string grid = project.slurp("out/grid_report.json");
  if (int rc = project.run("--fixed-clock grid-search"); rc != 0) {
    return bad("grid-search rerun exited with " + std::to_string(rc));
  }
  if (project.slurp("out/grid_report.json") != grid) {
    return bad("grid_report.json changed between identical grid-search runs");
  }
  nlohmann::json grid_doc = nlohmann::json::parse(grid);
  return ok("train, forecast, and grid-search reruns byte-identical; grid best units " +
            grid_doc["best"]["units"].dump());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
    return 2;
  }
  const fs::path binary = fs::absolute(argv[1]);
  if (!fs::exists(binary)) {
    std::fprintf(stderr, "CLI binary not found: %s\n", binary.string().c_str());
    return 2;
  }

  features::Dataset dataset = default_fixture_dataset();
  CliProject project;
  project.binary = binary;

  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "parameter count matches the production architecture",
       [] { return criterion_1_param_count(); }},
      {2, "error band fixtures reproduce to 0.01",
       [] { return criterion_2_error_bands(); }},
      {3, "analytic gradients match central finite differences",
       [] { return criterion_3_gradients(); }},
      {4, "geometry stack reproduces 50 seeded scene ground truths",
       [] { return criterion_4_geometry_oracle(); }},
      {5, "registration recovers 100 random rigid transforms",
       [] { return criterion_5_registration(); }},
      {6, "training overfits a tiny set and generalizes on the fixture",
       [&] { return criterion_6_training(dataset); }},
      {7, "preprocessing round-trips, codes, and dates are exact",
       [] { return criterion_7_preprocessing(); }},
      {9, "CLI pipeline completes with a well-formed plan",
       [&] { return criterion_9_end_to_end(project); }},
      {8, "seeded runs are byte-identical under a fixed clock",
       [&] { return criterion_8_determinism(project); }},
  };

  std::vector<std::string> lines(criteria.size() + 1);
  bool all_pass = true;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.check();
    } catch (const std::exception& e) {
      outcome = bad(std::string("unexpected exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[512];
    std::snprintf(line, sizeof line, "%s criterion %d: %s — %s [%.1fs]",
                  outcome.pass ? "PASS" : "FAIL", criterion.number, criterion.name,
                  outcome.detail.c_str(), seconds);
    lines[std::size_t(criterion.number)] = line;
    all_pass = all_pass && outcome.pass;
  }
  for (std::size_t i = 1; i < lines.size(); ++i) std::printf("%s\n", lines[i].c_str());
  std::printf("%s\n", all_pass ? "acceptance: all criteria passed"
                               : "acceptance: FAILURES above");
  return all_pass ? 0 : 1;
}
