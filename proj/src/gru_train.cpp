#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "lookplan/errors.hpp"
#include "lookplan/gru.hpp"
#include "lookplan/rng.hpp"

namespace lookplan::gru {

namespace {

using features::FeatureWindow;

// Holds first/second moment estimates per tensor; plain SGD keeps no state.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, GruSeq2SeqParams& params)
      : config_(config), refs_(tensor_refs(params)), adam_(config.optimizer == "adam") {
    if (adam_) {
      for (const auto& ref : refs_) {
        m_.emplace_back(Eigen::VectorXd::Zero(ref.size));
        v_.emplace_back(Eigen::VectorXd::Zero(ref.size));
      }
    }
  }

  void apply(GruSeq2SeqParams& grads) {
    const std::vector<TensorRef> grad_refs = tensor_refs(grads);
    ++step_;
    const double lr = config_.learning_rate;
    if (!adam_) {
      for (std::size_t i = 0; i < refs_.size(); ++i) {
        Eigen::Map<Eigen::VectorXd>(refs_[i].data, refs_[i].size) -=
            lr * Eigen::Map<const Eigen::VectorXd>(grad_refs[i].data, grad_refs[i].size);
      }
      return;
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      Eigen::Map<Eigen::VectorXd> param(refs_[i].data, refs_[i].size);
      Eigen::Map<const Eigen::VectorXd> grad(grad_refs[i].data, grad_refs[i].size);
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad;
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
      param.array() -=
          lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.epsilon);
    }
  }

 private:
  const TrainConfig& config_;
  std::vector<TensorRef> refs_;
  bool adam_;
  long step_ = 0;
  std::vector<Eigen::VectorXd> m_;
  std::vector<Eigen::VectorXd> v_;
};

void assemble_batch(const std::vector<FeatureWindow>& windows,
                    const std::vector<std::size_t>& order, std::size_t start,
                    std::size_t count, std::vector<Eigen::MatrixXd>& inputs,
                    Eigen::MatrixXd& targets) {
  inputs.clear();
  inputs.reserve(count);
  targets.resize(static_cast<Eigen::Index>(count), windows.front().targets.size());
  for (std::size_t b = 0; b < count; ++b) {
    const FeatureWindow& w = windows[order[start + b]];
    inputs.push_back(w.inputs);
    targets.row(static_cast<Eigen::Index>(b)) = w.targets.transpose();
  }
}

struct EvalMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

EvalMetrics evaluate(const GruSeq2SeqParams& p, const std::vector<FeatureWindow>& windows) {
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Eigen::MatrixXd> inputs;
  Eigen::MatrixXd targets;
  assemble_batch(windows, order, 0, windows.size(), inputs, targets);
  const Eigen::MatrixXd pred = forward(p, inputs);
  return {loss_mse(pred, targets), metric_mae(pred, targets)};
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0, ErrorCode::InvalidTrainConfig,
          "learning_rate must be positive");
  require(epochs >= 1, ErrorCode::InvalidTrainConfig, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::InvalidTrainConfig, "batch_size must be >= 1");
  require(units >= 1, ErrorCode::InvalidTrainConfig, "units must be >= 1");
  require(optimizer == "adam" || optimizer == "sgd", ErrorCode::InvalidTrainConfig,
          "optimizer must be adam or sgd, got \"" + optimizer + "\"");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          ErrorCode::InvalidTrainConfig, "moment decay rates must lie in [0,1)");
  require(epsilon > 0.0, ErrorCode::InvalidTrainConfig, "epsilon must be positive");
}

TrainReport train(GruSeq2SeqParams& p, const DatasetSplit& split,
                  const TrainConfig& config) {
  config.validate();
  require(!split.train.empty() && !split.validation.empty(),
          ErrorCode::InsufficientWindows,
          "training needs non-empty train and validation splits");
  for (const auto& w : split.train) {
    require(w.inputs.cols() == p.input_width(), ErrorCode::ShapeMismatch,
            "window width " + std::to_string(w.inputs.cols()) +
                " does not match the model input width " +
                std::to_string(p.input_width()));
  }

  const auto started = std::chrono::steady_clock::now();
  TrainReport report;
  report.seed = config.seed;
  report.config = config;

  Rng rng(config.seed);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Optimizer optimizer(config, p);

  std::vector<Eigen::MatrixXd> inputs;
  Eigen::MatrixXd targets;
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);

    double squared_sum = 0.0;
    double absolute_sum = 0.0;
    long elements = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - start);
      assemble_batch(split.train, order, start, count, inputs, targets);

      ForwardCache cache;
      const Eigen::MatrixXd pred = forward(p, inputs, &cache);
      const Eigen::MatrixXd diff = pred - targets;
      const double batch_squared = diff.array().square().sum();
      require(std::isfinite(batch_squared), ErrorCode::Diverged,
              "training loss became non-finite in epoch " + std::to_string(epoch + 1));
      squared_sum += batch_squared;
      absolute_sum += diff.array().abs().sum();
      elements += diff.size();

      // d(mean squared error)/d(pred) for this batch's mean.
      const Eigen::MatrixXd d_pred = (2.0 / static_cast<double>(diff.size())) * diff;
      GruSeq2SeqParams grads = backward(p, cache, d_pred);
      optimizer.apply(grads);
    }

    EpochMetrics metrics;
    metrics.train_mse = squared_sum / static_cast<double>(elements);
    metrics.train_mae = absolute_sum / static_cast<double>(elements);
    const EvalMetrics val = evaluate(p, split.validation);
    require(std::isfinite(val.mse), ErrorCode::Diverged,
            "validation loss became non-finite in epoch " + std::to_string(epoch + 1));
    metrics.val_mse = val.mse;
    metrics.val_mae = val.mae;
    report.epochs.push_back(metrics);
  }

  if (!split.test.empty()) {
    const EvalMetrics test = evaluate(p, split.test);
    report.test_mse = test.mse;
    report.test_mae = test.mae;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

GridResult grid_search(const DatasetSplit& split, const TrainConfig& base,
                       Eigen::Index input_width) {
  base.validate();
  require(!base.grid_learning_rates.empty() && !base.grid_units.empty(),
          ErrorCode::EmptyGrid, "grid search needs learning rates and unit counts");

  GridResult result;
  std::uint64_t cell_index = 0;
  for (const double lr : base.grid_learning_rates) {
    for (const int units : base.grid_units) {
      TrainConfig config = base;
      config.learning_rate = lr;
      config.units = units;
      config.seed = Rng::derive(base.seed, cell_index);

      GridCell cell;
      cell.learning_rate = lr;
      cell.units = units;
      GruSeq2SeqParams params = init_params(config.seed, units, input_width);
      cell.report = train(params, split, config);
      result.cells.push_back(std::move(cell));
      ++cell_index;
    }
  }

  std::size_t best = 0;
  auto key = [&](std::size_t i) {
    const TrainReport& r = result.cells[i].report;
    return std::make_tuple(r.epochs.back().val_mae, r.epochs.back().val_mse,
                           result.cells[i].units);
  };
  for (std::size_t i = 1; i < result.cells.size(); ++i) {
    if (key(i) < key(best)) best = i;
  }
  result.best_index = best;
  result.best_learning_rate = result.cells[best].learning_rate;
  result.best_units = result.cells[best].units;
  return result;
}

Eigen::VectorXd predict_horizon(const GruSeq2SeqParams& p,
                                const Eigen::MatrixXd& latest_window,
                                const ScalerParams& scaler) {
  require(scaler.min_v.size() == p.input_width(), ErrorCode::ShapeMismatch,
          "scaler tracks " + std::to_string(scaler.min_v.size()) +
              " features, the model expects " + std::to_string(p.input_width()));
  const Eigen::MatrixXd pred = forward(p, {latest_window});
  Eigen::VectorXd pct(pred.cols());
  for (Eigen::Index t = 0; t < pred.cols(); ++t) {
    pct(t) = std::clamp(scaler.invert_one(features::kPctFeature, pred(0, t)), 0.0, 100.0);
  }
  return pct;
}

std::string report_to_json(const TrainReport& report) {
  nlohmann::ordered_json doc;
  doc["seed"] = report.seed;
  doc["wall_seconds"] = report.wall_seconds;
  doc["config"] = {
      {"learning_rate", report.config.learning_rate},
      {"epochs", report.config.epochs},
      {"batch_size", report.config.batch_size},
      {"units", report.config.units},
      {"optimizer", report.config.optimizer},
      {"beta1", report.config.beta1},
      {"beta2", report.config.beta2},
      {"epsilon", report.config.epsilon},
      {"grid_learning_rates", report.config.grid_learning_rates},
      {"grid_units", report.config.grid_units},
  };
  doc["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : report.epochs) {
    doc["epochs"].push_back({{"train_mse", e.train_mse},
                             {"train_mae", e.train_mae},
                             {"val_mse", e.val_mse},
                             {"val_mae", e.val_mae}});
  }
  doc["test_mse"] = report.test_mse;
  doc["test_mae"] = report.test_mae;
  return doc.dump(2) + "\n";
}

}  // namespace lookplan::gru
