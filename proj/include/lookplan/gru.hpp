#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lookplan/features.hpp"

namespace lookplan::gru {

using features::DatasetSplit;
using features::ScalerParams;

// One GRU direction. The three gate blocks of every kernel are laid out
// side by side as [update z | reset r | candidate h], so W is d x 3u and the
// recurrent kernel is u x 3u. Input and recurrent additions carry separate
// biases; the candidate's recurrent term is gated after the matrix product:
//   z = sigmoid(x W_z + b_in,z + h U_z + b_rec,z)
//   r = sigmoid(x W_r + b_in,r + h U_r + b_rec,r)
//   hc = tanh(x W_h + b_in,h + r (.) (h U_h + b_rec,h))
//   h' = z (.) h + (1 - z) (.) hc
struct GruDirectionParams {
  Eigen::MatrixXd w_in;      // d x 3u
  Eigen::MatrixXd u_rec;     // u x 3u
  Eigen::RowVectorXd b_in;   // 3u
  Eigen::RowVectorXd b_rec;  // 3u

  Eigen::Index units() const { return u_rec.rows(); }
  Eigen::Index input_width() const { return w_in.rows(); }
};

// Bidirectional encoder -> repeated context -> bidirectional decoder ->
// per-timestep affine head with linear activation.
struct GruSeq2SeqParams {
  GruDirectionParams encoder_fw;
  GruDirectionParams encoder_bw;
  GruDirectionParams decoder_fw;  // input width 2u (the repeated context)
  GruDirectionParams decoder_bw;
  Eigen::VectorXd dense_w;        // 2u
  double dense_b = 0.0;

  Eigen::Index units() const { return encoder_fw.units(); }
  Eigen::Index input_width() const { return encoder_fw.input_width(); }
};

// Named view over one parameter tensor, shared by the optimizer, the
// serializer, and the finite-difference harness.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index size;
};
std::vector<TensorRef> tensor_refs(GruSeq2SeqParams& p);

struct ParamCount {
  long encoder = 0;
  long decoder = 0;
  long dense = 0;
  long total = 0;
};
ParamCount param_count(const GruSeq2SeqParams& p);

GruSeq2SeqParams init_params(std::uint64_t seed, Eigen::Index units,
                             Eigen::Index input_width);

Eigen::VectorXd gru_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                              const GruDirectionParams& p);

// Per-direction activations saved in processing order for reuse by backward.
struct DirectionCache {
  bool reversed = false;
  std::vector<Eigen::MatrixXd> x;       // B x d input of each step
  std::vector<Eigen::MatrixXd> h_prev;  // B x u
  std::vector<Eigen::MatrixXd> z, r, rc, hc, h;
};

struct ForwardCache {
  DirectionCache enc_fw, enc_bw, dec_fw, dec_bw;
  Eigen::MatrixXd context;      // B x 2u
  Eigen::MatrixXd predictions;  // B x T
  Eigen::Index batch = 0;
  Eigen::Index horizon = 0;
};

// batch: one T x d matrix per sample; returns B x T predictions. Pass a cache
// to keep the intermediates backward needs.
Eigen::MatrixXd forward(const GruSeq2SeqParams& p,
                        const std::vector<Eigen::MatrixXd>& batch,
                        ForwardCache* cache = nullptr);

double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
double metric_mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

// Reverse-mode gradients for the upstream d(loss)/d(predictions); shapes
// mirror the parameter struct.
GruSeq2SeqParams backward(const GruSeq2SeqParams& p, const ForwardCache& cache,
                          const Eigen::MatrixXd& d_pred);

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 100;
  int batch_size = 8;
  std::uint64_t seed = 42;
  int units = 64;
  std::string optimizer = "adam";  // adam | sgd
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::vector<double> grid_learning_rates = {0.001, 0.01};
  std::vector<int> grid_units = {32, 64};

  void validate() const;
};

struct EpochMetrics {
  double train_mse = 0.0;
  double train_mae = 0.0;
  double val_mse = 0.0;
  double val_mae = 0.0;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  double test_mse = 0.0;
  double test_mae = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  TrainConfig config;
};

// Mini-batch gradient descent over the training split; per-epoch metrics are
// batch-size-weighted pre-update training losses plus a full validation pass.
TrainReport train(GruSeq2SeqParams& p, const DatasetSplit& split,
                  const TrainConfig& config);

struct GridCell {
  double learning_rate = 0.0;
  int units = 0;
  TrainReport report;
};

struct GridResult {
  double best_learning_rate = 0.0;
  int best_units = 0;
  std::size_t best_index = 0;
  std::vector<GridCell> cells;
};

// One independent training run per (learning_rate, units) candidate; the
// winner minimizes final validation MAE, then MSE, then unit count.
GridResult grid_search(const DatasetSplit& split, const TrainConfig& base,
                       Eigen::Index input_width);

// Forward on the trailing window, inverse-scale the pct channel, clamp.
Eigen::VectorXd predict_horizon(const GruSeq2SeqParams& p,
                                const Eigen::MatrixXd& latest_window,
                                const ScalerParams& scaler);

// Stamped into every checkpoint so a file built for a different feature
// layout is rejected instead of silently misread.
inline constexpr const char* kFeatureOrderTag =
    "code3,code2,code1,code0,pct,closeness_x,closeness_y,closeness_z,"
    "utilization_extent,day,month,year";

struct Checkpoint {
  GruSeq2SeqParams params;
  ScalerParams scaler;
  int window = 0;
};

void save_checkpoint(const std::filesystem::path& path, const GruSeq2SeqParams& params,
                     const ScalerParams& scaler, int window);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string report_to_json(const TrainReport& report);

}  // namespace lookplan::gru
