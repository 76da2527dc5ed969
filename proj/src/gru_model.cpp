#include "lookplan/gru.hpp"

#include <Eigen/QR>
#include <cmath>

#include <json.hpp>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"
#include "lookplan/rng.hpp"

namespace lookplan::gru {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// Coefficients are drawn row by row so initialization is reproducible
// independent of Eigen's storage order.
void fill_glorot_uniform(Eigen::MatrixXd& m, Rng& rng, Eigen::Index fan_in,
                         Eigen::Index fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
  }
}

Eigen::MatrixXd orthogonal_square(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) gaussian(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

GruDirectionParams init_direction(Rng& rng, Eigen::Index units, Eigen::Index width) {
  GruDirectionParams p;
  p.w_in.resize(width, 3 * units);
  fill_glorot_uniform(p.w_in, rng, width, 3 * units);
  p.u_rec.resize(units, 3 * units);
  for (int gate = 0; gate < 3; ++gate) {
    p.u_rec.middleCols(gate * units, units) = orthogonal_square(rng, units);
  }
  p.b_in = Eigen::RowVectorXd::Zero(3 * units);
  p.b_rec = Eigen::RowVectorXd::Zero(3 * units);
  return p;
}

GruDirectionParams zeros_like(const GruDirectionParams& p) {
  GruDirectionParams z;
  z.w_in = Eigen::MatrixXd::Zero(p.w_in.rows(), p.w_in.cols());
  z.u_rec = Eigen::MatrixXd::Zero(p.u_rec.rows(), p.u_rec.cols());
  z.b_in = Eigen::RowVectorXd::Zero(p.b_in.size());
  z.b_rec = Eigen::RowVectorXd::Zero(p.b_rec.size());
  return z;
}

struct StepActivations {
  Eigen::MatrixXd z, r, rc, hc, h;
};

StepActivations direction_step(const GruDirectionParams& p, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& h_prev) {
  const Eigen::Index u = p.units();
  const Eigen::MatrixXd a_in = (x * p.w_in).rowwise() + p.b_in;
  const Eigen::MatrixXd a_rec = (h_prev * p.u_rec).rowwise() + p.b_rec;

  StepActivations s;
  s.z = sigmoid(a_in.leftCols(u) + a_rec.leftCols(u));
  s.r = sigmoid(a_in.middleCols(u, u) + a_rec.middleCols(u, u));
  s.rc = a_rec.rightCols(u);
  s.hc = (a_in.rightCols(u) + s.r.cwiseProduct(s.rc)).array().tanh().matrix();
  s.h = s.z.cwiseProduct(h_prev) +
        (Eigen::MatrixXd::Ones(s.z.rows(), s.z.cols()) - s.z).cwiseProduct(s.hc);
  return s;
}

// Runs one direction over the whole sequence. `steps` is indexed by original
// time; a reversed direction consumes it back to front. The cache stays in
// processing order.
DirectionCache run_direction(const GruDirectionParams& p,
                             const std::vector<Eigen::MatrixXd>& steps, bool reversed) {
  const std::size_t horizon = steps.size();
  const Eigen::Index batch = steps.front().rows();

  DirectionCache cache;
  cache.reversed = reversed;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(batch, p.units());
  for (std::size_t i = 0; i < horizon; ++i) {
    const std::size_t original = reversed ? horizon - 1 - i : i;
    StepActivations s = direction_step(p, steps[original], h);
    cache.x.push_back(steps[original]);
    cache.h_prev.push_back(std::move(h));
    h = s.h;
    cache.z.push_back(std::move(s.z));
    cache.r.push_back(std::move(s.r));
    cache.rc.push_back(std::move(s.rc));
    cache.hc.push_back(std::move(s.hc));
    cache.h.push_back(h);
  }
  return cache;
}

// The direction's hidden state at an original time index.
const Eigen::MatrixXd& state_at(const DirectionCache& cache, std::size_t original) {
  return cache.reversed ? cache.h[cache.h.size() - 1 - original] : cache.h[original];
}

// BPTT over one direction. d_out holds per-original-step gradients on the
// emitted states (empty when only the final state feeds downstream);
// d_final seeds the last processed state. Fills dx (original order) when a
// gradient with respect to the inputs is needed.
void direction_backward(const GruDirectionParams& p, const DirectionCache& cache,
                        const std::vector<Eigen::MatrixXd>& d_out,
                        const Eigen::MatrixXd& d_final, GruDirectionParams& grad,
                        std::vector<Eigen::MatrixXd>* dx) {
  const std::size_t horizon = cache.x.size();
  const Eigen::Index batch = cache.x.front().rows();
  const Eigen::Index u = p.units();

  Eigen::MatrixXd dh = d_final.size() > 0 ? d_final : Eigen::MatrixXd::Zero(batch, u);
  Eigen::MatrixXd da(batch, 3 * u);
  for (std::size_t i = horizon; i-- > 0;) {
    const std::size_t original = cache.reversed ? horizon - 1 - i : i;
    if (!d_out.empty()) dh += d_out[original];

    const Eigen::MatrixXd& z = cache.z[i];
    const Eigen::MatrixXd& r = cache.r[i];
    const Eigen::MatrixXd& rc = cache.rc[i];
    const Eigen::MatrixXd& hc = cache.hc[i];
    const Eigen::MatrixXd& h_prev = cache.h_prev[i];

    const Eigen::MatrixXd dz =
        dh.cwiseProduct(h_prev - hc).cwiseProduct(z).cwiseProduct(
            (1.0 - z.array()).matrix());
    const Eigen::MatrixXd dhc =
        dh.cwiseProduct((1.0 - z.array()).matrix());
    const Eigen::MatrixXd da_h =
        dhc.cwiseProduct((1.0 - hc.array().square()).matrix());
    const Eigen::MatrixXd drc = da_h.cwiseProduct(r);
    const Eigen::MatrixXd dr = da_h.cwiseProduct(rc).cwiseProduct(r).cwiseProduct(
        (1.0 - r.array()).matrix());

    da.leftCols(u) = dz;
    da.middleCols(u, u) = dr;
    da.rightCols(u) = da_h;  // gradient on the input-side candidate block
    grad.w_in.noalias() += cache.x[i].transpose() * da;
    grad.b_in += da.colwise().sum();
    if (dx != nullptr) (*dx)[original] = da * p.w_in.transpose();

    da.rightCols(u) = drc;  // recurrent-side candidate block is gated by r
    grad.u_rec.noalias() += h_prev.transpose() * da;
    grad.b_rec += da.colwise().sum();

    dh = dh.cwiseProduct(z) + da * p.u_rec.transpose();
  }
}

long direction_size(const GruDirectionParams& p) {
  return static_cast<long>(p.w_in.size() + p.u_rec.size() + p.b_in.size() +
                           p.b_rec.size());
}

void append_refs(std::vector<TensorRef>& refs, GruDirectionParams& p,
                 const std::string& prefix) {
  refs.push_back({prefix + ".w_in", p.w_in.data(), p.w_in.size()});
  refs.push_back({prefix + ".u_rec", p.u_rec.data(), p.u_rec.size()});
  refs.push_back({prefix + ".b_in", p.b_in.data(), p.b_in.size()});
  refs.push_back({prefix + ".b_rec", p.b_rec.data(), p.b_rec.size()});
}

}  // namespace

std::vector<TensorRef> tensor_refs(GruSeq2SeqParams& p) {
  std::vector<TensorRef> refs;
  append_refs(refs, p.encoder_fw, "encoder_fw");
  append_refs(refs, p.encoder_bw, "encoder_bw");
  append_refs(refs, p.decoder_fw, "decoder_fw");
  append_refs(refs, p.decoder_bw, "decoder_bw");
  refs.push_back({"dense.w", p.dense_w.data(), p.dense_w.size()});
  refs.push_back({"dense.b", &p.dense_b, 1});
  return refs;
}

ParamCount param_count(const GruSeq2SeqParams& p) {
  ParamCount count;
  count.encoder = direction_size(p.encoder_fw) + direction_size(p.encoder_bw);
  count.decoder = direction_size(p.decoder_fw) + direction_size(p.decoder_bw);
  count.dense = static_cast<long>(p.dense_w.size()) + 1;
  count.total = count.encoder + count.decoder + count.dense;
  return count;
}

GruSeq2SeqParams init_params(std::uint64_t seed, Eigen::Index units,
                             Eigen::Index input_width) {
  require(units >= 1, ErrorCode::InvalidTrainConfig, "units must be >= 1");
  require(input_width >= 1, ErrorCode::InvalidTrainConfig, "input width must be >= 1");

  Rng rng(seed);
  GruSeq2SeqParams p;
  p.encoder_fw = init_direction(rng, units, input_width);
  p.encoder_bw = init_direction(rng, units, input_width);
  p.decoder_fw = init_direction(rng, units, 2 * units);
  p.decoder_bw = init_direction(rng, units, 2 * units);
  p.dense_w.resize(2 * units);
  const double limit = std::sqrt(6.0 / static_cast<double>(2 * units + 1));
  for (Eigen::Index i = 0; i < p.dense_w.size(); ++i) {
    p.dense_w(i) = rng.uniform(-limit, limit);
  }
  p.dense_b = 0.0;
  return p;
}

Eigen::VectorXd gru_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                              const GruDirectionParams& p) {
  require(x.size() == p.input_width(), ErrorCode::ShapeMismatch,
          "input has " + std::to_string(x.size()) + " features, kernel expects " +
              std::to_string(p.input_width()));
  require(h_prev.size() == p.units(), ErrorCode::ShapeMismatch,
          "state has " + std::to_string(h_prev.size()) + " units, kernel expects " +
              std::to_string(p.units()));
  const StepActivations s = direction_step(p, x.transpose(), h_prev.transpose());
  return s.h.row(0).transpose();
}

Eigen::MatrixXd forward(const GruSeq2SeqParams& p,
                        const std::vector<Eigen::MatrixXd>& batch, ForwardCache* cache) {
  require(!batch.empty(), ErrorCode::ShapeMismatch, "empty batch");
  const Eigen::Index horizon = batch.front().rows();
  const Eigen::Index width = p.input_width();
  const Eigen::Index batch_n = static_cast<Eigen::Index>(batch.size());
  require(horizon >= 1, ErrorCode::ShapeMismatch, "empty input sequence");
  for (const auto& sample : batch) {
    require(sample.rows() == horizon && sample.cols() == width, ErrorCode::ShapeMismatch,
            "every sample must be " + std::to_string(horizon) + "x" +
                std::to_string(width));
  }

  // Original-order timestep matrices, samples stacked along the rows.
  std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(horizon));
  for (Eigen::Index t = 0; t < horizon; ++t) {
    Eigen::MatrixXd step(batch_n, width);
    for (Eigen::Index b = 0; b < batch_n; ++b) {
      step.row(b) = batch[static_cast<std::size_t>(b)].row(t);
    }
    steps[static_cast<std::size_t>(t)] = std::move(step);
  }

  DirectionCache enc_fw = run_direction(p.encoder_fw, steps, false);
  DirectionCache enc_bw = run_direction(p.encoder_bw, steps, true);

  const Eigen::Index u = p.units();
  Eigen::MatrixXd context(batch_n, 2 * u);
  context.leftCols(u) = enc_fw.h.back();
  context.rightCols(u) = enc_bw.h.back();

  // Repeat-vector stage: the decoder sees the context at every timestep.
  const std::vector<Eigen::MatrixXd> dec_steps(static_cast<std::size_t>(horizon),
                                               context);
  DirectionCache dec_fw = run_direction(p.decoder_fw, dec_steps, false);
  DirectionCache dec_bw = run_direction(p.decoder_bw, dec_steps, true);

  Eigen::MatrixXd predictions(batch_n, horizon);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const std::size_t original = static_cast<std::size_t>(t);
    predictions.col(t) =
        state_at(dec_fw, original) * p.dense_w.head(u) +
        state_at(dec_bw, original) * p.dense_w.tail(u) +
        Eigen::VectorXd::Constant(batch_n, p.dense_b);
  }

  if (cache != nullptr) {
    cache->enc_fw = std::move(enc_fw);
    cache->enc_bw = std::move(enc_bw);
    cache->dec_fw = std::move(dec_fw);
    cache->dec_bw = std::move(dec_bw);
    cache->context = std::move(context);
    cache->predictions = predictions;
    cache->batch = batch_n;
    cache->horizon = horizon;
  }
  return predictions;
}

double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(),
          ErrorCode::ShapeMismatch, "prediction and target shapes differ");
  return (pred - target).array().square().mean();
}

double metric_mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(),
          ErrorCode::ShapeMismatch, "prediction and target shapes differ");
  return (pred - target).array().abs().mean();
}

GruSeq2SeqParams backward(const GruSeq2SeqParams& p, const ForwardCache& cache,
                          const Eigen::MatrixXd& d_pred) {
  require(cache.batch > 0 && !cache.enc_fw.x.empty(), ErrorCode::StaleCache,
          "backward called without a forward cache");
  require(cache.enc_fw.x.front().cols() == p.input_width() &&
              cache.enc_fw.h.front().cols() == p.units(),
          ErrorCode::StaleCache, "cache was produced by a different model shape");
  require(d_pred.rows() == cache.batch && d_pred.cols() == cache.horizon,
          ErrorCode::ShapeMismatch, "upstream gradient shape mismatch");

  const Eigen::Index u = p.units();
  const std::size_t horizon = static_cast<std::size_t>(cache.horizon);

  GruSeq2SeqParams g;
  g.encoder_fw = zeros_like(p.encoder_fw);
  g.encoder_bw = zeros_like(p.encoder_bw);
  g.decoder_fw = zeros_like(p.decoder_fw);
  g.decoder_bw = zeros_like(p.decoder_bw);
  g.dense_w = Eigen::VectorXd::Zero(p.dense_w.size());
  g.dense_b = 0.0;

  // Output head, then its gradient fans out to both decoder directions.
  std::vector<Eigen::MatrixXd> d_dec_fw(horizon), d_dec_bw(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Eigen::VectorXd dy = d_pred.col(static_cast<Eigen::Index>(t));
    const Eigen::MatrixXd& h_fw = state_at(cache.dec_fw, t);
    const Eigen::MatrixXd& h_bw = state_at(cache.dec_bw, t);
    g.dense_w.head(u).noalias() += h_fw.transpose() * dy;
    g.dense_w.tail(u).noalias() += h_bw.transpose() * dy;
    g.dense_b += dy.sum();
    d_dec_fw[t] = dy * p.dense_w.head(u).transpose();
    d_dec_bw[t] = dy * p.dense_w.tail(u).transpose();
  }

  const Eigen::MatrixXd no_final;
  std::vector<Eigen::MatrixXd> dx_fw(horizon), dx_bw(horizon);
  direction_backward(p.decoder_fw, cache.dec_fw, d_dec_fw, no_final, g.decoder_fw,
                     &dx_fw);
  direction_backward(p.decoder_bw, cache.dec_bw, d_dec_bw, no_final, g.decoder_bw,
                     &dx_bw);

  // Every decoder step consumed the same repeated context.
  Eigen::MatrixXd d_context = Eigen::MatrixXd::Zero(cache.batch, 2 * u);
  for (std::size_t t = 0; t < horizon; ++t) d_context += dx_fw[t] + dx_bw[t];

  const std::vector<Eigen::MatrixXd> no_out;
  direction_backward(p.encoder_fw, cache.enc_fw, no_out, d_context.leftCols(u),
                     g.encoder_fw, nullptr);
  direction_backward(p.encoder_bw, cache.enc_bw, no_out, d_context.rightCols(u),
                     g.encoder_bw, nullptr);
  return g;
}

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json entry;
  entry["shape"] = {m.rows(), m.cols()};
  ordered_json data = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  entry["data"] = std::move(data);
  return entry;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& entry, const std::string& name) {
  require(entry.contains("shape") && entry.contains("data"), ErrorCode::SchemaViolation,
          "checkpoint tensor \"" + name + "\" lacks shape/data");
  const auto& shape = entry["shape"];
  require(shape.is_array() && shape.size() == 2, ErrorCode::SchemaViolation,
          "checkpoint tensor \"" + name + "\" has a malformed shape");
  const Eigen::Index rows = shape[0].get<Eigen::Index>();
  const Eigen::Index cols = shape[1].get<Eigen::Index>();
  const auto& data = entry["data"];
  require(data.is_array() && static_cast<Eigen::Index>(data.size()) == rows * cols,
          ErrorCode::SchemaViolation,
          "checkpoint tensor \"" + name + "\" data does not match its shape");
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[at++].get<double>();
  }
  return m;
}

ordered_json direction_json(const GruDirectionParams& p) {
  ordered_json entry;
  entry["w_in"] = matrix_json(p.w_in);
  entry["u_rec"] = matrix_json(p.u_rec);
  entry["b_in"] = matrix_json(p.b_in);
  entry["b_rec"] = matrix_json(p.b_rec);
  return entry;
}

GruDirectionParams direction_from_json(const nlohmann::json& entry,
                                       const std::string& name) {
  const Eigen::MatrixXd w_in = matrix_from_json(entry.at("w_in"), name + ".w_in");
  const Eigen::MatrixXd u_rec = matrix_from_json(entry.at("u_rec"), name + ".u_rec");
  const Eigen::MatrixXd b_in = matrix_from_json(entry.at("b_in"), name + ".b_in");
  const Eigen::MatrixXd b_rec = matrix_from_json(entry.at("b_rec"), name + ".b_rec");
  require(u_rec.rows() * 3 == u_rec.cols() && w_in.cols() == u_rec.cols() &&
              b_in.rows() == 1 && b_rec.rows() == 1 && b_in.cols() == u_rec.cols() &&
              b_rec.cols() == u_rec.cols(),
          ErrorCode::SchemaViolation,
          "checkpoint direction \"" + name + "\" has inconsistent shapes");
  GruDirectionParams p;
  p.w_in = w_in;
  p.u_rec = u_rec;
  p.b_in = b_in;
  p.b_rec = b_rec;
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GruSeq2SeqParams& params,
                     const ScalerParams& scaler, int window) {
  ordered_json doc;
  doc["version"] = "1";
  doc["units"] = params.units();
  doc["input_width"] = params.input_width();
  doc["window"] = window;
  doc["feature_order"] = kFeatureOrderTag;
  doc["scaler"]["min"] = std::vector<double>(scaler.min_v.data(),
                                             scaler.min_v.data() + scaler.min_v.size());
  doc["scaler"]["max"] = std::vector<double>(scaler.max_v.data(),
                                             scaler.max_v.data() + scaler.max_v.size());
  doc["weights"]["encoder_fw"] = direction_json(params.encoder_fw);
  doc["weights"]["encoder_bw"] = direction_json(params.encoder_bw);
  doc["weights"]["decoder_fw"] = direction_json(params.decoder_fw);
  doc["weights"]["decoder_bw"] = direction_json(params.decoder_bw);
  doc["weights"]["dense"]["w"] = matrix_json(params.dense_w.transpose());
  doc["weights"]["dense"]["b"] = params.dense_b;
  write_text_file(path, doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  require(doc.contains("version") && doc["version"].is_string(),
          ErrorCode::SchemaViolation, path.string() + ": missing version");
  require(doc["version"].get<std::string>() == "1", ErrorCode::StaleCheckpoint,
          path.string() + ": unsupported checkpoint version \"" +
              doc["version"].get<std::string>() + "\"");
  require(doc.contains("feature_order") &&
              doc["feature_order"].get<std::string>() == kFeatureOrderTag,
          ErrorCode::StaleCheckpoint,
          path.string() + ": checkpoint was built for a different feature layout");

  Checkpoint ck;
  ck.window = doc.at("window").get<int>();
  require(ck.window >= 1, ErrorCode::SchemaViolation,
          path.string() + ": window must be >= 1");

  const auto& weights = doc.at("weights");
  ck.params.encoder_fw = direction_from_json(weights.at("encoder_fw"), "encoder_fw");
  ck.params.encoder_bw = direction_from_json(weights.at("encoder_bw"), "encoder_bw");
  ck.params.decoder_fw = direction_from_json(weights.at("decoder_fw"), "decoder_fw");
  ck.params.decoder_bw = direction_from_json(weights.at("decoder_bw"), "decoder_bw");
  const Eigen::MatrixXd dense_w = matrix_from_json(weights.at("dense").at("w"), "dense.w");
  require(dense_w.rows() == 1, ErrorCode::SchemaViolation,
          path.string() + ": dense.w must be a row vector");
  ck.params.dense_w = dense_w.transpose();
  ck.params.dense_b = weights.at("dense").at("b").get<double>();

  const Eigen::Index units = doc.at("units").get<Eigen::Index>();
  const Eigen::Index width = doc.at("input_width").get<Eigen::Index>();
  require(ck.params.units() == units && ck.params.input_width() == width &&
              ck.params.decoder_fw.input_width() == 2 * units &&
              ck.params.decoder_bw.input_width() == 2 * units &&
              ck.params.dense_w.size() == 2 * units,
          ErrorCode::SchemaViolation,
          path.string() + ": weight shapes disagree with the declared sizes");

  const auto& scaler = doc.at("scaler");
  const std::vector<double> min_v = scaler.at("min").get<std::vector<double>>();
  const std::vector<double> max_v = scaler.at("max").get<std::vector<double>>();
  require(min_v.size() == max_v.size() && !min_v.empty(), ErrorCode::SchemaViolation,
          path.string() + ": scaler min/max sizes disagree");
  ck.scaler.min_v = Eigen::Map<const Eigen::VectorXd>(min_v.data(),
                                                      static_cast<Eigen::Index>(min_v.size()));
  ck.scaler.max_v = Eigen::Map<const Eigen::VectorXd>(max_v.data(),
                                                      static_cast<Eigen::Index>(max_v.size()));
  require(ck.scaler.min_v.size() == width, ErrorCode::SchemaViolation,
          path.string() + ": scaler width disagrees with input width");
  return ck;
}

}  // namespace lookplan::gru
