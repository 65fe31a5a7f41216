#include "lxm/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::model {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int Architecture::layer_input_dim(int layer) const {
  return layer == 0 ? input_dim : layer_output_dim(layer - 1);
}

void Architecture::validate() const {
  if (input_dim <= 0) throw ConfigError("input dimension must be positive");
  if (window <= 0) throw ConfigError("window must be positive");
  if (horizon != 1 && horizon != 2) throw ConfigError("horizon must be 1 or 2");
  if (hidden_sizes.empty()) throw ConfigError("at least one LSTM layer is required");
  for (int h : hidden_sizes)
    if (h <= 0) throw ConfigError("hidden sizes must be positive");
}

ParamLayout::ParamLayout(const Architecture& arch) {
  arch.validate();
  auto add = [&](std::string name, Index rows, Index cols, int fan_in, int fan_out, bool bias) {
    tensors_.push_back({std::move(name), rows, cols, total_, fan_in, fan_out, bias});
    total_ += rows * cols;
    return tensors_.size() - 1;
  };
  for (int l = 0; l < arch.layer_count(); ++l) {
    const int h = arch.hidden_sizes[static_cast<std::size_t>(l)];
    const int in = arch.layer_input_dim(l);
    for (int d = 0; d < 2; ++d) {
      const std::string prefix = "lstm" + std::to_string(l) + (d == 0 ? ".fwd." : ".bwd.");
      Direction dir{};
      dir.w = add(prefix + "W", 4 * h, in, in, 4 * h, false);
      dir.u = add(prefix + "U", 4 * h, h, h, 4 * h, false);
      dir.b = add(prefix + "b", 4 * h, 1, 0, 0, true);
      directions_.push_back(dir);
    }
  }
  dense_w_ = add("dense.W", arch.output_dim(), arch.flatten_dim(), arch.flatten_dim(), arch.output_dim(), false);
  dense_b_ = add("dense.b", arch.output_dim(), 1, 0, 0, true);
}

std::size_t ParamLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name) return i;
  throw ContractError("no parameter tensor named " + std::string(name));
}

ModelParams::ModelParams(Architecture arch)
    : arch_(std::move(arch)), layout_(arch_), values_(VectorXd::Zero(layout_.total())) {}

Eigen::Map<MatrixXd> ModelParams::tensor(std::size_t index) {
  const auto& t = layout_.tensors().at(index);
  return {values_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const MatrixXd> ModelParams::tensor(std::size_t index) const {
  const auto& t = layout_.tensors().at(index);
  return {values_.data() + t.offset, t.rows, t.cols};
}

double glorot_limit(int fan_in, int fan_out) { return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)); }

ModelParams init_glorot(const Architecture& arch, std::uint64_t seed) {
  ModelParams model(arch);
  Rng rng(seed);
  for (const auto& t : model.layout().tensors()) {
    if (t.bias) continue;
    const double limit = glorot_limit(t.fan_in, t.fan_out);
    for (Index i = 0; i < t.size(); ++i) model.values()[t.offset + i] = rng.uniform(-limit, limit);
  }
  return model;
}

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

// Processing order of direction `dir`: timestep visited at step k.
inline int timestep_at(int dir, int k, int window) { return dir == 0 ? k : window - 1 - k; }

void run_direction(const ModelParams& model, int layer, int dir, const MatrixXd& input, int batch,
                   DirectionTrace& trace) {
  const auto& arch = model.arch();
  const int window = arch.window;
  const Index h = arch.hidden_sizes[static_cast<std::size_t>(layer)];
  const auto idx = model.layout().direction(layer, dir);
  const auto W = model.tensor(idx.w);
  const auto U = model.tensor(idx.u);
  const auto b = model.tensor(idx.b);

  MatrixXd pre = W * input;
  pre.colwise() += b.col(0);

  trace.gates.resize(4 * h, input.cols());
  trace.cell.resize(h, input.cols());
  trace.hidden.resize(h, input.cols());

  MatrixXd z(4 * h, batch);
  for (int k = 0; k < window; ++k) {
    const int t = timestep_at(dir, k, window);
    const Index col = static_cast<Index>(t) * batch;
    z = pre.middleCols(col, batch);
    if (k > 0) {
      const Index prev = static_cast<Index>(timestep_at(dir, k - 1, window)) * batch;
      z.noalias() += U * trace.hidden.middleCols(prev, batch);
    }
    auto gates = trace.gates.middleCols(col, batch);
    gates.topRows(3 * h) = sigmoid(z.topRows(3 * h).array()).matrix();
    gates.bottomRows(h) = z.bottomRows(h).array().tanh().matrix();

    auto c = trace.cell.middleCols(col, batch);
    c = (gates.topRows(h).array() * gates.bottomRows(h).array()).matrix();
    if (k > 0) {
      const Index prev = static_cast<Index>(timestep_at(dir, k - 1, window)) * batch;
      c.array() += gates.middleRows(h, h).array() * trace.cell.middleCols(prev, batch).array();
    }
    auto hidden = trace.hidden.middleCols(col, batch);
    hidden = (gates.middleRows(2 * h, h).array() * c.array().tanh()).matrix();
    if (!hidden.allFinite()) {
      throw NumericError("non-finite hidden state in LSTM layer " + std::to_string(layer) +
                             (dir == 0 ? " (forward)" : " (backward)") + " at timestep " + std::to_string(t),
                         layer, t);
    }
  }
}

// Backpropagates one direction. `d_hidden` is dL/dh for every timestep
// (H x W*B); accumulates parameter gradients into `grad` and, when
// `d_input` is non-null, dL/dx into it.
void backprop_direction(const ModelParams& model, int layer, int dir, const MatrixXd& input, int batch,
                        const DirectionTrace& trace, const MatrixXd& d_hidden, VectorXd& grad,
                        MatrixXd* d_input) {
  const auto& arch = model.arch();
  const int window = arch.window;
  const Index h = arch.hidden_sizes[static_cast<std::size_t>(layer)];
  const auto idx = model.layout().direction(layer, dir);
  const auto& tensors = model.layout().tensors();
  const auto W = model.tensor(idx.w);
  const auto U = model.tensor(idx.u);

  const Index cols = input.cols();
  MatrixXd dz_all(4 * h, cols);
  MatrixXd h_prev_all = MatrixXd::Zero(h, cols);
  MatrixXd dh_next = MatrixXd::Zero(h, batch);
  MatrixXd dc_next = MatrixXd::Zero(h, batch);
  MatrixXd dh(h, batch), dc(h, batch);

  for (int k = window - 1; k >= 0; --k) {
    const int t = timestep_at(dir, k, window);
    const Index col = static_cast<Index>(t) * batch;
    const bool has_prev = k > 0;
    const Index prev = has_prev ? static_cast<Index>(timestep_at(dir, k - 1, window)) * batch : 0;

    const auto gates = trace.gates.middleCols(col, batch).array();
    const auto gi = gates.topRows(h);
    const auto gf = gates.middleRows(h, h);
    const auto go = gates.middleRows(2 * h, h);
    const auto gg = gates.bottomRows(h);
    const Eigen::ArrayXXd tanh_c = trace.cell.middleCols(col, batch).array().tanh();

    dh = d_hidden.middleCols(col, batch) + dh_next;
    dc = (dh.array() * go * (1.0 - tanh_c.square()) + dc_next.array()).matrix();

    auto dz = dz_all.middleCols(col, batch);
    dz.topRows(h) = (dc.array() * gg * gi * (1.0 - gi)).matrix();
    if (has_prev) {
      dz.middleRows(h, h) = (dc.array() * trace.cell.middleCols(prev, batch).array() * gf * (1.0 - gf)).matrix();
      h_prev_all.middleCols(col, batch) = trace.hidden.middleCols(prev, batch);
    } else {
      dz.middleRows(h, h).setZero();
    }
    dz.middleRows(2 * h, h) = (dh.array() * tanh_c * go * (1.0 - go)).matrix();
    dz.bottomRows(h) = (dc.array() * gi * (1.0 - gg.square())).matrix();

    dh_next.noalias() = U.transpose() * dz;
    dc_next = (dc.array() * gf).matrix();
  }

  const auto& tw = tensors[idx.w];
  const auto& tu = tensors[idx.u];
  const auto& tb = tensors[idx.b];
  Eigen::Map<MatrixXd>(grad.data() + tw.offset, tw.rows, tw.cols).noalias() += dz_all * input.transpose();
  Eigen::Map<MatrixXd>(grad.data() + tu.offset, tu.rows, tu.cols).noalias() += dz_all * h_prev_all.transpose();
  Eigen::Map<VectorXd>(grad.data() + tb.offset, tb.rows) += dz_all.rowwise().sum();
  if (d_input) d_input->noalias() += W.transpose() * dz_all;
}

}  // namespace

BatchTrace forward_batch(const ModelParams& model, MatrixXd input, int batch) {
  const auto& arch = model.arch();
  if (batch <= 0 || input.rows() != arch.input_dim || input.cols() != static_cast<Index>(arch.window) * batch)
    throw ContractError("forward: input must be " + std::to_string(arch.input_dim) + " x " +
                        std::to_string(arch.window) + "*batch");
  if (!input.allFinite()) throw ContractError("forward: non-finite input");

  BatchTrace trace;
  trace.batch = batch;
  trace.input = std::move(input);
  trace.layers.resize(static_cast<std::size_t>(arch.layer_count()));
  for (int l = 0; l < arch.layer_count(); ++l) {
    const MatrixXd& x = l == 0 ? trace.input : trace.layers[static_cast<std::size_t>(l - 1)].output;
    auto& layer = trace.layers[static_cast<std::size_t>(l)];
    const Index h = arch.hidden_sizes[static_cast<std::size_t>(l)];
    for (int d = 0; d < 2; ++d) run_direction(model, l, d, x, batch, layer.dirs[d]);
    layer.output.resize(2 * h, x.cols());
    layer.output.topRows(h) = layer.dirs[0].hidden;
    layer.output.bottomRows(h) = layer.dirs[1].hidden;
  }

  const auto& last = trace.layers.back().output;
  const Index width = last.rows();
  trace.flatten.resize(arch.flatten_dim(), batch);
  for (int t = 0; t < arch.window; ++t)
    trace.flatten.middleRows(t * width, width) = last.middleCols(static_cast<Index>(t) * batch, batch);

  trace.output = model.tensor(model.layout().dense_w()) * trace.flatten;
  trace.output.colwise() += model.tensor(model.layout().dense_b()).col(0);
  if (!trace.output.allFinite())
    throw NumericError("non-finite output", arch.layer_count(), -1);
  return trace;
}

double backward_batch(const ModelParams& model, const BatchTrace& trace, const MatrixXd& targets, VectorXd& grad) {
  const auto& arch = model.arch();
  const int batch = trace.batch;
  if (targets.rows() != arch.output_dim() || targets.cols() != batch)
    throw ContractError("backward: targets must be output_dim x batch");

  grad.setZero(model.layout().total());
  const MatrixXd diff = trace.output - targets;
  const double n = static_cast<double>(arch.output_dim()) * batch;
  const double loss = diff.squaredNorm() / n;
  const MatrixXd d_out = diff * (2.0 / n);

  const auto& tw = model.layout().tensors()[model.layout().dense_w()];
  const auto& tb = model.layout().tensors()[model.layout().dense_b()];
  Eigen::Map<MatrixXd>(grad.data() + tw.offset, tw.rows, tw.cols).noalias() = d_out * trace.flatten.transpose();
  Eigen::Map<VectorXd>(grad.data() + tb.offset, tb.rows) = d_out.rowwise().sum();
  const MatrixXd d_flat = model.tensor(model.layout().dense_w()).transpose() * d_out;

  // dL/d(layer output) in the W*B column layout
  const Index last_width = trace.layers.back().output.rows();
  MatrixXd d_output(last_width, static_cast<Index>(arch.window) * batch);
  for (int t = 0; t < arch.window; ++t)
    d_output.middleCols(static_cast<Index>(t) * batch, batch) = d_flat.middleRows(t * last_width, last_width);

  for (int l = arch.layer_count() - 1; l >= 0; --l) {
    const auto& layer = trace.layers[static_cast<std::size_t>(l)];
    const MatrixXd& x = l == 0 ? trace.input : trace.layers[static_cast<std::size_t>(l - 1)].output;
    const Index h = arch.hidden_sizes[static_cast<std::size_t>(l)];
    MatrixXd d_input;
    MatrixXd* d_input_ptr = nullptr;
    if (l > 0) {
      d_input = MatrixXd::Zero(x.rows(), x.cols());
      d_input_ptr = &d_input;
    }
    const MatrixXd d_fwd = d_output.topRows(h);
    const MatrixXd d_bwd = d_output.bottomRows(h);
    backprop_direction(model, l, 0, x, batch, layer.dirs[0], d_fwd, grad, d_input_ptr);
    backprop_direction(model, l, 1, x, batch, layer.dirs[1], d_bwd, grad, d_input_ptr);
    d_output = std::move(d_input);
  }
  return loss;
}

Activations activations_of(const BatchTrace& trace, Index column) {
  Activations a;
  const int batch = trace.batch;
  const Index window = trace.input.cols() / batch;
  for (const auto& layer : trace.layers) {
    MatrixXd m(window, layer.output.rows());
    for (Index t = 0; t < window; ++t) m.row(t) = layer.output.col(t * batch + column).transpose();
    a.layers.push_back(std::move(m));
  }
  a.flatten = trace.flatten.col(column);
  a.output = trace.output.col(column);
  return a;
}

ForwardResult forward(const ModelParams& model, const MatrixXd& input) {
  const auto& arch = model.arch();
  if (input.rows() != arch.window || input.cols() != arch.input_dim)
    throw ContractError("forward: input must be " + std::to_string(arch.window) + " x " +
                        std::to_string(arch.input_dim));
  BatchTrace trace = forward_batch(model, input.transpose(), 1);
  ForwardResult result;
  result.activations = activations_of(trace, 0);
  result.prediction = result.activations.output;
  return result;
}

double loss_mse(const Eigen::Ref<const VectorXd>& prediction, const Eigen::Ref<const VectorXd>& target) {
  if (prediction.size() != target.size() || prediction.size() == 0)
    throw ContractError("loss_mse: size mismatch");
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

VectorXd backward(const ModelParams& model, const MatrixXd& input, const VectorXd& target) {
  const auto& arch = model.arch();
  if (input.rows() != arch.window || input.cols() != arch.input_dim)
    throw ContractError("backward: input shape mismatch");
  BatchTrace trace = forward_batch(model, input.transpose(), 1);
  VectorXd grad;
  backward_batch(model, trace, target, grad);
  return grad;
}

std::vector<Index> gradient_check_indices(const ParamLayout& layout, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const auto& tensors = layout.tensors();
  // water-fill: small tensors are taken whole and their unused share moves to larger ones
  std::vector<std::size_t> by_size(tensors.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](std::size_t a, std::size_t b) { return tensors[a].size() < tensors[b].size(); });
  std::vector<std::size_t> quota(tensors.size());
  std::size_t remaining = count;
  for (std::size_t k = 0; k < by_size.size(); ++k) {
    const auto size = static_cast<std::size_t>(tensors[by_size[k]].size());
    const std::size_t left = by_size.size() - k;
    const std::size_t share = std::max<std::size_t>(1, (remaining + left - 1) / left);
    quota[by_size[k]] = std::min(size, share);
    remaining -= std::min(remaining, quota[by_size[k]]);
  }

  std::vector<Index> out;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto& t = tensors[k];
    const auto size = static_cast<std::size_t>(t.size());
    const std::size_t take = quota[k];
    if (take == size) {
      for (std::size_t i = 0; i < size; ++i) out.push_back(t.offset + static_cast<Index>(i));
      continue;
    }
    std::vector<std::size_t> pick(size);
    std::iota(pick.begin(), pick.end(), 0);
    // partial Fisher-Yates: the first `take` entries are a uniform sample
    for (std::size_t i = 0; i < take; ++i) std::swap(pick[i], pick[i + rng.below(size - i)]);
    std::sort(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(take));
    for (std::size_t i = 0; i < take; ++i) out.push_back(t.offset + static_cast<Index>(pick[i]));
  }
  return out;
}

GradientCheckReport compare_with_finite_differences(const ModelParams& model, const MatrixXd& input,
                                                    const VectorXd& target, const VectorXd& analytic,
                                                    double epsilon, std::span<const Index> indices) {
  if (analytic.size() != model.layout().total()) throw ContractError("gradient size mismatch");
  GradientCheckReport report;
  report.tensor_max_error.assign(model.layout().tensors().size(), 0.0);
  report.indices.assign(indices.begin(), indices.end());

  ModelParams probe = model;
  auto loss_at = [&](Index i, double value) {
    probe.values()[i] = value;
    return loss_mse(forward(probe, input).prediction, target);
  };
  const auto& tensors = model.layout().tensors();
  for (Index i : indices) {
    const double original = model.values()[i];
    const double numeric = (loss_at(i, original + epsilon) - loss_at(i, original - epsilon)) / (2.0 * epsilon);
    probe.values()[i] = original;
    const double a = analytic[i];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
    auto it = std::upper_bound(tensors.begin(), tensors.end(), i,
                               [](Index v, const TensorInfo& t) { return v < t.offset; });
    const auto tensor = static_cast<std::size_t>(it - tensors.begin() - 1);
    report.tensor_max_error[tensor] = std::max(report.tensor_max_error[tensor], err);
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  return report;
}

GradientCheckReport gradient_check(const ModelParams& model, const MatrixXd& input, const VectorXd& target,
                                   double epsilon, std::size_t count, std::uint64_t seed) {
  const VectorXd analytic = backward(model, input, target);
  const auto indices = gradient_check_indices(model.layout(), count, seed);
  return compare_with_finite_differences(model, input, target, analytic, epsilon, indices);
}

void adam_step(Eigen::Ref<VectorXd> params, const Eigen::Ref<const VectorXd>& grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractError("adam_step: size mismatch");
  const auto& c = state.config;
  state.t += 1;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double m_scale = 1.0 / (1.0 - std::pow(c.beta1, static_cast<double>(state.t)));
  const double v_scale = 1.0 / (1.0 - std::pow(c.beta2, static_cast<double>(state.t)));
  params.array() -= c.lr * (state.m.array() * m_scale) / ((state.v.array() * v_scale).sqrt() + c.epsilon);
}

void TrainConfig::validate() const {
  architecture(1).validate();
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch <= 0) throw ConfigError("batch size must be positive");
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.window = j.value("window", c.window);
    c.horizon = j.value("horizon", c.horizon);
    c.hidden_sizes = j.value("hidden_sizes", c.hidden_sizes);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"window", c.window}, {"horizon", c.horizon}, {"hidden_sizes", c.hidden_sizes}, {"lr", c.lr},
          {"epochs", c.epochs}, {"batch", c.batch},     {"seed", c.seed}};
}

BatchData make_batch(const embed::EmbeddingTable& table, std::span<const corpus::SequenceSample> samples,
                     std::span<const std::size_t> order, int window, int horizon) {
  const int dim = table.dim();
  BatchData data;
  data.batch = static_cast<int>(order.size());
  data.input.resize(dim, static_cast<Index>(window) * data.batch);
  data.targets.resize(static_cast<Index>(horizon) * dim, data.batch);
  for (int b = 0; b < data.batch; ++b) {
    const auto& s = samples[order[static_cast<std::size_t>(b)]];
    if (static_cast<int>(s.input_ids.size()) != window || static_cast<int>(s.target_ids.size()) != horizon)
      throw ContractError("sample shape does not match window/horizon");
    for (int t = 0; t < window; ++t)
      data.input.col(static_cast<Index>(t) * data.batch + b) = table.lookup(s.input_ids[static_cast<std::size_t>(t)]);
    for (int k = 0; k < horizon; ++k)
      data.targets.col(b).segment(static_cast<Index>(k) * dim, dim) = table.lookup(s.target_ids[static_cast<std::size_t>(k)]);
  }
  return data;
}

TrainingRun train(ModelParams& model, std::span<const corpus::SequenceSample> samples,
                  const embed::EmbeddingTable& table, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const auto& arch = model.arch();
  if (arch.window != config.window || arch.horizon != config.horizon || arch.hidden_sizes != config.hidden_sizes ||
      arch.input_dim != table.dim())
    throw ContractError("model architecture does not match training config / embedding table");
  if (samples.empty()) throw ConfigError("no training samples");

  AdamState adam(model.layout().total(), AdamConfig{config.lr});
  Rng rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  VectorXd grad;

  TrainingRun run;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      const auto chunk = std::span<const std::size_t>(order).subspan(start, end - start);
      BatchData data = make_batch(table, samples, chunk, arch.window, arch.horizon);
      BatchTrace trace = forward_batch(model, std::move(data.input), data.batch);
      const double loss = backward_batch(model, trace, data.targets, grad);
      loss_sum += loss * static_cast<double>(data.batch);
      adam_step(model.values(), grad, adam);
    }
    run.epoch_loss.push_back(loss_sum / static_cast<double>(samples.size()));
    if (on_epoch) on_epoch(epoch, run.epoch_loss.back(), model);
  }
  return run;
}

std::vector<std::vector<embed::Neighbor>> predict_word(const ModelParams& model, const embed::EmbeddingTable& table,
                                                       std::span<const std::string> window_tokens, std::size_t k) {
  const auto& arch = model.arch();
  if (static_cast<int>(window_tokens.size()) != arch.window)
    throw ContractError("predict_word: expected " + std::to_string(arch.window) + " tokens");
  if (table.dim() != arch.input_dim) throw ContractError("predict_word: embedding dimension mismatch");
  MatrixXd input(arch.window, arch.input_dim);
  for (int t = 0; t < arch.window; ++t) input.row(t) = table.lookup(window_tokens[static_cast<std::size_t>(t)]).transpose();
  const VectorXd prediction = forward(model, input).prediction;
  std::vector<std::vector<embed::Neighbor>> ranked;
  for (int slot = 0; slot < arch.horizon; ++slot)
    ranked.push_back(embed::nearest(table, prediction.segment(static_cast<Index>(slot) * arch.input_dim, arch.input_dim), k));
  return ranked;
}

}  // namespace lxm::model
