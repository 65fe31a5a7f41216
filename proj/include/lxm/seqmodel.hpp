#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "lxm/corpus.hpp"
#include "lxm/embeddings.hpp"

namespace lxm::model {

/// Shape of the predictor: a stack of bidirectional LSTM layers that all
/// return full sequences, a flatten over every timestep of the last layer,
/// and an affine head producing `horizon` word vectors.
struct Architecture {
  int input_dim = 64;
  int window = 9;
  int horizon = 1;
  std::vector<int> hidden_sizes{128, 128, 64, 64};

  int layer_count() const { return static_cast<int>(hidden_sizes.size()); }
  int layer_input_dim(int layer) const;
  int layer_output_dim(int layer) const { return 2 * hidden_sizes.at(static_cast<std::size_t>(layer)); }
  int flatten_dim() const { return window * 2 * hidden_sizes.back(); }
  int output_dim() const { return horizon * input_dim; }

  void validate() const;
  bool operator==(const Architecture&) const = default;
};

struct TensorInfo {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
  int fan_in = 0;
  int fan_out = 0;
  bool bias = false;

  Eigen::Index size() const { return rows * cols; }
};

/// Placement of every parameter tensor inside one flat vector. Each LSTM
/// direction owns three tensors: `W` (4H x in), `U` (4H x H) and `b` (4H),
/// with gate blocks stacked in the order input, forget, output, candidate.
class ParamLayout {
 public:
  explicit ParamLayout(const Architecture& arch);

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  Eigen::Index total() const { return total_; }
  std::size_t index_of(std::string_view name) const;

  /// Tensor indices of W, U, b for one direction (0 forward, 1 backward).
  struct Direction {
    std::size_t w, u, b;
  };
  Direction direction(int layer, int dir) const {
    return directions_.at(static_cast<std::size_t>(2 * layer + dir));
  }
  std::size_t dense_w() const { return dense_w_; }
  std::size_t dense_b() const { return dense_b_; }

 private:
  std::vector<TensorInfo> tensors_;
  std::vector<Direction> directions_;
  std::size_t dense_w_ = 0, dense_b_ = 0;
  Eigen::Index total_ = 0;
};

class ModelParams {
 public:
  /// All-zero parameters.
  explicit ModelParams(Architecture arch);

  const Architecture& arch() const { return arch_; }
  const ParamLayout& layout() const { return layout_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  /// Column-major view of one tensor.
  Eigen::Map<Eigen::MatrixXd> tensor(std::size_t index);
  Eigen::Map<const Eigen::MatrixXd> tensor(std::size_t index) const;
  Eigen::Map<Eigen::MatrixXd> tensor(std::string_view name) { return tensor(layout_.index_of(name)); }
  Eigen::Map<const Eigen::MatrixXd> tensor(std::string_view name) const { return tensor(layout_.index_of(name)); }

 private:
  Architecture arch_;
  ParamLayout layout_;
  Eigen::VectorXd values_;
};

double glorot_limit(int fan_in, int fan_out);

/// Weights uniform in [-L, L] with L = sqrt(6 / (fan_in + fan_out)), biases zero.
ModelParams init_glorot(const Architecture& arch, std::uint64_t seed);

/// Per-direction intermediate values for a batch. Every matrix stores the
/// sequence as W column blocks of width B, block t holding timestep t.
struct DirectionTrace {
  Eigen::MatrixXd gates;   ///< 4H x (W*B), after the gate nonlinearities
  Eigen::MatrixXd cell;    ///< H x (W*B)
  Eigen::MatrixXd hidden;  ///< H x (W*B)
};

struct LayerTrace {
  DirectionTrace dirs[2];
  Eigen::MatrixXd output;  ///< 2H x (W*B): [h_fwd; h_bwd] per timestep
};

struct BatchTrace {
  int batch = 0;
  Eigen::MatrixXd input;  ///< D x (W*B)
  std::vector<LayerTrace> layers;
  Eigen::MatrixXd flatten;  ///< (W*2H_last) x B
  Eigen::MatrixXd output;   ///< (H*D) x B
};

/// `input` holds W column blocks of width `batch`. Throws NumericError on a
/// non-finite hidden state.
BatchTrace forward_batch(const ModelParams& model, Eigen::MatrixXd input, int batch);

/// Mean MSE over the batch; `grad` receives the gradient of that mean with
/// respect to every parameter (same layout as the parameter vector).
double backward_batch(const ModelParams& model, const BatchTrace& trace, const Eigen::MatrixXd& targets,
                      Eigen::VectorXd& grad);

/// Probe view of one sample: per layer a W x 2H matrix (row = timestep).
struct Activations {
  std::vector<Eigen::MatrixXd> layers;
  Eigen::VectorXd flatten;
  Eigen::VectorXd output;
};

struct ForwardResult {
  Eigen::VectorXd prediction;
  Activations activations;
};

Activations activations_of(const BatchTrace& trace, Eigen::Index column);

/// `input` is W x D, one row per timestep.
ForwardResult forward(const ModelParams& model, const Eigen::MatrixXd& input);

double loss_mse(const Eigen::Ref<const Eigen::VectorXd>& prediction, const Eigen::Ref<const Eigen::VectorXd>& target);

Eigen::VectorXd backward(const ModelParams& model, const Eigen::MatrixXd& input, const Eigen::VectorXd& target);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  /// Largest error per tensor, indexed like ParamLayout::tensors().
  std::vector<double> tensor_max_error;
  std::vector<Eigen::Index> indices;
};

/// |a - n| / max(|a|, |n|, floor). Central differences at epsilon 1e-5 carry
/// about 1e-11 of rounding noise for an O(1) loss, so below 1e-6 the ratio
/// would measure that noise rather than the gradient.
inline constexpr double kRelativeErrorFloor = 1e-6;

/// At least `count` parameter indices, with every tensor represented.
std::vector<Eigen::Index> gradient_check_indices(const ParamLayout& layout, std::size_t count, std::uint64_t seed);

GradientCheckReport compare_with_finite_differences(const ModelParams& model, const Eigen::MatrixXd& input,
                                                    const Eigen::VectorXd& target, const Eigen::VectorXd& analytic,
                                                    double epsilon, std::span<const Eigen::Index> indices);

GradientCheckReport gradient_check(const ModelParams& model, const Eigen::MatrixXd& input,
                                   const Eigen::VectorXd& target, double epsilon = 1e-5, std::size_t count = 256,
                                   std::uint64_t seed = 0);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState(Eigen::Index size, AdamConfig cfg = {})
      : config(cfg), m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}

  AdamConfig config;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
};

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grads, AdamState& state);

struct TrainConfig {
  int window = 9;
  int horizon = 1;
  std::vector<int> hidden_sizes{128, 128, 64, 64};
  double lr = 0.001;
  int epochs = 100;
  int batch = 32;
  std::uint64_t seed = 1;

  void validate() const;
  Architecture architecture(int input_dim) const { return {input_dim, window, horizon, hidden_sizes}; }
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& config);

struct TrainingRun {
  std::vector<double> epoch_loss;
  int completed_epochs() const { return static_cast<int>(epoch_loss.size()); }
};

/// Inputs (D x W*B) and targets (H*D x B) for a batch of samples.
struct BatchData {
  Eigen::MatrixXd input;
  Eigen::MatrixXd targets;
  int batch = 0;
};

BatchData make_batch(const embed::EmbeddingTable& table, std::span<const corpus::SequenceSample> samples,
                     std::span<const std::size_t> order, int window, int horizon);

using EpochCallback = std::function<void(int epoch, double loss, const ModelParams& model)>;

/// Mini-batch Adam on the MSE objective with seeded per-epoch shuffling.
/// The embedding table stays fixed.
TrainingRun train(ModelParams& model, std::span<const corpus::SequenceSample> samples,
                  const embed::EmbeddingTable& table, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// One ranked list per predicted slot.
std::vector<std::vector<embed::Neighbor>> predict_word(const ModelParams& model, const embed::EmbeddingTable& table,
                                                       std::span<const std::string> window_tokens, std::size_t k);

/// Versioned little-endian binary: magic "LXM1", architecture, a shape
/// table, then float32 tensor data in row-major order.
void save_checkpoint(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace lxm::model
