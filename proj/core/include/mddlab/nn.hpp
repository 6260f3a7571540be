#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mddlab/data.hpp"
#include "mddlab/hypothesis.hpp"
#include "mddlab/rng.hpp"

namespace mddlab {

enum class Activation { Identity, ReLU };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// y = act(W x + b) with W of shape out x in.
struct DenseLayer {
  Matrix weight;
  Vector bias;
  Activation activation = Activation::Identity;

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weight.rows()); }
};

struct LayerGradient {
  Matrix weight;
  Vector bias;
};

/// Parameter gradients of one backward pass, plus the gradient w.r.t. the
/// input batch.
struct Gradients {
  std::vector<LayerGradient> layers;
  Matrix input;
};

class MlpModel;

/// Activations cached by forward() for one batch. Tied to the exact parameter
/// state it was recorded against.
class GradTape {
 public:
  GradTape() = default;

 private:
  friend class MlpModel;
  std::uint64_t stamp_ = 0;
  std::vector<Matrix> inputs_;   // input of each layer
  std::vector<Matrix> pre_;      // pre-activation of each layer
};

struct ForwardResult {
  Matrix output;
  GradTape tape;
};

class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(std::vector<DenseLayer> layers);
  MlpModel(const MlpModel& other);
  MlpModel& operator=(const MlpModel& other);
  MlpModel(MlpModel&&) noexcept;
  MlpModel& operator=(MlpModel&&) noexcept;

  /// widths = (in, h1, ..., out). Hidden layers use `hidden`, the last layer
  /// `output`. Weights are uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
  /// biases zero.
  static MlpModel glorot(const std::vector<std::size_t>& widths, Activation hidden,
                         Activation output, Rng& rng);

  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_parameters() const;

  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  /// Mutable access; invalidates outstanding tapes.
  DenseLayer& mutable_layer(std::size_t i);
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  ForwardResult forward(const Matrix& x) const;
  Matrix predict(const Matrix& x) const;

  /// Reverse-mode pass for d(loss)/d(output) = `upstream`. Throws
  /// InvalidArgument if the tape was recorded by another model or before the
  /// parameters last changed.
  Gradients backward(const GradTape& tape, const Matrix& upstream) const;

  /// Parameters in layer order, each layer as row-major weight then bias.
  Vector flatten() const;
  void assign(const Vector& flat);

  bool all_finite() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  void restamp() noexcept;

  std::vector<DenseLayer> layers_;
  std::uint64_t stamp_ = 0;
};

/// Flattened in the same order as MlpModel::flatten.
Vector flatten(const Gradients& g);

/// Gradient reversal: the forward pass is the identity, the backward pass maps
/// g to -coeff * g. coeff must be nonnegative.
Matrix grl(const Matrix& upstream, double coeff);

// ---------------------------------------------------------------------------
// Softmax losses

/// Max-shifted softmax of a score vector.
Vector softmax(const Vector& z);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& z);

double logsumexp(const Vector& z);

struct LossValue {
  double value = 0.0;
  Vector grad;  // d value / d z
};

/// -log softmax(z)_y.
LossValue ce_loss(const Vector& z, int y);

/// log(1 - softmax(z)_y) = logsumexp(z without y) - logsumexp(z). Needs k >= 2.
LossValue log1m_softmax(const Vector& z, int y);

// ---------------------------------------------------------------------------
// Optimisation

/// Velocity buffers for one parameter group (one model).
struct OptimizerState {
  std::vector<LayerGradient> velocity;
  double momentum = 0.9;
  double lr_multiplier = 1.0;
  std::size_t steps = 0;
};

OptimizerState make_optimizer_state(const MlpModel& model, double momentum = 0.9,
                                    double lr_multiplier = 1.0);

/// Nesterov update with lr = lr_base * state.lr_multiplier:
/// v <- mu v - lr g;  theta <- theta + mu v - lr g.
void sgd_nesterov_step(OptimizerState& state, MlpModel& model, const Gradients& grads,
                       double lr_base);

/// lr0 * (1 + alpha p)^(-beta), p = step / total (p = 0 when total = 0).
double lr_schedule(std::size_t step, std::size_t total, double lr0, double alpha = 10.0,
                   double beta = 0.75);

// ---------------------------------------------------------------------------
// Checkpoints

/// JSON document {"format": "mddlab-mlp", "version": 1, "layers": [...]};
/// each layer stores in, out, activation, row-major weight and bias. Doubles
/// are written with round-trip precision.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

/// Scoring function head(features(x)); a null extractor means head(x).
class MlpScorer final : public ScoringFunction {
 public:
  MlpScorer(std::shared_ptr<const MlpModel> features, std::shared_ptr<const MlpModel> head);

  int num_classes() const override;
  std::size_t input_dim() const override;
  Matrix score_batch(const Matrix& x) const override;

 private:
  std::shared_ptr<const MlpModel> features_;
  std::shared_ptr<const MlpModel> head_;
};

}  // namespace mddlab
