#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mddlab/data.hpp"
#include "mddlab/error.hpp"
#include "mddlab/hypothesis.hpp"
#include "mddlab/nn.hpp"

namespace mddlab {

enum class Method { Mdd, SourceOnly };
enum class LossMode { CombinedCe, MarginAfter };

std::string to_string(Method m);
std::string to_string(LossMode m);
Method method_from_string(const std::string& s);
LossMode loss_mode_from_string(const std::string& s);

struct TrainConfig {
  Method method = Method::Mdd;
  double gamma = 4.0;  // source weight of the auxiliary objective; rho = log gamma
  double eta = 0.1;    // asymptotic trade-off coefficient
  bool eta_ramp = true;
  double eta_ramp_rate = 10.0;  // eta(p) = eta (2 / (1 + exp(-rate p)) - 1)
  std::size_t steps = 3000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double lr0 = 0.01;
  double lr_alpha = 10.0;
  double lr_beta = 0.75;
  double momentum = 0.9;
  double classifier_lr_multiplier = 10.0;  // f and f' relative to psi
  std::vector<std::size_t> feature_widths{32, 16};  // psi hidden widths; last = feature dim
  std::vector<std::size_t> head_widths{32};         // hidden widths of f and f'
  LossMode loss_mode = LossMode::CombinedCe;
  std::size_t margin_after = 2000;  // first step using the ramp margin losses
  std::size_t eval_every = 100;
  std::optional<double> eval_rho;   // margin for diagnostics; default log gamma, or log 4 if gamma <= 1
  std::size_t probe_size = 512;
  double probe_scale = 1.0;         // std of probe head weights

  void validate() const;
  double rho() const;       // log gamma
  double diagnostic_rho() const;
  double eta_at(std::size_t step) const;
  double lr_at(std::size_t step) const;
  bool margin_losses_at(std::size_t step) const;
};

/// psi: input -> features (ReLU throughout); f, f': features -> k logits.
struct Models {
  MlpModel feature;
  MlpModel classifier;
  MlpModel auxiliary;
};

/// Draws psi, f, f' in that order from Rng(derive_seed(seed, 0)).
Models init_models(const TrainConfig& config, std::size_t input_dim, int k);

struct MetricsRecord {
  std::size_t step = 0;  // updates completed
  double lr = 0.0;
  double eta = 0.0;
  double source_ce = 0.0;       // E on the last batch
  double transfer = 0.0;        // D_gamma (objective value) on the last batch
  double sigma_source = 0.0;    // batch mean of sigma_{h_f}(f')
  double sigma_target = 0.0;
  bool margin_losses = false;
  // Present at evaluation points.
  std::optional<double> source_accuracy;
  std::optional<double> target_accuracy;  // held-out labeled target copy
  std::optional<double> eval_sigma_source;
  std::optional<double> eval_sigma_target;
  std::optional<double> mdd_witness;   // f'-witnessed margin disparity gap
  std::optional<double> mdd_probe;     // brute-force MDD over the probe class
};

/// Training aborted on a non-finite loss or gradient; carries the offending
/// step's record.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, MetricsRecord record)
      : NumericError(what), record_(std::move(record)) {}
  const MetricsRecord& record() const noexcept { return record_; }

 private:
  MetricsRecord record_;
};

struct LossGradients {
  double value = 0.0;
  Gradients feature;
  Gradients classifier;
  Gradients auxiliary;
};

/// Mean cross-entropy of f(psi(x)) against labels. Gradients for psi and f;
/// the auxiliary entry is left empty.
LossGradients source_loss(const Models& models, const Matrix& x, const std::vector<int>& labels);

struct TransferLoss {
  LossGradients grads;  // value is the minimised quantity -D_gamma
  double objective = 0.0;  // D_gamma
  double sigma_source = 0.0;
  double sigma_target = 0.0;
};

/// transfer objective
///   D = gamma * mean_s log sigma_{h_f}(f'(psi(x_s))) + mean_t log(1 - sigma_{h_f}(f'(psi(x_t))))
/// with pseudo-labels h_f(psi(x)) taken as constants. The returned value is -D
/// so that descending it in f' raises D. Gradients: f' directly, psi without
/// reversal (the caller applies the GRL), f identically zero.
///
/// With `margin_rho`, the ramp margin losses replace the log terms:
///   D = mean_t Phi_rho(rho_{f'}(x_t, h_f)) - mean_s Phi_rho(rho_{f'}(x_s, h_f)).
TransferLoss transfer_loss(const Models& models, const Matrix& x_source, const Matrix& x_target,
                           double gamma, std::optional<double> margin_rho = std::nullopt);

struct Optimizers {
  OptimizerState feature;
  OptimizerState classifier;
  OptimizerState auxiliary;
};

Optimizers init_optimizers(const Models& models, const TrainConfig& config);

/// One simultaneous update at schedule position `step`: f' descends -D; f
/// descends E; psi descends E + eta(step) D through the gradient reversal.
/// Returns batch-level metrics; throws TrainingDiverged on NaN/Inf.
MetricsRecord train_step(Models& models, Optimizers& optimizers, const Matrix& x_source,
                         const std::vector<int>& y_source, const Matrix& x_target,
                         const TrainConfig& config, std::size_t step);

struct EquilibriumReport {
  double sigma_source = 0.0;
  double sigma_target = 0.0;
};

/// Means of sigma_{h_f(psi(x))}(f'(psi(x))) over each point set.
EquilibriumReport equilibrium_probe(const Models& models, const Matrix& x_source,
                                    const Matrix& x_target);

struct MarginProbeReport {
  double mu = 0.0;
  double threshold = 0.0;      // log(mu / (1 - mu))
  std::size_t rows = 0;
  std::size_t checked = 0;     // rows with some sigma_j >= mu
  std::size_t violations = 0;
  std::optional<double> min_slack;  // min over checked rows of gap - threshold
};

inline constexpr double kMarginProbeTolerance = 1e-12;

/// For every row whose largest softmax entry sigma_j reaches mu, checks
/// z_j - z_r >= log(mu / (1 - mu)) - tol for all r != j. mu in (1/2, 1).
MarginProbeReport margin_probe(const Matrix& logits, double mu);

struct MddDiagnostic {
  double witness = 0.0;  // disp_Q(f', f) - disp_P(f', f) at rho
  double probe = 0.0;    // max over the probe class
  std::size_t probe_argmax = 0;
};

/// disp_Q(f', f) - disp_P(f', f) at rho on psi-features.
double mdd_witness(const Models& models, const Matrix& x_source, const Matrix& x_target,
                   double rho);

/// Evaluated on psi-features of P and Q; the probe class scores features.
MddDiagnostic mdd_diagnostic(const Models& models, const FiniteScoringClass& probe_class,
                             const Matrix& x_source, const Matrix& x_target, double rho);

/// `size` linear heads on the feature space with N(0, scale^2) weights and
/// biases, drawn from Rng(seed).
FiniteScoringClass linear_probe_class(std::size_t feature_dim, int k, std::size_t size,
                                      double scale, std::uint64_t seed);

struct TrainResult {
  Models models;
  std::vector<MetricsRecord> log;      // evaluation points
  std::vector<MetricsRecord> history;  // batch metrics of every step
};

using MetricsCallback = std::function<void(const MetricsRecord&)>;

/// Full loop. Batches of config.batch_size are drawn with replacement from
/// Rng(derive_seed(seed, 1)), source then target, every step. Target labels
/// are never read; `target_eval` (labeled) only feeds target accuracy.
/// Evaluation runs after every eval_every-th update and after the last one.
TrainResult train(const TrainConfig& config, const LabeledSample& source,
                  const LabeledSample& target,
                  const std::optional<LabeledSample>& target_eval = std::nullopt,
                  const MetricsCallback& on_eval = {});

struct AuxiliaryFit {
  EquilibriumReport final;
  double objective = 0.0;
  double grad_norm = 0.0;  // max-abs f' gradient at the end
  std::size_t steps = 0;
};

/// Full-batch Nesterov ascent of the transfer objective in f' alone, with psi
/// and f frozen.
AuxiliaryFit train_auxiliary_only(Models& models, const Matrix& x_source, const Matrix& x_target,
                                  double gamma, std::size_t steps, double lr,
                                  double momentum = 0.9);

double accuracy(const Models& models, const LabeledSample& s);

// ---------------------------------------------------------------------------
// Serialisation

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);
std::string metrics_to_json(const MetricsRecord& record);

/// First line of a metrics log: schema tag, version and the full config.
std::string metrics_log_header(const TrainConfig& config);

/// {"format": "mddlab-checkpoint", "version": 1, "config": ..., "feature": ...,
///  "classifier": ..., "auxiliary": ...}; models in the nn checkpoint format.
void save_checkpoint(const Models& models, const TrainConfig& config,
                     const std::filesystem::path& path);
std::pair<Models, TrainConfig> load_checkpoint(const std::filesystem::path& path);

}  // namespace mddlab
