#include "mddlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mddlab/discrepancy.hpp"
#include "mddlab/rng.hpp"

namespace mddlab {

using nlohmann::json;

std::string to_string(Method m) { return m == Method::Mdd ? "mdd" : "source_only"; }

std::string to_string(LossMode m) {
  return m == LossMode::CombinedCe ? "combined_ce" : "margin_after";
}

Method method_from_string(const std::string& s) {
  if (s == "mdd") return Method::Mdd;
  if (s == "source_only") return Method::SourceOnly;
  throw InvalidArgument("unknown method '" + s + "' (expected mdd or source_only)");
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "combined_ce") return LossMode::CombinedCe;
  if (s == "margin_after") return LossMode::MarginAfter;
  throw InvalidArgument("unknown loss mode '" + s + "' (expected combined_ce or margin_after)");
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be nonnegative");
  if (!(eta_ramp_rate > 0.0)) throw InvalidArgument("eta ramp rate must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw InvalidArgument("lr0 must be positive");
  if (!(lr_alpha >= 0.0) || !(lr_beta >= 0.0)) throw InvalidArgument("lr schedule constants must be nonnegative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  if (!(classifier_lr_multiplier > 0.0)) throw InvalidArgument("classifier lr multiplier must be positive");
  if (feature_widths.empty()) throw InvalidArgument("feature extractor needs at least one layer");
  for (auto w : feature_widths)
    if (w == 0) throw InvalidArgument("layer widths must be positive");
  for (auto w : head_widths)
    if (w == 0) throw InvalidArgument("layer widths must be positive");
  if (loss_mode == LossMode::MarginAfter && !(gamma > 1.0))
    throw InvalidArgument("margin losses need gamma > 1 (rho = log gamma)");
  if (eval_every == 0) throw InvalidArgument("eval_every must be positive");
  if (eval_rho && !(*eval_rho > 0.0)) throw InvalidArgument("eval_rho must be positive");
  if (!(probe_scale > 0.0)) throw InvalidArgument("probe scale must be positive");
}

double TrainConfig::rho() const { return std::log(gamma); }

double TrainConfig::diagnostic_rho() const {
  if (eval_rho) return *eval_rho;
  return gamma > 1.0 ? std::log(gamma) : std::log(4.0);
}

double TrainConfig::eta_at(std::size_t step) const {
  if (!eta_ramp) return eta;
  const double p = steps == 0 ? 0.0 : static_cast<double>(step) / static_cast<double>(steps);
  return eta * (2.0 / (1.0 + std::exp(-eta_ramp_rate * p)) - 1.0);
}

double TrainConfig::lr_at(std::size_t step) const {
  return lr_schedule(step, steps, lr0, lr_alpha, lr_beta);
}

bool TrainConfig::margin_losses_at(std::size_t step) const {
  return loss_mode == LossMode::MarginAfter && step >= margin_after;
}

Models init_models(const TrainConfig& config, std::size_t input_dim, int k) {
  if (input_dim == 0) throw InvalidArgument("input dimension must be positive");
  if (k < 2) throw InvalidArgument("need at least 2 classes");
  Rng rng(derive_seed(config.seed, 0));
  std::vector<std::size_t> fw{input_dim};
  fw.insert(fw.end(), config.feature_widths.begin(), config.feature_widths.end());
  std::vector<std::size_t> hw{config.feature_widths.back()};
  hw.insert(hw.end(), config.head_widths.begin(), config.head_widths.end());
  hw.push_back(static_cast<std::size_t>(k));
  Models m;
  m.feature = MlpModel::glorot(fw, Activation::ReLU, Activation::ReLU, rng);
  m.classifier = MlpModel::glorot(hw, Activation::ReLU, Activation::Identity, rng);
  m.auxiliary = MlpModel::glorot(hw, Activation::ReLU, Activation::Identity, rng);
  return m;
}

namespace {

Matrix stack(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw InvalidArgument("source and target widths differ");
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

Gradients zero_gradients(const MlpModel& model, Eigen::Index batch_rows) {
  Gradients g;
  for (const auto& l : model.layers())
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  g.input = Matrix::Zero(batch_rows, static_cast<Eigen::Index>(model.input_dim()));
  return g;
}

bool finite(const Gradients& g) {
  for (const auto& l : g.layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

struct CeCore {
  double value = 0.0;
  Matrix upstream;  // same rows as logits; zero beyond `rows`
};

// Mean CE over the first `rows` rows of `logits`.
CeCore ce_core(const Matrix& logits, const std::vector<int>& labels, Eigen::Index rows) {
  CeCore c;
  c.upstream = Matrix::Zero(logits.rows(), logits.cols());
  const double w = 1.0 / static_cast<double>(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    const auto l = ce_loss(logits.row(i).transpose(), y);
    c.value += w * l.value;
    c.upstream.row(i) = (w * l.grad).transpose();
  }
  return c;
}

struct TransferCore {
  double objective = 0.0;  // D
  Matrix upstream;         // d(-D)/d(aux logits)
  double sigma_source = 0.0;
  double sigma_target = 0.0;
};

// Rows [0, ns) of `aux` are source, the rest target.
TransferCore transfer_core(const Matrix& aux, const std::vector<int>& pseudo, Eigen::Index ns,
                           double gamma, bool margin, double rho) {
  const Eigen::Index nt = aux.rows() - ns;
  if (ns == 0 || nt == 0) throw InvalidArgument("transfer loss needs nonempty source and target batches");
  TransferCore t;
  t.upstream.resize(aux.rows(), aux.cols());
  const double ws = 1.0 / static_cast<double>(ns);
  const double wt = 1.0 / static_cast<double>(nt);
  for (Eigen::Index i = 0; i < aux.rows(); ++i) {
    const bool is_source = i < ns;
    const int y = pseudo[static_cast<std::size_t>(i)];
    const Vector z = aux.row(i).transpose();
    const double sigma = softmax(z)(y);
    (is_source ? t.sigma_source : t.sigma_target) += (is_source ? ws : wt) * sigma;

    if (!margin) {
      if (is_source) {
        const auto l = ce_loss(z, y);
        t.objective -= gamma * ws * l.value;
        t.upstream.row(i) = (gamma * ws * l.grad).transpose();
      } else {
        const auto l = log1m_softmax(z, y);
        t.objective += wt * l.value;
        t.upstream.row(i) = (-wt * l.grad).transpose();
      }
      continue;
    }

    int r = -1;
    for (Eigen::Index c = 0; c < z.size(); ++c)
      if (c != y && (r < 0 || z(c) > z(r))) r = static_cast<int>(c);
    const double m = 0.5 * (z(y) - z(r));
    const double phi = ramp_loss(m, rho);
    const double dphi = ramp_loss_derivative(m, rho);
    Vector dm = Vector::Zero(z.size());
    dm(y) = 0.5;
    dm(r) = -0.5;
    if (is_source) {
      t.objective -= ws * phi;
      t.upstream.row(i) = (ws * dphi * dm).transpose();
    } else {
      t.objective += wt * phi;
      t.upstream.row(i) = (-wt * dphi * dm).transpose();
    }
  }
  return t;
}

}  // namespace

LossGradients source_loss(const Models& models, const Matrix& x, const std::vector<int>& labels) {
  if (x.rows() == 0) throw InvalidArgument("empty source batch");
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw InvalidArgument("one label per source row required");
  const auto psi = models.feature.forward(x);
  const auto fo = models.classifier.forward(psi.output);
  const auto k = static_cast<int>(fo.output.cols());
  for (int y : labels)
    if (y < 0 || y >= k) throw InvalidArgument("source batch has an unlabeled or invalid row");
  const auto ce = ce_core(fo.output, labels, x.rows());
  LossGradients out;
  out.value = ce.value;
  out.classifier = models.classifier.backward(fo.tape, ce.upstream);
  out.feature = models.feature.backward(psi.tape, out.classifier.input);
  return out;
}

TransferLoss transfer_loss(const Models& models, const Matrix& x_source, const Matrix& x_target,
                           double gamma, std::optional<double> margin_rho) {
  if (x_source.rows() == 0 || x_target.rows() == 0)
    throw InvalidArgument("transfer loss needs nonempty source and target batches");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (margin_rho && !(*margin_rho > 0.0)) throw InvalidArgument("rho must be positive");
  const Matrix x = stack(x_source, x_target);
  const auto psi = models.feature.forward(x);
  const auto pseudo = argmax_rows(models.classifier.predict(psi.output));
  const auto ao = models.auxiliary.forward(psi.output);
  const auto core = transfer_core(ao.output, pseudo, x_source.rows(), gamma, margin_rho.has_value(),
                                  margin_rho.value_or(0.0));
  TransferLoss out;
  out.objective = core.objective;
  out.sigma_source = core.sigma_source;
  out.sigma_target = core.sigma_target;
  out.grads.value = -core.objective;
  out.grads.auxiliary = models.auxiliary.backward(ao.tape, core.upstream);
  out.grads.feature = models.feature.backward(psi.tape, out.grads.auxiliary.input);
  out.grads.classifier = zero_gradients(models.classifier, x.rows());
  return out;
}

Optimizers init_optimizers(const Models& models, const TrainConfig& config) {
  return {make_optimizer_state(models.feature, config.momentum, 1.0),
          make_optimizer_state(models.classifier, config.momentum, config.classifier_lr_multiplier),
          make_optimizer_state(models.auxiliary, config.momentum, config.classifier_lr_multiplier)};
}

MetricsRecord train_step(Models& models, Optimizers& optimizers, const Matrix& x_source,
                         const std::vector<int>& y_source, const Matrix& x_target,
                         const TrainConfig& config, std::size_t step) {
  if (x_source.rows() == 0 || x_target.rows() == 0) throw InvalidArgument("empty batch");
  if (static_cast<std::size_t>(x_source.rows()) != y_source.size())
    throw InvalidArgument("one label per source row required");
  const Eigen::Index ns = x_source.rows();

  MetricsRecord rec;
  rec.step = step + 1;
  rec.lr = config.lr_at(step);
  rec.eta = config.method == Method::Mdd ? config.eta_at(step) : 0.0;
  rec.margin_losses = config.margin_losses_at(step);

  const Matrix x = stack(x_source, x_target);
  const auto psi = models.feature.forward(x);
  const auto fo = models.classifier.forward(psi.output);
  const auto k = static_cast<int>(fo.output.cols());
  for (int y : y_source)
    if (y < 0 || y >= k) throw InvalidArgument("source batch has an unlabeled or invalid row");

  const auto ce = ce_core(fo.output, y_source, ns);
  rec.source_ce = ce.value;
  auto g_classifier = models.classifier.backward(fo.tape, ce.upstream);
  Matrix feature_upstream = g_classifier.input;

  std::optional<Gradients> g_aux;
  if (config.method == Method::Mdd) {
    const auto pseudo = argmax_rows(fo.output);
    const auto ao = models.auxiliary.forward(psi.output);
    const auto core =
        transfer_core(ao.output, pseudo, ns, config.gamma, rec.margin_losses, config.rho());
    rec.transfer = core.objective;
    rec.sigma_source = core.sigma_source;
    rec.sigma_target = core.sigma_target;
    g_aux = models.auxiliary.backward(ao.tape, core.upstream);
    feature_upstream += grl(g_aux->input, rec.eta);
  } else {
    const auto pseudo = argmax_rows(fo.output);
    const auto aux = models.auxiliary.predict(psi.output);
    const auto core = transfer_core(aux, pseudo, ns, config.gamma, false, 0.0);
    rec.transfer = core.objective;
    rec.sigma_source = core.sigma_source;
    rec.sigma_target = core.sigma_target;
  }
  const auto g_feature = models.feature.backward(psi.tape, feature_upstream);

  if (!std::isfinite(rec.source_ce) || !std::isfinite(rec.transfer) || !finite(g_classifier) ||
      !finite(g_feature) || (g_aux && !finite(*g_aux)))
    throw TrainingDiverged(fmt::format("non-finite loss or gradient at step {}", step), rec);

  sgd_nesterov_step(optimizers.feature, models.feature, g_feature, rec.lr);
  sgd_nesterov_step(optimizers.classifier, models.classifier, g_classifier, rec.lr);
  if (g_aux) sgd_nesterov_step(optimizers.auxiliary, models.auxiliary, *g_aux, rec.lr);

  if (!models.feature.all_finite() || !models.classifier.all_finite() ||
      !models.auxiliary.all_finite())
    throw TrainingDiverged(fmt::format("non-finite parameters after step {}", step), rec);
  return rec;
}

EquilibriumReport equilibrium_probe(const Models& models, const Matrix& x_source,
                                    const Matrix& x_target) {
  auto mean_sigma = [&](const Matrix& x) {
    if (x.rows() == 0) throw InvalidArgument("empty point set");
    const Matrix feats = models.feature.predict(x);
    const auto pseudo = argmax_rows(models.classifier.predict(feats));
    const Matrix aux = models.auxiliary.predict(feats);
    double s = 0.0;
    for (Eigen::Index i = 0; i < aux.rows(); ++i)
      s += softmax(aux.row(i).transpose())(pseudo[static_cast<std::size_t>(i)]);
    return s / static_cast<double>(aux.rows());
  };
  return {mean_sigma(x_source), mean_sigma(x_target)};
}

MarginProbeReport margin_probe(const Matrix& logits, double mu) {
  if (!(mu > 0.5 && mu < 1.0)) throw InvalidArgument("mu must lie in (1/2, 1)");
  if (logits.cols() < 2) throw InvalidArgument("need at least 2 logits per row");
  MarginProbeReport r;
  r.mu = mu;
  r.threshold = std::log(mu / (1.0 - mu));
  r.rows = static_cast<std::size_t>(logits.rows());
  const double tol = kMarginProbeTolerance * std::max(1.0, std::abs(r.threshold));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Vector z = logits.row(i).transpose();
    const Vector s = softmax(z);
    Eigen::Index j = 0;
    s.maxCoeff(&j);
    if (s(j) < mu - kMarginProbeTolerance) continue;
    ++r.checked;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < z.size(); ++c)
      if (c != j) gap = std::min(gap, z(j) - z(c));
    const double slack = gap - r.threshold;
    if (slack < -tol) ++r.violations;
    r.min_slack = r.min_slack ? std::min(*r.min_slack, slack) : slack;
  }
  return r;
}

namespace {

double witness_gap(const Models& models, const Matrix& fp, const Matrix& fq,
                   const std::vector<int>& anchor_p, const std::vector<int>& anchor_q, double rho) {
  return tables::margin_disparity(models.auxiliary.predict(fq), anchor_q, rho) -
         tables::margin_disparity(models.auxiliary.predict(fp), anchor_p, rho);
}

}  // namespace

double mdd_witness(const Models& models, const Matrix& x_source, const Matrix& x_target,
                   double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (x_source.rows() == 0 || x_target.rows() == 0) throw InvalidArgument("empty point set");
  const Matrix fp = models.feature.predict(x_source);
  const Matrix fq = models.feature.predict(x_target);
  return witness_gap(models, fp, fq, argmax_rows(models.classifier.predict(fp)),
                     argmax_rows(models.classifier.predict(fq)), rho);
}

MddDiagnostic mdd_diagnostic(const Models& models, const FiniteScoringClass& probe_class,
                             const Matrix& x_source, const Matrix& x_target, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (x_source.rows() == 0 || x_target.rows() == 0) throw InvalidArgument("empty point set");
  const Matrix fp = models.feature.predict(x_source);
  const Matrix fq = models.feature.predict(x_target);
  const auto anchor_p = argmax_rows(models.classifier.predict(fp));
  const auto anchor_q = argmax_rows(models.classifier.predict(fq));
  MddDiagnostic d;
  d.witness = witness_gap(models, fp, fq, anchor_p, anchor_q, rho);
  if (probe_class.input_dim() != static_cast<std::size_t>(fp.cols()) ||
      probe_class.num_classes() != static_cast<int>(models.classifier.output_dim()))
    throw InvalidArgument("probe class does not match the feature space or class count");
  const auto report =
      tables::mdd(anchor_p, anchor_q, probe_class.score_all(fp), probe_class.score_all(fq), rho);
  d.probe = report.value;
  d.probe_argmax = report.argmax_index;
  return d;
}

FiniteScoringClass linear_probe_class(std::size_t feature_dim, int k, std::size_t size,
                                      double scale, std::uint64_t seed) {
  if (size == 0) throw InvalidArgument("probe class must be nonempty");
  if (feature_dim == 0 || k < 2) throw InvalidArgument("bad probe class shape");
  Rng rng(seed);
  std::vector<ScorerPtr> members;
  members.reserve(size);
  for (std::size_t j = 0; j < size; ++j) {
    Matrix w(k, static_cast<Eigen::Index>(feature_dim));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * rng.normal();
    Vector b(k);
    for (int r = 0; r < k; ++r) b(r) = scale * rng.normal();
    members.push_back(std::make_shared<LinearScorer>(std::move(w), std::move(b)));
  }
  return FiniteScoringClass(std::move(members));
}

double accuracy(const Models& models, const LabeledSample& s) {
  const auto y = s.require_labels();
  const auto pred = argmax_rows(models.classifier.predict(models.feature.predict(s.features())));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

TrainResult train(const TrainConfig& config, const LabeledSample& source,
                  const LabeledSample& target, const std::optional<LabeledSample>& target_eval,
                  const MetricsCallback& on_eval) {
  config.validate();
  const auto y_all = source.require_labels();
  if (source.dim() != target.dim()) throw InvalidArgument("source and target dimensions differ");
  if (source.num_classes() != target.num_classes())
    throw InvalidArgument("source and target class counts differ");
  if (target_eval && (target_eval->dim() != source.dim() || !target_eval->fully_labeled()))
    throw InvalidArgument("target evaluation sample must be labeled and match the input width");

  TrainResult result;
  result.models = init_models(config, source.dim(), source.num_classes());
  if (config.steps == 0) return result;

  auto optimizers = init_optimizers(result.models, config);
  Rng batch_rng(derive_seed(config.seed, 1));
  std::optional<FiniteScoringClass> probe;
  if (config.probe_size > 0)
    probe = linear_probe_class(config.feature_widths.back(), source.num_classes(), config.probe_size,
                               config.probe_scale, derive_seed(config.seed, 2));

  const auto bs = static_cast<Eigen::Index>(config.batch_size);
  const auto d = static_cast<Eigen::Index>(source.dim());
  Matrix xs(bs, d), xt(bs, d);
  std::vector<int> ys(config.batch_size);
  const double rho = config.diagnostic_rho();

  for (std::size_t step = 0; step < config.steps; ++step) {
    for (Eigen::Index i = 0; i < bs; ++i) {
      const auto r = batch_rng.below(source.size());
      xs.row(i) = source.features().row(static_cast<Eigen::Index>(r));
      ys[static_cast<std::size_t>(i)] = y_all[r];
    }
    for (Eigen::Index i = 0; i < bs; ++i)
      xt.row(i) = target.features().row(static_cast<Eigen::Index>(batch_rng.below(target.size())));

    auto rec = train_step(result.models, optimizers, xs, ys, xt, config, step);
    result.history.push_back(rec);

    if (rec.step % config.eval_every == 0 || rec.step == config.steps) {
      rec.source_accuracy = accuracy(result.models, source);
      if (target_eval) rec.target_accuracy = accuracy(result.models, *target_eval);
      const auto eq = equilibrium_probe(result.models, source.features(), target.features());
      rec.eval_sigma_source = eq.sigma_source;
      rec.eval_sigma_target = eq.sigma_target;
      if (probe) {
        const auto diag =
            mdd_diagnostic(result.models, *probe, source.features(), target.features(), rho);
        rec.mdd_witness = diag.witness;
        rec.mdd_probe = diag.probe;
      } else {
        rec.mdd_witness = mdd_witness(result.models, source.features(), target.features(), rho);
      }
      result.log.push_back(rec);
      if (on_eval) on_eval(rec);
    }
  }
  return result;
}

AuxiliaryFit train_auxiliary_only(Models& models, const Matrix& x_source, const Matrix& x_target,
                                  double gamma, std::size_t steps, double lr, double momentum) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(lr > 0.0)) throw InvalidArgument("lr must be positive");
  const Matrix feats = models.feature.predict(stack(x_source, x_target));
  const auto pseudo = argmax_rows(models.classifier.predict(feats));
  auto state = make_optimizer_state(models.auxiliary, momentum, 1.0);

  AuxiliaryFit fit;
  for (std::size_t s = 0; s <= steps; ++s) {
    const auto ao = models.auxiliary.forward(feats);
    const auto core = transfer_core(ao.output, pseudo, x_source.rows(), gamma, false, 0.0);
    const auto g = models.auxiliary.backward(ao.tape, core.upstream);
    if (!std::isfinite(core.objective) || !finite(g))
      throw NumericError(fmt::format("non-finite auxiliary objective at step {}", s));
    if (s == steps) {
      fit.objective = core.objective;
      fit.grad_norm = flatten(g).cwiseAbs().maxCoeff();
      fit.final = {core.sigma_source, core.sigma_target};
      break;
    }
    sgd_nesterov_step(state, models.auxiliary, g, lr);
  }
  fit.steps = steps;
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

json config_json(const TrainConfig& c) {
  return {{"method", to_string(c.method)},
          {"gamma", c.gamma},
          {"eta", c.eta},
          {"eta_ramp", c.eta_ramp},
          {"eta_ramp_rate", c.eta_ramp_rate},
          {"steps", c.steps},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"lr0", c.lr0},
          {"lr_alpha", c.lr_alpha},
          {"lr_beta", c.lr_beta},
          {"momentum", c.momentum},
          {"classifier_lr_multiplier", c.classifier_lr_multiplier},
          {"feature_widths", c.feature_widths},
          {"head_widths", c.head_widths},
          {"loss_mode", to_string(c.loss_mode)},
          {"margin_after", c.margin_after},
          {"eval_every", c.eval_every},
          {"eval_rho", c.eval_rho ? json(*c.eval_rho) : json(nullptr)},
          {"probe_size", c.probe_size},
          {"probe_scale", c.probe_scale}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.method = method_from_string(j.at("method").get<std::string>());
  c.gamma = j.at("gamma").get<double>();
  c.eta = j.at("eta").get<double>();
  c.eta_ramp = j.at("eta_ramp").get<bool>();
  c.eta_ramp_rate = j.at("eta_ramp_rate").get<double>();
  c.steps = j.at("steps").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lr0 = j.at("lr0").get<double>();
  c.lr_alpha = j.at("lr_alpha").get<double>();
  c.lr_beta = j.at("lr_beta").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.classifier_lr_multiplier = j.at("classifier_lr_multiplier").get<double>();
  c.feature_widths = j.at("feature_widths").get<std::vector<std::size_t>>();
  c.head_widths = j.at("head_widths").get<std::vector<std::size_t>>();
  c.loss_mode = loss_mode_from_string(j.at("loss_mode").get<std::string>());
  c.margin_after = j.at("margin_after").get<std::size_t>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
  if (!j.at("eval_rho").is_null()) c.eval_rho = j.at("eval_rho").get<double>();
  c.probe_size = j.at("probe_size").get<std::size_t>();
  c.probe_scale = j.at("probe_scale").get<double>();
  return c;
}

constexpr const char* kCheckpointFormat = "mddlab-checkpoint";
constexpr const char* kMetricsSchema = "mddlab-metrics";
constexpr int kFormatVersion = 1;

}  // namespace

std::string config_to_json(const TrainConfig& config) { return config_json(config).dump(); }

TrainConfig config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("train config: ") + e.what());
  }
}

std::string metrics_to_json(const MetricsRecord& r) {
  json j = {{"step", r.step},
            {"lr", r.lr},
            {"eta", r.eta},
            {"source_ce", r.source_ce},
            {"transfer", r.transfer},
            {"sigma_source", r.sigma_source},
            {"sigma_target", r.sigma_target},
            {"margin_losses", r.margin_losses}};
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("source_accuracy", r.source_accuracy);
  put("target_accuracy", r.target_accuracy);
  put("eval_sigma_source", r.eval_sigma_source);
  put("eval_sigma_target", r.eval_sigma_target);
  put("mdd_witness", r.mdd_witness);
  put("mdd_probe", r.mdd_probe);
  return j.dump();
}

std::string metrics_log_header(const TrainConfig& config) {
  return json{{"schema", kMetricsSchema}, {"version", kFormatVersion}, {"config", config_json(config)}}
      .dump();
}

void save_checkpoint(const Models& models, const TrainConfig& config,
                     const std::filesystem::path& path) {
  json doc = {{"format", kCheckpointFormat},
              {"version", kFormatVersion},
              {"config", config_json(config)},
              {"feature", json::parse(model_to_json(models.feature))},
              {"classifier", json::parse(model_to_json(models.classifier))},
              {"auxiliary", json::parse(model_to_json(models.auxiliary))}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
}

std::pair<Models, TrainConfig> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    const auto doc = json::parse(ss.str());
    if (doc.at("format").get<std::string>() != kCheckpointFormat)
      throw ParseError(0, "not a training checkpoint");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw ParseError(0, "unsupported checkpoint version");
    Models m;
    m.feature = model_from_json(doc.at("feature").dump());
    m.classifier = model_from_json(doc.at("classifier").dump());
    m.auxiliary = model_from_json(doc.at("auxiliary").dump());
    return {std::move(m), config_from(doc.at("config"))};
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace mddlab
