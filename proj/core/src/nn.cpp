#include "mddlab/nn.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mddlab/error.hpp"

namespace mddlab {

namespace {

std::atomic<std::uint64_t> g_stamp{0};

std::uint64_t next_stamp() noexcept { return ++g_stamp; }

void apply_activation(Matrix& m, Activation a) {
  if (a == Activation::ReLU) m = m.cwiseMax(0.0);
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  throw InvalidArgument("unknown activation '" + name + "'");
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("model needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rows() == 0 || l.weight.cols() == 0)
      throw InvalidArgument(fmt::format("layer {} has an empty weight matrix", i));
    if (l.bias.size() != l.weight.rows())
      throw InvalidArgument(fmt::format("layer {} bias length does not match its output", i));
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim())
      throw InvalidArgument(fmt::format("layer {} input does not chain with layer {}", i, i - 1));
  }
  if (!all_finite()) throw InvalidArgument("model parameters must be finite");
  restamp();
}

MlpModel::MlpModel(const MlpModel& other) : layers_(other.layers_) { restamp(); }

MlpModel& MlpModel::operator=(const MlpModel& other) {
  if (this != &other) {
    layers_ = other.layers_;
    restamp();
  }
  return *this;
}

MlpModel::MlpModel(MlpModel&& other) noexcept : layers_(std::move(other.layers_)) {
  restamp();
  other.restamp();
}

MlpModel& MlpModel::operator=(MlpModel&& other) noexcept {
  layers_ = std::move(other.layers_);
  restamp();
  other.restamp();
  return *this;
}

void MlpModel::restamp() noexcept { stamp_ = next_stamp(); }

MlpModel MlpModel::glorot(const std::vector<std::size_t>& widths, Activation hidden,
                          Activation output, Rng& rng) {
  if (widths.size() < 2) throw InvalidArgument("need at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(widths[i]);
    const auto out = static_cast<Eigen::Index>(widths[i + 1]);
    if (in == 0 || out == 0) throw InvalidArgument("layer widths must be positive");
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer l;
    l.weight.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = rng.uniform(-a, a);
    l.bias = Vector::Zero(out);
    l.activation = i + 2 == widths.size() ? output : hidden;
    layers.push_back(std::move(l));
  }
  return MlpModel(std::move(layers));
}

std::size_t MlpModel::input_dim() const {
  if (layers_.empty()) throw InvalidArgument("empty model");
  return layers_.front().in_dim();
}

std::size_t MlpModel::output_dim() const {
  if (layers_.empty()) throw InvalidArgument("empty model");
  return layers_.back().out_dim();
}

std::size_t MlpModel::num_parameters() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return total;
}

DenseLayer& MlpModel::mutable_layer(std::size_t i) {
  restamp();
  return layers_.at(i);
}

ForwardResult MlpModel::forward(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim())
    throw InvalidArgument(
        fmt::format("input width {} does not match model input {}", x.cols(), input_dim()));
  ForwardResult r;
  r.tape.stamp_ = stamp_;
  r.tape.inputs_.reserve(layers_.size());
  r.tape.pre_.reserve(layers_.size());
  Matrix a = x;
  for (const auto& l : layers_) {
    Matrix z = a * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    r.tape.inputs_.push_back(std::move(a));
    a = z;
    apply_activation(a, l.activation);
    r.tape.pre_.push_back(std::move(z));
  }
  r.output = std::move(a);
  return r;
}

Matrix MlpModel::predict(const Matrix& x) const { return forward(x).output; }

Gradients MlpModel::backward(const GradTape& tape, const Matrix& upstream) const {
  if (tape.stamp_ != stamp_ || tape.inputs_.size() != layers_.size())
    throw InvalidArgument("stale tape: parameters changed or tape belongs to another model");
  const auto& last = tape.pre_.back();
  if (upstream.rows() != last.rows() || upstream.cols() != last.cols())
    throw InvalidArgument("upstream gradient shape does not match the model output");

  Gradients g;
  g.layers.resize(layers_.size());
  Matrix delta = upstream;
  for (std::size_t ii = layers_.size(); ii-- > 0;) {
    const auto& l = layers_[ii];
    if (l.activation == Activation::ReLU)
      delta = (tape.pre_[ii].array() > 0.0).select(delta, 0.0);
    g.layers[ii].weight = delta.transpose() * tape.inputs_[ii];
    g.layers[ii].bias = delta.colwise().sum().transpose();
    delta = delta * l.weight;
  }
  g.input = std::move(delta);
  return g;
}

Vector MlpModel::flatten() const {
  Vector out(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index pos = 0;
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out(pos++) = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out(pos++) = l.bias(r);
  }
  return out;
}

void MlpModel::assign(const Vector& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_parameters())
    throw InvalidArgument("flat parameter vector has the wrong length");
  Eigen::Index pos = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat(pos++);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat(pos++);
  }
  restamp();
}

bool MlpModel::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias)
      return false;
  }
  return true;
}

Vector flatten(const Gradients& g) {
  Eigen::Index total = 0;
  for (const auto& l : g.layers) total += l.weight.size() + l.bias.size();
  Vector out(total);
  Eigen::Index pos = 0;
  for (const auto& l : g.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out(pos++) = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out(pos++) = l.bias(r);
  }
  return out;
}

Matrix grl(const Matrix& upstream, double coeff) {
  if (!(coeff >= 0.0)) throw InvalidArgument("GRL coefficient must be nonnegative");
  if (coeff == 0.0) return Matrix::Zero(upstream.rows(), upstream.cols());
  return -coeff * upstream;
}

// ---------------------------------------------------------------------------

Vector softmax(const Vector& z) {
  if (z.size() == 0) throw InvalidArgument("softmax of an empty vector");
  const Vector e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Matrix softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) out.row(r) = softmax(z.row(r).transpose()).transpose();
  return out;
}

double logsumexp(const Vector& z) {
  if (z.size() == 0) throw InvalidArgument("logsumexp of an empty vector");
  const double m = z.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((z.array() - m).exp().sum());
}

namespace {

void check_class(const Vector& z, int y) {
  if (y < 0 || y >= z.size())
    throw InvalidArgument(fmt::format("class {} outside [0, {})", y, z.size()));
}

}  // namespace

LossValue ce_loss(const Vector& z, int y) {
  check_class(z, y);
  LossValue out;
  out.value = logsumexp(z) - z(y);
  out.grad = softmax(z);
  out.grad(y) -= 1.0;
  return out;
}

LossValue log1m_softmax(const Vector& z, int y) {
  check_class(z, y);
  if (z.size() < 2) throw InvalidArgument("log(1 - softmax) is undefined for a single class");
  Vector rest(z.size() - 1);
  for (Eigen::Index i = 0, j = 0; i < z.size(); ++i)
    if (i != y) rest(j++) = z(i);
  LossValue out;
  out.value = logsumexp(rest) - logsumexp(z);
  const Vector s = softmax(z);
  const Vector q = softmax(rest);
  out.grad = -s;
  for (Eigen::Index i = 0, j = 0; i < z.size(); ++i)
    if (i != y) out.grad(i) += q(j++);
  return out;
}

// ---------------------------------------------------------------------------

OptimizerState make_optimizer_state(const MlpModel& model, double momentum,
                                    double lr_multiplier) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  if (!(lr_multiplier > 0.0)) throw InvalidArgument("lr multiplier must be positive");
  OptimizerState s;
  s.momentum = momentum;
  s.lr_multiplier = lr_multiplier;
  for (const auto& l : model.layers())
    s.velocity.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return s;
}

void sgd_nesterov_step(OptimizerState& state, MlpModel& model, const Gradients& grads,
                       double lr_base) {
  if (state.velocity.size() != model.num_layers() || grads.layers.size() != model.num_layers())
    throw InvalidArgument("optimizer state, gradients and model disagree on layer count");
  const double lr = lr_base * state.lr_multiplier;
  const double mu = state.momentum;
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    const auto& l = model.layer(i);
    const auto& g = grads.layers[i];
    auto& v = state.velocity[i];
    if (g.weight.rows() != l.weight.rows() || g.weight.cols() != l.weight.cols() ||
        g.bias.size() != l.bias.size() || v.weight.rows() != l.weight.rows() ||
        v.weight.cols() != l.weight.cols())
      throw InvalidArgument(fmt::format("shape mismatch in layer {}", i));
  }
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    auto& l = model.mutable_layer(i);
    const auto& g = grads.layers[i];
    auto& v = state.velocity[i];
    v.weight = mu * v.weight - lr * g.weight;
    v.bias = mu * v.bias - lr * g.bias;
    l.weight += mu * v.weight - lr * g.weight;
    l.bias += mu * v.bias - lr * g.bias;
  }
  ++state.steps;
}

double lr_schedule(std::size_t step, std::size_t total, double lr0, double alpha, double beta) {
  const double p = total == 0 ? 0.0 : static_cast<double>(step) / static_cast<double>(total);
  return lr0 * std::pow(1.0 + alpha * p, -beta);
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelFormat = "mddlab-mlp";
constexpr int kModelVersion = 1;

}  // namespace

std::string model_to_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> w(l.weight.data(), l.weight.data() + l.weight.size());
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"activation", to_string(l.activation)},
                      {"weight", w},
                      {"bias", b}});
  }
  nlohmann::json doc = {{"format", kModelFormat}, {"version", kModelVersion}, {"layers", layers}};
  return doc.dump();
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("model checkpoint: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kModelFormat)
      throw ParseError(0, "not a model checkpoint");
    if (doc.at("version").get<int>() != kModelVersion)
      throw ParseError(0, "unsupported model checkpoint version");
    std::vector<DenseLayer> layers;
    for (const auto& jl : doc.at("layers")) {
      const auto in = jl.at("in").get<Eigen::Index>();
      const auto out = jl.at("out").get<Eigen::Index>();
      const auto w = jl.at("weight").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != in * out || static_cast<Eigen::Index>(b.size()) != out)
        throw ParseError(0, "layer parameter count does not match its shape");
      DenseLayer l;
      l.weight = Eigen::Map<const Matrix>(w.data(), out, in);
      l.bias = Eigen::Map<const Vector>(b.data(), out);
      l.activation = activation_from_string(jl.at("activation").get<std::string>());
      layers.push_back(std::move(l));
    }
    return MlpModel(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("model checkpoint: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << model_to_json(model) << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

// ---------------------------------------------------------------------------

MlpScorer::MlpScorer(std::shared_ptr<const MlpModel> features, std::shared_ptr<const MlpModel> head)
    : features_(std::move(features)), head_(std::move(head)) {
  if (!head_) throw InvalidArgument("scorer needs a head model");
  if (head_->output_dim() < 2) throw InvalidArgument("head must produce at least 2 scores");
  if (features_ && features_->output_dim() != head_->input_dim())
    throw InvalidArgument("feature extractor output does not match head input");
}

int MlpScorer::num_classes() const { return static_cast<int>(head_->output_dim()); }

std::size_t MlpScorer::input_dim() const {
  return features_ ? features_->input_dim() : head_->input_dim();
}

Matrix MlpScorer::score_batch(const Matrix& x) const {
  check_input(x);
  return features_ ? head_->predict(features_->predict(x)) : head_->predict(x);
}

}  // namespace mddlab
