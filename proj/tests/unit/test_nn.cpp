#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mddlab/error.hpp"
#include "mddlab/nn.hpp"
#include "oracles.hpp"

using namespace mddlab;

namespace {

double weighted_output(const MlpModel& m, const Matrix& x, const Matrix& weight) {
  return (m.predict(x).array() * weight.array()).sum();
}

MlpModel scalar_model(double w, double b) {
  DenseLayer l;
  l.weight = Matrix::Constant(1, 1, w);
  l.bias = Vector::Constant(1, b);
  return MlpModel({l});
}

}  // namespace

TEST(Activation, StringRoundTrip) {
  for (auto a : {Activation::Identity, Activation::ReLU})
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  EXPECT_THROW(activation_from_string("tanh"), InvalidArgument);
}

TEST(Mlp, GlorotShapesAndRange) {
  Rng rng(1);
  const auto m = MlpModel::glorot({2, 32, 16}, Activation::ReLU, Activation::ReLU, rng);
  ASSERT_EQ(m.num_layers(), 2U);
  EXPECT_EQ(m.input_dim(), 2U);
  EXPECT_EQ(m.output_dim(), 16U);
  EXPECT_EQ(m.num_parameters(), 2U * 32 + 32 + 32 * 16 + 16);
  const double a0 = std::sqrt(6.0 / 34.0);
  EXPECT_LE(m.layer(0).weight.cwiseAbs().maxCoeff(), a0);
  EXPECT_TRUE(m.layer(0).bias.isZero());
  Rng again(1);
  EXPECT_TRUE(m == MlpModel::glorot({2, 32, 16}, Activation::ReLU, Activation::ReLU, again));
  EXPECT_THROW(MlpModel::glorot({2}, Activation::ReLU, Activation::ReLU, rng), InvalidArgument);
  EXPECT_THROW(MlpModel::glorot({2, 0, 1}, Activation::ReLU, Activation::ReLU, rng), InvalidArgument);
}

TEST(Mlp, ForwardByHand) {
  DenseLayer l0;
  l0.weight.resize(2, 2);
  l0.weight << 1, -1, 2, 0;
  l0.bias = Vector{{0.5, -3.0}};
  l0.activation = Activation::ReLU;
  DenseLayer l1;
  l1.weight.resize(1, 2);
  l1.weight << 1, 1;
  l1.bias = Vector{{1.0}};
  const MlpModel m({l0, l1});
  Matrix x(2, 2);
  x << 3, 1, 1, 2;
  const Matrix y = m.predict(x);
  EXPECT_DOUBLE_EQ(y(0, 0), 6.5);  // relu(2.5, 3) summed plus 1
  EXPECT_DOUBLE_EQ(y(1, 0), 1.0);  // relu(-0.5, -1) = 0
}

TEST(Mlp, RejectsBadLayers) {
  DenseLayer a;
  a.weight = Matrix::Ones(3, 2);
  a.bias = Vector::Zero(3);
  DenseLayer b;
  b.weight = Matrix::Ones(1, 2);
  b.bias = Vector::Zero(1);
  EXPECT_THROW(MlpModel({a, b}), InvalidArgument);
  DenseLayer c = a;
  c.bias = Vector::Zero(2);
  EXPECT_THROW(MlpModel({c}), InvalidArgument);
  EXPECT_THROW(MlpModel(std::vector<DenseLayer>{}), InvalidArgument);
  DenseLayer d = a;
  d.weight(0, 0) = std::nan("");
  EXPECT_THROW(MlpModel({d}), InvalidArgument);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto out_act = seed % 2 == 0 ? Activation::Identity : Activation::ReLU;
    MlpModel m = MlpModel::glorot({3, 5, 4, 2}, Activation::ReLU, out_act, rng);
    fixture::randomize_biases(m, rng);
    const Matrix x = fixture::gaussian_matrix(rng, 6, 3);
    const Matrix w = fixture::gaussian_matrix(rng, 6, 2);
    const auto fwd = m.forward(x);
    const auto g = m.backward(fwd.tape, w);
    const Vector theta = m.flatten();
    const Vector fd = oracle::central_difference(
        [&](const Vector& t) {
          MlpModel probe = m;
          probe.assign(t);
          return weighted_output(probe, x, w);
        },
        theta);
    EXPECT_LT(oracle::relative_error(flatten(g), fd), 1e-6) << "seed " << seed;
    const Vector xin = Eigen::Map<const Vector>(x.data(), x.size());
    const Vector fdx = oracle::central_difference(
        [&](const Vector& v) {
          const Matrix xv = Eigen::Map<const Matrix>(v.data(), x.rows(), x.cols());
          return weighted_output(m, xv, w);
        },
        xin);
    const Vector gx = Eigen::Map<const Vector>(g.input.data(), g.input.size());
    EXPECT_LT(oracle::relative_error(gx, fdx), 1e-6) << "seed " << seed;
  }
}

TEST(Mlp, StaleTapeIsRejected) {
  Rng rng(2);
  MlpModel m = MlpModel::glorot({2, 3, 2}, Activation::ReLU, Activation::Identity, rng);
  const Matrix x = fixture::gaussian_matrix(rng, 4, 2);
  const auto fwd = m.forward(x);
  MlpModel other = m;
  EXPECT_THROW(other.backward(fwd.tape, Matrix::Ones(4, 2)), InvalidArgument);
  EXPECT_NO_THROW(m.backward(fwd.tape, Matrix::Ones(4, 2)));
  EXPECT_THROW(m.backward(fwd.tape, Matrix::Ones(3, 2)), InvalidArgument);
  m.mutable_layer(0).bias(0) += 1.0;
  EXPECT_THROW(m.backward(fwd.tape, Matrix::Ones(4, 2)), InvalidArgument);
}

TEST(Mlp, FlattenAssignRoundTrip) {
  Rng rng(3);
  MlpModel m = MlpModel::glorot({2, 4, 3}, Activation::ReLU, Activation::Identity, rng);
  const MlpModel copy = m;
  Vector theta = m.flatten();
  ASSERT_EQ(static_cast<std::size_t>(theta.size()), m.num_parameters());
  EXPECT_EQ(theta(1), m.layer(0).weight(0, 1));
  EXPECT_EQ(theta(8), m.layer(0).bias(0));
  m.assign(Vector::Zero(theta.size()));
  EXPECT_FALSE(m == copy);
  m.assign(theta);
  EXPECT_TRUE(m == copy);
  EXPECT_THROW(m.assign(Vector::Zero(3)), InvalidArgument);
}

TEST(Grl, ForwardIdentityBackwardReversed) {
  Rng rng(4);
  const Matrix g = fixture::gaussian_matrix(rng, 3, 2);
  EXPECT_TRUE(grl(g, 0.3) == -0.3 * g);
  EXPECT_TRUE(grl(g, 0.0).isZero());
  EXPECT_THROW(grl(g, -0.1), InvalidArgument);
}

TEST(Grl, CompositionScalesFeatureGradient) {
  // L(x) = sum w .* head(feat(x)); routing the head's input gradient through
  // grl(., c) gives feat gradients equal to -c times the plain ones.
  Rng rng(5);
  const auto feat = MlpModel::glorot({2, 4, 3}, Activation::ReLU, Activation::ReLU, rng);
  const auto head = MlpModel::glorot({3, 2}, Activation::Identity, Activation::Identity, rng);
  const Matrix x = fixture::gaussian_matrix(rng, 5, 2);
  const Matrix w = fixture::gaussian_matrix(rng, 5, 2);
  const auto ff = feat.forward(x);
  const auto hf = head.forward(ff.output);
  const auto hg = head.backward(hf.tape, w);
  const Vector plain = flatten(feat.backward(ff.tape, hg.input));
  const Vector reversed = flatten(feat.backward(ff.tape, grl(hg.input, 0.7)));
  EXPECT_LT(oracle::relative_error(reversed, -0.7 * plain), 1e-14);
}

TEST(Softmax, NormalisedAndShiftInvariant) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const Vector z = fixture::gaussian_matrix(rng, 4, 1).col(0) * 10.0;
    const Vector p = softmax(z);
    EXPECT_NEAR(p.sum(), 1.0, 1e-15);
    EXPECT_TRUE((p.array() >= 0.0).all());
    EXPECT_LT((softmax(z.array() + 123.0) - p).cwiseAbs().maxCoeff(), 1e-14);
  }
  const Vector big = softmax(Vector{{1000.0, 0.0}});
  EXPECT_EQ(big(0), 1.0);
  EXPECT_TRUE(std::isfinite(big(1)));
  EXPECT_NEAR(logsumexp(Vector{{1000.0, 1000.0}}), 1000.0 + std::log(2.0), 1e-12);
  const Matrix rows = softmax_rows(Matrix{{0.0, 0.0}, {1.0, 3.0}});
  EXPECT_DOUBLE_EQ(rows(0, 0), 0.5);
  EXPECT_NEAR(rows(1, 1), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(CrossEntropy, UniformLogitsGiveLogK) {
  for (int k = 2; k <= 5; ++k) {
    const auto l = ce_loss(Vector::Constant(k, 0.7), 1);
    EXPECT_NEAR(l.value, std::log(static_cast<double>(k)), 1e-15);
    EXPECT_NEAR(l.grad(1), 1.0 / k - 1.0, 1e-15);
  }
  EXPECT_THROW(ce_loss(Vector::Zero(3), 3), InvalidArgument);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Vector z = fixture::gaussian_matrix(rng, 3, 1).col(0) * 3.0;
    const int y = static_cast<int>(rng.below(3));
    const auto l = ce_loss(z, y);
    const Vector fd = oracle::central_difference([&](const Vector& v) { return ce_loss(v, y).value; }, z);
    EXPECT_LT(oracle::relative_error(l.grad, fd), 1e-7);
  }
}

TEST(Log1mSoftmax, MatchesDirectFormulaAndGradient) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const Vector z = fixture::gaussian_matrix(rng, 3, 1).col(0) * 2.0;
    const int y = static_cast<int>(rng.below(3));
    const auto l = log1m_softmax(z, y);
    EXPECT_NEAR(l.value, std::log(1.0 - softmax(z)(y)), 1e-12);
    const Vector fd =
        oracle::central_difference([&](const Vector& v) { return log1m_softmax(v, y).value; }, z);
    EXPECT_LT(oracle::relative_error(l.grad, fd), 1e-7);
  }
}

TEST(Log1mSoftmax, StableWhenClassDominates) {
  const auto l = log1m_softmax(Vector{{50.0, 0.0}}, 0);
  EXPECT_NEAR(l.value, -50.0, 1e-12);
  EXPECT_TRUE(l.grad.allFinite());
  EXPECT_THROW(log1m_softmax(Vector{{1.0}}, 0), InvalidArgument);
}

TEST(Nesterov, TwoStepsByHand) {
  MlpModel m = scalar_model(1.0, 0.0);
  auto state = make_optimizer_state(m, 0.9);
  Gradients g;
  g.layers.push_back({Matrix::Constant(1, 1, 2.0), Vector::Zero(1)});
  sgd_nesterov_step(state, m, g, 0.1);
  EXPECT_NEAR(m.layer(0).weight(0, 0), 0.62, 1e-15);
  sgd_nesterov_step(state, m, g, 0.1);
  EXPECT_NEAR(m.layer(0).weight(0, 0), 0.078, 1e-15);
  EXPECT_EQ(state.steps, 2U);
  EXPECT_EQ(m.layer(0).bias(0), 0.0);
}

TEST(Nesterov, MultiplierScalesRate) {
  MlpModel m = scalar_model(1.0, 0.0);
  auto state = make_optimizer_state(m, 0.0, 10.0);
  Gradients g;
  g.layers.push_back({Matrix::Constant(1, 1, 1.0), Vector::Constant(1, -1.0)});
  sgd_nesterov_step(state, m, g, 0.01);
  EXPECT_NEAR(m.layer(0).weight(0, 0), 0.9, 1e-15);
  EXPECT_NEAR(m.layer(0).bias(0), 0.1, 1e-15);
  EXPECT_THROW(make_optimizer_state(m, 1.0), InvalidArgument);
  EXPECT_THROW(make_optimizer_state(m, 0.9, 0.0), InvalidArgument);
}

TEST(LrSchedule, Endpoints) {
  EXPECT_DOUBLE_EQ(lr_schedule(0, 3000, 0.01), 0.01);
  EXPECT_NEAR(lr_schedule(3000, 3000, 0.01), 0.01 * std::pow(11.0, -0.75), 1e-17);
  EXPECT_DOUBLE_EQ(lr_schedule(5, 0, 0.02), 0.02);
  double previous = 1.0;
  for (std::size_t s = 0; s <= 100; s += 10) {
    const double lr = lr_schedule(s, 100, 0.01);
    EXPECT_LT(lr, previous);
    previous = lr;
  }
}

TEST(Checkpoint, JsonRoundTripIsExact) {
  Rng rng(9);
  const auto m = MlpModel::glorot({2, 7, 3}, Activation::ReLU, Activation::Identity, rng);
  EXPECT_TRUE(model_from_json(model_to_json(m)) == m);
  const auto path = std::filesystem::temp_directory_path() / "mddlab_model.json";
  save_model(m, path);
  const auto back = load_model(path);
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.layer(0).activation, Activation::ReLU);
  EXPECT_EQ(back.layer(1).activation, Activation::Identity);
}

TEST(Checkpoint, RejectsForeignDocuments) {
  EXPECT_THROW(model_from_json("{\"format\": \"other\", \"version\": 1, \"layers\": []}"), ParseError);
  EXPECT_THROW(model_from_json("not json"), ParseError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), ParseError);
}

TEST(MlpScorer, ComposesFeatureAndHead) {
  Rng rng(10);
  auto feat = std::make_shared<const MlpModel>(
      MlpModel::glorot({2, 4}, Activation::ReLU, Activation::ReLU, rng));
  auto head = std::make_shared<const MlpModel>(
      MlpModel::glorot({4, 3}, Activation::Identity, Activation::Identity, rng));
  const MlpScorer s(feat, head);
  EXPECT_EQ(s.num_classes(), 3);
  EXPECT_EQ(s.input_dim(), 2U);
  const Matrix x = fixture::gaussian_matrix(rng, 5, 2);
  EXPECT_TRUE(s.score_batch(x) == head->predict(feat->predict(x)));
  EXPECT_THROW(MlpScorer(head, feat), InvalidArgument);
}
