#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mddlab/error.hpp"
#include "mddlab/hypothesis.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mddlab;

namespace {

// Input-independent scorer returning fixed scores.
ScorerPtr constant_scorer(std::vector<double> scores, std::size_t dim = 1) {
  Vector b = Eigen::Map<const Vector>(scores.data(), static_cast<Eigen::Index>(scores.size()));
  return std::make_shared<LinearScorer>(Matrix::Zero(b.size(), static_cast<Eigen::Index>(dim)), b);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mddlab_test_hypothesis";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(PredictLabel, StrictArgmax) {
  EXPECT_EQ(predict_label(*constant_scorer({2.0, 0.5, -1.0}), vec({0.0})), 0);
}

TEST(PredictLabel, TieGoesToSmallestIndex) {
  EXPECT_EQ(predict_label(*constant_scorer({1.0, 1.0}), vec({0.0})), 0);
  EXPECT_EQ(predict_label(*constant_scorer({0.0, 2.0, 2.0}), vec({0.0})), 1);
}

TEST(PredictLabel, IdentityLinearScorer) {
  const LinearScorer f(Matrix::Identity(2, 2));
  EXPECT_EQ(predict_label(f, vec({0.0, 3.0})), 1);
}

TEST(PredictLabel, DimensionMismatchThrows) {
  const LinearScorer f(Matrix::Identity(2, 2));
  EXPECT_THROW(predict_label(f, vec({1.0, 2.0, 3.0})), InvalidArgument);
}

TEST(Margin, Examples) {
  EXPECT_DOUBLE_EQ(margin(*constant_scorer({2.0, 0.5, -1.0}), vec({0.0}), 0), 0.75);
  EXPECT_DOUBLE_EQ(margin(*constant_scorer({1.0, 1.0}), vec({0.0}), 0), 0.0);
  EXPECT_DOUBLE_EQ(margin(*constant_scorer({0.0, 3.0}), vec({0.0}), 0), -1.5);
}

TEST(Margin, InvalidClassThrows) {
  const auto f = constant_scorer({0.0, 1.0});
  EXPECT_THROW(margin(*f, vec({0.0}), 2), InvalidArgument);
  EXPECT_THROW(margin(*f, vec({0.0}), -1), InvalidArgument);
}

TEST(Margin, SignAgreesWithPrediction) {
  Rng rng(21);
  for (int trial = 0; trial < 5000; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    std::vector<double> s(static_cast<std::size_t>(k));
    // Coarse values so ties occur.
    for (auto& v : s) v = static_cast<double>(rng.below(5));
    const auto f = constant_scorer(s);
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    const double m = margin(*f, vec({0.0}), y);
    const int pred = predict_label(*f, vec({0.0}));
    int ties = 0;
    for (double v : s) ties += v == s[static_cast<std::size_t>(y)];
    if (m > 0.0) { EXPECT_EQ(pred, y); }
    if (pred == y && ties == 1) { EXPECT_GT(m, 0.0); }
    if (pred != y) { EXPECT_LE(m, 0.0); }
  }
}

TEST(RampLoss, Examples) {
  EXPECT_DOUBLE_EQ(ramp_loss(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(ramp_loss(0.25, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(ramp_loss(-3.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(ramp_loss(0.0, 0.5), 1.0);
}

TEST(RampLoss, NonPositiveRhoThrows) {
  EXPECT_THROW(ramp_loss(0.1, 0.0), InvalidArgument);
  EXPECT_THROW(ramp_loss(0.1, -1.0), InvalidArgument);
  EXPECT_THROW(margin_err(*constant_scorer({0.0, 1.0}),
                          LabeledSample(Matrix::Zero(1, 1), {0}, Domain::Source, 2), 0.0),
               InvalidArgument);
}

TEST(RampLoss, BoundedMonotoneLipschitz) {
  Rng rng(8);
  for (int trial = 0; trial < 20000; ++trial) {
    const double rho = rng.uniform(0.01, 3.0);
    const double a = rng.uniform(-2.0, 4.0);
    const double b = rng.uniform(-2.0, 4.0);
    const double la = ramp_loss(a, rho);
    const double lb = ramp_loss(b, rho);
    ASSERT_GE(la, 0.0);
    ASSERT_LE(la, 1.0);
    if (a <= b) { ASSERT_GE(la, lb); }
    ASSERT_LE(std::abs(la - lb), std::abs(a - b) / rho + 1e-12);
    ASSERT_DOUBLE_EQ(la, oracle::ramp(a, rho));
  }
}

TEST(Err01, Examples) {
  Matrix x(4, 1);
  x << 0.0, 1.0, 2.0, 3.0;
  const auto h_id = binary_tabular_class(x, {{0, 1, 1, 0}}, false);
  const LabeledSample s(x, {0, 1, 1, 0}, Domain::Source, 2);
  EXPECT_DOUBLE_EQ(err01(LabelingFunction(h_id.member(0)), s), 0.0);

  const LabelingFunction zero(constant_scorer({1.0, 0.0}));
  EXPECT_DOUBLE_EQ(err01(zero, s), 0.5);

  const auto h_one_off = binary_tabular_class(x, {{0, 1, 1, 1}}, false);
  EXPECT_DOUBLE_EQ(err01(LabelingFunction(h_one_off.member(0)), s), 0.25);
}

TEST(Err01, UnlabeledRowThrows) {
  const LabeledSample s(Matrix::Zero(2, 1), {0, kUnlabeled}, Domain::Source, 2);
  EXPECT_THROW(err01(LabelingFunction(constant_scorer({1.0, 0.0})), s), InvalidArgument);
  EXPECT_THROW(margin_err(*constant_scorer({1.0, 0.0}), s, 1.0), InvalidArgument);
}

TEST(MarginErr, Examples) {
  const LabeledSample s(Matrix::Zero(3, 1), {0, 0, 0}, Domain::Source, 2);
  EXPECT_DOUBLE_EQ(margin_err(*constant_scorer({3.0, 0.0}), s, 1.0), 0.0);
  const LabeledSample one(Matrix::Zero(1, 1), {0}, Domain::Source, 2);
  // margin 0.5 = rho / 2
  EXPECT_DOUBLE_EQ(margin_err(*constant_scorer({1.0, 0.0}), one, 1.0), 0.5);
}

TEST(MarginErr, DominatesZeroOneErrorAndMatchesOracle) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = fixture::random_multiclass_instance(seed, 8);
    for (std::size_t j = 0; j < inst.F.size(); ++j) {
      const double me = margin_err(inst.F[j], inst.P, inst.rho);
      const double e = err01(LabelingFunction(inst.F.member(j)), inst.P);
      ASSERT_GE(me, e) << "seed " << seed;
      ASSERT_NEAR(me, oracle::ramp_error(inst.F[j], inst.P, inst.rho), 1e-12);
      ASSERT_NEAR(e, oracle::zero_one_error(inst.F[j], inst.P), 1e-12);
    }
  }
}

TEST(ReluExampleClass, ThreeKindsOfHypotheses) {
  const auto H = relu_example_class({-2.0, 0.0, 2.0}, {-2.0, 0.0, 2.0});
  EXPECT_EQ(H.size(), 9U);
  const Vector p = vec({-1.0, 1.0});
  const Vector q = vec({1.0, -1.0});
  std::set<std::pair<int, int>> pairs;
  for (std::size_t j = 0; j < H.size(); ++j)
    pairs.insert({predict_label(H[j], p), predict_label(H[j], q)});
  EXPECT_EQ(pairs, (std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 1}}));
}

TEST(ReluExampleClass, BinaryUnitConfidenceScores) {
  const auto H = relu_example_class({0.0}, {0.5});
  Matrix x(3, 2);
  x << 3.0, 0.0, 0.0, 3.0, 1.0, 1.0;
  const Matrix s = H[0].score_batch(x);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    EXPECT_DOUBLE_EQ(std::abs(s(r, 0)), 1.0);
    EXPECT_DOUBLE_EQ(s(r, 0), -s(r, 1));
  }
  EXPECT_EQ(predict_label(H[0], x.row(0).transpose()), 1);
  EXPECT_EQ(predict_label(H[0], x.row(1).transpose()), 0);
}

TEST(ThresholdClass, BothSignsGiveComplements) {
  const auto H = threshold_class({0.5}, {1, -1});
  ASSERT_EQ(H.size(), 2U);
  EXPECT_TRUE(H.closed_under_complement());
  Matrix x(5, 1);
  x << -1.0, 0.0, 0.5, 1.0, 2.0;
  const auto labels = H.label_all(x);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(labels[0][i] + labels[1][i], 1);
  EXPECT_TRUE(check_closed_under_complement(H, x));
  EXPECT_FALSE(threshold_class({0.5}, {1}).closed_under_complement());
}

TEST(ThresholdClass, RejectsBadGrids) {
  EXPECT_THROW(threshold_class({}, {1}), InvalidArgument);
  EXPECT_THROW(threshold_class({0.0}, {}), InvalidArgument);
  EXPECT_THROW(threshold_class({0.0}, {2}), InvalidArgument);
  EXPECT_THROW(threshold_class({0.0}, {1}, 2, 2), InvalidArgument);
}

TEST(LinearClass, SizeAndOrder) {
  std::vector<Matrix> grid;
  for (int g = 0; g < 5; ++g) grid.push_back(Matrix::Constant(2, 3, g));
  const auto F = linear_class(grid);
  ASSERT_EQ(F.size(), 5U);
  Matrix x = Matrix::Ones(1, 3);
  for (std::size_t j = 0; j < F.size(); ++j)
    EXPECT_DOUBLE_EQ(F[j].score_batch(x)(0, 0), 3.0 * static_cast<double>(j));
  EXPECT_THROW(linear_class({}), InvalidArgument);
}

TEST(FiniteScoringClass, IterationIsOrderStable) {
  auto build = [] {
    return relu_example_class({-1.0, 0.0, 1.0, 2.0}, {0.0, 1.0});
  };
  Rng rng(4);
  const Matrix x = fixture::gaussian_matrix(rng, 30, 2);
  const auto a = build().label_all(x);
  const auto b = build().label_all(x);
  EXPECT_EQ(a, b);
}

TEST(FiniteScoringClass, RejectsMixedMembers) {
  EXPECT_THROW(FiniteScoringClass({}), InvalidArgument);
  EXPECT_THROW(FiniteScoringClass({constant_scorer({0, 1}), constant_scorer({0, 1, 2})}),
               InvalidArgument);
  EXPECT_THROW(FiniteScoringClass({constant_scorer({0, 1}, 1), constant_scorer({0, 1}, 2)}),
               InvalidArgument);
}

TEST(TabularScorer, OutsidePointSetThrows) {
  Matrix pts(2, 1);
  pts << 0.0, 1.0;
  const TabularScorer f(pts, Matrix::Identity(2, 2));
  Matrix ok(1, 1);
  ok << 1.0;
  EXPECT_DOUBLE_EQ(f.score_batch(ok)(0, 1), 1.0);
  Matrix bad(1, 1);
  bad << 0.5;
  EXPECT_THROW(f.score_batch(bad), InvalidArgument);
}

TEST(BinaryTabularClass, ComplementsAppended) {
  const Matrix pts = fixture::pool_points(3);
  const auto H = binary_tabular_class(pts, {{0, 1, 1}, {1, 0, 0}, {0, 0, 0}}, true);
  EXPECT_EQ(H.size(), 4U);
  EXPECT_TRUE(H.closed_under_complement());
  EXPECT_TRUE(check_closed_under_complement(H, pts));
  EXPECT_THROW(binary_tabular_class(pts, {{0, 2, 1}}, false), InvalidArgument);
  EXPECT_THROW(binary_tabular_class(pts, {{0, 1}}, false), InvalidArgument);
}

TEST(TabularClassFile, RoundTrip) {
  const auto inst = fixture::random_multiclass_instance(17, 6, 3, 12);
  const auto path = scratch("class.csv");
  save_tabular_class(inst.F, inst.points, path);
  const auto back = load_tabular_class(path, inst.points);
  ASSERT_EQ(back.size(), inst.F.size());
  const auto a = inst.F.score_all(inst.points);
  const auto b = back.score_all(inst.points);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_TRUE(a[j] == b[j]);
}

TEST(TabularClassFile, BadRowNamesItsLine) {
  const auto path = scratch("bad_class.csv");
  std::ofstream(path) << "member,point_index,score_0,score_1\n0,0,1.0,2.0\n0,5,1.0,2.0\n";
  try {
    load_tabular_class(path, fixture::pool_points(2));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3U);
  }
}
