#include "fixtures.hpp"

#include <memory>
#include <set>

namespace fixture {

using mddlab::Domain;
using mddlab::Label;

namespace {

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace

Matrix pool_points(std::size_t pool) {
  Matrix p(static_cast<Eigen::Index>(pool), 1);
  for (std::size_t i = 0; i < pool; ++i) p(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  return p;
}

LabeledSample pool_sample(Rng& rng, std::size_t pool, std::size_t count, int k, Domain domain,
                          bool unlabeled) {
  Matrix x(static_cast<Eigen::Index>(count), 1);
  std::vector<Label> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = static_cast<double>(rng.below(pool));
    if (!unlabeled) y[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  }
  return LabeledSample(std::move(x), std::move(y), domain, k);
}

BinaryInstance random_binary_instance(std::uint64_t seed, std::size_t max_members,
                                      std::size_t max_points) {
  Rng rng(seed);
  const std::size_t pool = between(rng, 2, max_points);
  const std::size_t base = between(rng, 1, max_members / 2);
  const Matrix points = pool_points(pool);
  std::vector<std::vector<int>> labelings(base, std::vector<int>(pool));
  // Bias each labeling towards a random density so classes are not all near 1/2.
  for (auto& l : labelings) {
    const double p = rng.uniform();
    for (auto& v : l) v = rng.uniform() < p ? 1 : 0;
  }
  auto H = mddlab::binary_tabular_class(points, labelings, true);
  auto P = pool_sample(rng, pool, between(rng, 1, max_points), 2, Domain::Source);
  auto Q = pool_sample(rng, pool, between(rng, 1, max_points), 2, Domain::Target, true);
  auto R = pool_sample(rng, pool, between(rng, 1, max_points), 2, Domain::Target, true);
  return {points, std::move(H), std::move(P), std::move(Q), std::move(R)};
}

BinaryInstance linear_space_instance(std::uint64_t seed, std::size_t points, std::size_t rank) {
  Rng rng(seed);
  const Matrix pts = pool_points(points);
  std::vector<std::vector<int>> basis(rank + 1, std::vector<int>(points));
  for (std::size_t b = 0; b < rank; ++b)
    for (auto& v : basis[b]) v = static_cast<int>(rng.below(2));
  for (auto& v : basis[rank]) v = 1;
  std::set<std::vector<int>> span;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << (rank + 1)); ++mask) {
    std::vector<int> l(points, 0);
    for (std::size_t b = 0; b <= rank; ++b)
      if ((mask >> b) & 1U)
        for (std::size_t i = 0; i < points; ++i) l[i] ^= basis[b][i];
    span.insert(std::move(l));
  }
  std::vector<std::vector<int>> labelings(span.begin(), span.end());
  auto H = mddlab::binary_tabular_class(pts, labelings, false);
  auto P = pool_sample(rng, points, between(rng, 1, 3 * points), 2, Domain::Source);
  auto Q = pool_sample(rng, points, between(rng, 1, 3 * points), 2, Domain::Target, true);
  auto R = pool_sample(rng, points, between(rng, 1, 3 * points), 2, Domain::Target, true);
  return {pts, std::move(H), std::move(P), std::move(Q), std::move(R)};
}

MulticlassInstance random_multiclass_instance(std::uint64_t seed, std::size_t max_members,
                                              int max_k, std::size_t max_rows,
                                              const std::vector<double>& rhos) {
  Rng rng(seed);
  const int k = static_cast<int>(between(rng, 2, static_cast<std::size_t>(max_k)));
  const std::size_t pool = between(rng, 2, max_rows);
  const std::size_t members = between(rng, 1, max_members);
  const Matrix points = pool_points(pool);
  std::vector<mddlab::ScorerPtr> scorers;
  for (std::size_t j = 0; j < members; ++j) {
    const double scale = rng.uniform(0.1, 3.0);
    Matrix table = scale * gaussian_matrix(rng, pool, static_cast<std::size_t>(k));
    scorers.push_back(std::make_shared<mddlab::TabularScorer>(points, std::move(table)));
  }
  FiniteScoringClass F(std::move(scorers));
  auto P = pool_sample(rng, pool, between(rng, 1, max_rows), k, Domain::Source);
  auto Q = pool_sample(rng, pool, between(rng, 1, max_rows), k, Domain::Target);
  const double rho = rhos[rng.below(rhos.size())];
  return {points, std::move(F), std::move(P), std::move(Q), k, rho};
}

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
  return m;
}

void randomize_biases(mddlab::MlpModel& model, Rng& rng, double scale) {
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    auto& b = model.mutable_layer(i).bias;
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = scale * rng.normal();
  }
}

void randomize_biases(mddlab::Models& models, Rng& rng, double scale) {
  randomize_biases(models.feature, rng, scale);
  randomize_biases(models.classifier, rng, scale);
  randomize_biases(models.auxiliary, rng, scale);
}

}  // namespace fixture
