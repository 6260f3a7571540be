#pragma once

// Seeded random instances shared by the unit tests and the acceptance runner.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mddlab/data.hpp"
#include "mddlab/hypothesis.hpp"
#include "mddlab/nn.hpp"
#include "mddlab/trainer.hpp"
#include "mddlab/rng.hpp"

namespace fixture {

using mddlab::FiniteScoringClass;
using mddlab::LabeledSample;
using mddlab::Matrix;
using mddlab::Rng;

/// `count` rows drawn with replacement from a 1-column pool with coordinates
/// 0..pool-1; random labels in [0, k) unless `unlabeled`.
LabeledSample pool_sample(Rng& rng, std::size_t pool, std::size_t count, int k,
                          mddlab::Domain domain, bool unlabeled = false);

Matrix pool_points(std::size_t pool);

struct BinaryInstance {
  Matrix points;
  FiniteScoringClass H;
  LabeledSample P;
  LabeledSample Q;
  LabeledSample R;
};

/// Binary tabular class closed under complement: up to max_members / 2 random
/// labelings plus their complements over a pool of at most max_points
/// points; P, Q, R of 1..max_points rows each.
BinaryInstance random_binary_instance(std::uint64_t seed, std::size_t max_members = 64,
                                      std::size_t max_points = 64);

/// Class of all XOR combinations of `rank` random basis labelings together
/// with the all-ones labeling, a Z2-linear space containing every complement.
BinaryInstance linear_space_instance(std::uint64_t seed, std::size_t points, std::size_t rank);

struct MulticlassInstance {
  Matrix points;
  FiniteScoringClass F;
  LabeledSample P;  // labeled
  LabeledSample Q;  // labeled
  int k = 2;
  double rho = 1.0;
};

/// Tabular scorers with Gaussian score tables: |F| <= max_members,
/// k in [2, max_k], n, m <= max_rows, rho drawn from `rhos`.
MulticlassInstance random_multiclass_instance(std::uint64_t seed, std::size_t max_members = 32,
                                              int max_k = 4, std::size_t max_rows = 64,
                                              const std::vector<double>& rhos = {0.25, 0.5, 1.0});

/// rows x cols matrix of N(0, 1) entries.
Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols);

/// Replaces every bias with N(0, scale^2) draws. Zero biases put dead ReLU
/// layers exactly on the kink, where finite differences are meaningless.
void randomize_biases(mddlab::MlpModel& model, Rng& rng, double scale = 0.1);
void randomize_biases(mddlab::Models& models, Rng& rng, double scale = 0.1);

}  // namespace fixture
