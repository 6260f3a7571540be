#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mddlab/data.hpp"

namespace mddlab {

/// x -> (f(x,0), ..., f(x,k-1)). Implementations are deterministic and safe to
/// evaluate concurrently.
class ScoringFunction {
 public:
  virtual ~ScoringFunction() = default;

  virtual int num_classes() const = 0;
  virtual std::size_t input_dim() const = 0;

  /// Scores for every row of `x` (n x d) as an n x k matrix.
  virtual Matrix score_batch(const Matrix& x) const = 0;

  Vector scores(const Vector& x) const;

 protected:
  void check_input(const Matrix& x) const;
};

using ScorerPtr = std::shared_ptr<const ScoringFunction>;

// Row-level primitives shared by every module that works on score tables.

/// argmax with ties broken toward the smallest index.
int argmax_label(std::span<const double> scores) noexcept;

/// Half the gap between scores[y] and the best competing score.
double margin_from_scores(std::span<const double> scores, int y);

/// argmax_label for each row of an n x k score matrix.
std::vector<int> argmax_rows(const Matrix& scores);

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Predicted class of f at x (argmax, smallest index on ties).
int predict_label(const ScoringFunction& f, const Vector& x);

/// rho_f(x, y) = (f(x,y) - max_{y' != y} f(x,y')) / 2.
double margin(const ScoringFunction& f, const Vector& x, int y);

/// Piecewise-linear ramp: 1 for t <= 0, 1 - t/rho on [0, rho], 0 for t >= rho.
double ramp_loss(double t, double rho);

/// Derivative of ramp_loss in t (taken as 0 at the two kinks).
double ramp_loss_derivative(double t, double rho);

/// The classifier x -> argmax_y f(x, y) induced by a scoring function.
class LabelingFunction {
 public:
  explicit LabelingFunction(ScorerPtr scorer);

  int operator()(const Vector& x) const;
  std::vector<int> labels(const Matrix& x) const;

  const ScoringFunction& scorer() const noexcept { return *scorer_; }
  const ScorerPtr& scorer_ptr() const noexcept { return scorer_; }

 private:
  ScorerPtr scorer_;
};

/// Empirical 0-1 error of h on a fully labeled sample.
double err01(const LabelingFunction& h, const LabeledSample& s);

/// Mean ramp loss of the margins rho_f(x_i, y_i) on a fully labeled sample.
double margin_err(const ScoringFunction& f, const LabeledSample& s, double rho);

/// Explicit score table over a fixed point set. Evaluating at a point that is
/// not in the set (exact coordinate match) throws InvalidArgument.
class TabularScorer final : public ScoringFunction {
 public:
  TabularScorer(Matrix points, Matrix table);

  int num_classes() const override { return static_cast<int>(table_.cols()); }
  std::size_t input_dim() const override { return static_cast<std::size_t>(points_.cols()); }
  Matrix score_batch(const Matrix& x) const override;

  const Matrix& points() const noexcept { return points_; }
  const Matrix& table() const noexcept { return table_; }

  /// Index of `x` in the point set, or -1.
  Eigen::Index find_point(std::span<const double> x) const;

 private:
  Matrix points_;
  Matrix table_;
  std::vector<Eigen::Index> order_;  // points sorted lexicographically
};

/// scores = W x + b, with W of shape k x d.
class LinearScorer final : public ScoringFunction {
 public:
  explicit LinearScorer(Matrix weights, Vector bias = {});

  int num_classes() const override { return static_cast<int>(weights_.rows()); }
  std::size_t input_dim() const override { return static_cast<std::size_t>(weights_.cols()); }
  Matrix score_batch(const Matrix& x) const override;

  const Matrix& weights() const noexcept { return weights_; }
  const Vector& bias() const noexcept { return bias_; }

 private:
  Matrix weights_;
  Vector bias_;
};

/// Lifts a binary labeler g: x -> {0, 1} to the scores (+1, -1) when g(x) = 0
/// and (-1, +1) when g(x) = 1, so the induced classifier is g itself and every
/// margin is +-1.
class BinaryLabelerScorer final : public ScoringFunction {
 public:
  using Labeler = std::function<int(std::span<const double>)>;

  BinaryLabelerScorer(Labeler labeler, std::size_t input_dim);

  int num_classes() const override { return 2; }
  std::size_t input_dim() const override { return input_dim_; }
  Matrix score_batch(const Matrix& x) const override;

 private:
  Labeler labeler_;
  std::size_t input_dim_;
};

struct ClassTraits {
  bool closed_under_complement = false;
  bool closed_under_permutation = false;
};

/// Nonempty, ordered, immutable set of scoring functions sharing k.
class FiniteScoringClass {
 public:
  explicit FiniteScoringClass(std::vector<ScorerPtr> members, ClassTraits traits = {});

  std::size_t size() const noexcept { return members_.size(); }
  int num_classes() const noexcept { return k_; }
  std::size_t input_dim() const noexcept { return members_.front()->input_dim(); }
  const ScoringFunction& operator[](std::size_t j) const { return *members_.at(j); }
  const ScorerPtr& member(std::size_t j) const { return members_.at(j); }
  const std::vector<ScorerPtr>& members() const noexcept { return members_; }
  const ClassTraits& traits() const noexcept { return traits_; }
  bool closed_under_complement() const noexcept { return traits_.closed_under_complement; }
  bool closed_under_permutation() const noexcept { return traits_.closed_under_permutation; }

  /// One n x k score matrix per member, in iteration order.
  std::vector<Matrix> score_all(const Matrix& x) const;

  /// One label vector per member, in iteration order.
  std::vector<std::vector<int>> label_all(const Matrix& x) const;

  FiniteScoringClass with_member(ScorerPtr extra) const;

 private:
  std::vector<ScorerPtr> members_;
  ClassTraits traits_;
  int k_;
};

/// Members (t, s) in grid order (thresholds outer, signs inner). Sign +1 labels
/// [x_axis >= t] as 1; sign -1 labels [x_axis < t] as 1, the exact complement.
FiniteScoringClass threshold_class(const std::vector<double>& thresholds,
                                   const std::vector<int>& signs, std::size_t input_dim = 1,
                                   std::size_t axis = 0);

/// One LinearScorer per weight matrix, in order. Biases optional (empty or one
/// per weight).
FiniteScoringClass linear_class(const std::vector<Matrix>& weights,
                                const std::vector<Vector>& biases = {});

/// h(x) = 1 if relu(x1 - a) >= relu(x2 - b) else 0, over a_grid x b_grid with a
/// as the outer loop (member index = ia * |b_grid| + ib).
FiniteScoringClass relu_example_class(const std::vector<double>& a_grid,
                                      const std::vector<double>& b_grid);

/// Binary class given by explicit 0/1 labelings over a point set (one vector
/// of length |points| per member). With `add_complements` each labeling's
/// complement is appended when missing, and the class is flagged closed under
/// complement.
FiniteScoringClass binary_tabular_class(const Matrix& points,
                                        const std::vector<std::vector<int>>& labelings,
                                        bool add_complements);

/// True when every member's labeling on `x` has its complement in the class.
bool check_closed_under_complement(const FiniteScoringClass& cls, const Matrix& x);

/// Tabular class file: header `member,point_index,score_0..score_{k-1}`; rows
/// for member j give its score table over the point set.
void save_tabular_class(const FiniteScoringClass& cls, const Matrix& points,
                        const std::filesystem::path& path);

/// Reads a tabular class file; `points` supplies the coordinates that
/// point_index refers to.
FiniteScoringClass load_tabular_class(const std::filesystem::path& path, const Matrix& points);

}  // namespace mddlab
