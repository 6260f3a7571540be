#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mddlab/data.hpp"
#include "mddlab/hypothesis.hpp"

namespace mddlab {

/// Restriction of a real-valued function class to n points:
/// values(j, i) = g_j(z_i), rows in class iteration order.
struct FunctionValueMatrix {
  Matrix values;
  std::vector<std::string> row_labels;

  std::size_t num_functions() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t num_points() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Rows (f, y) for f in F (outer) and y in [0, k) (inner): x -> f(x, y).
FunctionValueMatrix pi1(const FiniteScoringClass& F, const Matrix& points);

/// Rows (h, f) for h in H (outer) and f in F (inner): x -> f(x, h(x)), where h
/// is the classifier induced by each member of H.
FunctionValueMatrix piH(const FiniteScoringClass& F, const FiniteScoringClass& H,
                        const Matrix& points);

/// Rows (h, y): x -> 1[h(x) = y], the per-class indicator projections of H.
FunctionValueMatrix pi1_indicators(const FiniteScoringClass& H, const Matrix& points);

/// CSV without header, one function per line, one column per point.
FunctionValueMatrix load_value_matrix(const std::string& path);
void save_value_matrix(const FunctionValueMatrix& M, const std::string& path);

// ---------------------------------------------------------------------------
// Rademacher complexity

struct RademacherEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;  // 2^n when exhaustive
  bool exhaustive = false;
};

inline constexpr std::size_t kExhaustive = 0;
inline constexpr std::size_t kMaxExhaustivePoints = 20;

/// E_sigma max_j (1/n) sum_i sigma_i M(j, i).
///
/// With trials == kExhaustive all 2^n sign vectors are enumerated (n <= 20)
/// and std_error is 0. Otherwise a Monte-Carlo mean over `trials` draws is
/// returned; draw t uses its own stream derive_seed(seed, t), so the result
/// does not depend on evaluation order.
RademacherEstimate empirical_rademacher(const FunctionValueMatrix& M, std::size_t trials,
                                        std::uint64_t seed);

/// Stand-in for the expected complexity R_{n,D}: averages the empirical
/// complexity over `resamples` size-n column subsets (without replacement)
/// of a population matrix.
RademacherEstimate resampled_rademacher(const FunctionValueMatrix& population, std::size_t n,
                                        std::size_t resamples, std::size_t trials,
                                        std::uint64_t seed);

struct LinearRademacherReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;          // 2 Lambda r sqrt(d log(e m / d) / m)
  double radius = 0.0;         // r
  std::size_t vc_surrogate = 0;  // d = input dimension + 1
  bool within_bound = false;
};

/// Binary linear class f(x, y) = sgn(y) w.x with ||w|| <= Lambda, labelers
/// h(x) = sgn(v.x) for v in `h_grid` (sgn(0) = +1). The sup over w is taken in
/// closed form, so each sign draw contributes
/// max_h Lambda ||sum_i sigma_i h(x_i) x_i|| / m.
LinearRademacherReport linear_piHF_rademacher(const Matrix& x, double Lambda,
                                              const std::vector<Vector>& h_grid,
                                              std::size_t trials, std::uint64_t seed,
                                              std::optional<double> radius = std::nullopt);

// ---------------------------------------------------------------------------
// Covering numbers

/// Empirical L2 distance sqrt((1/n) sum (g - g')^2) between two rows.
double l2_distance(const FunctionValueMatrix& M, std::size_t a, std::size_t b);

/// max_j ||g_j||_2 under the empirical L2 norm.
double sup_l2_norm(const FunctionValueMatrix& M);

/// Farthest-point traversal of the rows, started at row 0 with ties to the
/// smallest index. The traversal is computed once; the greedy cover at any
/// radius is a prefix of it.
class GreedyCover {
 public:
  explicit GreedyCover(const FunctionValueMatrix& M);

  /// Size of the greedy eps-cover (eps > 0).
  std::size_t count(double eps) const;

  /// Farthest-point order of the rows.
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  /// insertion_radii()[c] is the covering radius achieved by the first c+1
  /// centres (non-increasing; the last entry is 0).
  const std::vector<double>& insertion_radii() const noexcept { return radii_; }

  /// Exact integral of sqrt(log count(tau)) over [lo, hi] (step function).
  double entropy_integral(double lo, double hi) const;

  /// Left-endpoint Riemann sum with `steps` equal cells; an upper bound of
  /// entropy_integral because the integrand is non-increasing.
  double entropy_riemann_upper(double lo, double hi, std::size_t steps) const;

 private:
  std::vector<std::size_t> order_;
  std::vector<double> radii_;
};

/// Greedy upper bound on N_2(eps) for the rows of M.
std::size_t covering_number(const FunctionValueMatrix& M, double eps);

/// Geometric grid scale * 2^0, ..., scale * 2^-10.
std::vector<double> default_eps_grid(double scale);

struct DudleyReport {
  double value = 0.0;     // min over the grid of 4 eps + (12/sqrt n) * integral
  double best_eps = 0.0;
  double integral = 0.0;  // at best_eps
  double sup_norm = 0.0;  // upper integration limit
};

/// Dudley entropy bound minimised over `eps_grid`. integration_steps == 0
/// integrates the covering step function exactly; otherwise the
/// left-endpoint Riemann upper sum with that many cells is used.
DudleyReport dudley_term(const FunctionValueMatrix& M, const std::vector<double>& eps_grid,
                         std::size_t integration_steps = 0);

/// Largest s such that some s-subset of `points` is shattered by the induced
/// binary labelers of H. Exhaustive; at most 12 points.
std::size_t vc_dimension(const FiniteScoringClass& H, const Matrix& points);

// ---------------------------------------------------------------------------
// Bound evaluators

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

/// Itemised right-hand side of a generalisation bound; total is the sum of the
/// terms in order.
struct BoundReport {
  std::string form;
  std::vector<BoundTerm> terms;
  double total = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  int k = 0;

  double term(const std::string& name) const;
};

struct MddBoundInputs {
  double source_margin_error = 0.0;
  double empirical_mdd = 0.0;
  double lambda = 0.0;
  double rademacher_pi1_source = 0.0;   // R_{n,P}(Pi_1 F)
  double rademacher_pihf_source = 0.0;  // R_{n,P}(Pi_H F)
  double rademacher_pihf_target = 0.0;  // R_{m,Q}(Pi_H F)
  std::size_t n = 0;
  std::size_t m = 0;
  int k = 2;
  double rho = 1.0;
  double delta = 0.05;
};

/// err + MDD + lambda + (2k^2/rho) R_P(Pi_1 F) + (2k/rho) R_P(Pi_H F)
/// + 2 sqrt(log(2/delta)/(2n)) + (2k/rho) R_Q(Pi_H F) + sqrt(log(2/delta)/(2m)).
/// Requires 0 < delta < 1/3.
BoundReport bound_mdd(const MddBoundInputs& in);

/// Deviation |empirical MDD - MDD| allowed uniformly in f with probability
/// 1 - 2 delta: (2k/rho)(R_P + R_Q) + sqrt(log(2/delta)/(2n)) + sqrt(log(2/delta)/(2m)).
/// Requires 0 < delta < 1/2.
BoundReport mdd_deviation_bound(int k, double rho, double rademacher_pihf_source,
                                double rademacher_pihf_target, std::size_t n, std::size_t m,
                                double delta);

struct DdBinaryInputs {
  double source_error = 0.0;
  double empirical_dd = 0.0;
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double delta = 0.05;
  // Rademacher form.
  double rademacher_hdh_source = 0.0;  // R_{n,P}(H delta H)
  double rademacher_h_source = 0.0;    // R_{n,P}(H)
  double rademacher_hdh_target = 0.0;  // R_{m,Q}(H delta H)
  // VC form.
  std::size_t vc_dim = 0;
};

/// err + DD + lambda + 2R_P(HdH) + 2R_P(H) + 2 sqrt(log(2/delta)/(2n))
/// + 2R_Q(HdH) + sqrt(log(2/delta)/(2m)).
BoundReport bound_dd_binary_rademacher(const DdBinaryInputs& in);

/// err + DD + lambda + 4 sqrt(d log(en/d)/n) + 2 sqrt(log(2/delta)/(2n))
/// + 2 sqrt(d log(em/d)/m) + sqrt(log(2/delta)/(2m)), with a single lambda.
/// Requires n, m >= d (the growth-function bound behind the VC terms).
BoundReport bound_dd_binary_vc(const DdBinaryInputs& in);

struct CoveringBoundInputs {
  double source_margin_error = 0.0;
  double empirical_mdd = 0.0;
  double lambda = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  int k = 2;
  double rho = 1.0;
  double delta = 0.05;
  FunctionValueMatrix pi1_f;          // Pi_1 F restricted to the sample
  FunctionValueMatrix pi1_h;          // Pi_1 H indicators on the same sample
  std::optional<double> sup_norm;     // L; defaults to sup_l2_norm(pi1_f)
  std::vector<double> eps_grid;       // defaults to default_eps_grid(L)
};

/// Covering-number bound: err + MDD + lambda + 2 sqrt(log(2/delta)/(2n))
/// + sqrt(log(2/delta)/(2m)) + (16 k^2 sqrt(k)/rho) min_eps { eps
/// + 3 (1/sqrt n + 1/sqrt m) (int_eps^L sqrt(log N(tau, Pi_1 F)) dtau
/// + L int_{eps/L}^1 sqrt(log N(tau, Pi_1 H)) dtau) }.
BoundReport bound_covering(const CoveringBoundInputs& in);

// ---------------------------------------------------------------------------
// Sampling check of the uniform MDD deviation bound

struct GapCheckConfig {
  std::size_t n = 0;  // source subsample size
  std::size_t m = 0;  // target subsample size
  std::size_t repetitions = 200;
  std::size_t rademacher_trials = 200;  // kExhaustive allowed for small n, m
  double rho = 1.0;
  double delta = 0.1;
  std::uint64_t seed = 0;
};

struct GapCheckReport {
  std::size_t repetitions = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double allowed_rate = 0.0;  // 2 delta + 3 binomial standard errors
  double max_gap = 0.0;
  double min_bound = 0.0;
  bool passed = false;
};

/// Treats P and Q as full populations (uniform weights). Each repetition
/// draws subsamples of sizes n and m without replacement and checks, for every
/// f in F, |mdd(f, F, P^, Q^) - mdd(f, F, P, Q)| <= (2k/rho)(R^_n(Pi_H F) +
/// R^_m(Pi_H F)) + sqrt(log(2/delta)/(2n)) + sqrt(log(2/delta)/(2m)), with the
/// empirical complexities measured on the subsamples.
GapCheckReport lemma35_gap_check(const FiniteScoringClass& F, const LabeledSample& P,
                                 const LabeledSample& Q, const GapCheckConfig& config);

}  // namespace mddlab
