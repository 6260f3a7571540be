#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mddlab/data.hpp"
#include "mddlab/hypothesis.hpp"

namespace mddlab {

/// Supremum over a finite class together with the member attaining it.
struct DiscrepancyReport {
  double value = 0.0;
  /// First maximiser in iteration order. For hdh_divergence the pair (h, h')
  /// is encoded as h_index * |H| + h'_index.
  std::size_t argmax_index = 0;
  /// Filled only when requested through DiscrepancyOptions.
  std::optional<std::vector<double>> per_member_values;
  /// False when the anchor h (or f) does not agree with any class member on
  /// the two samples; nonnegativity is then not guaranteed.
  bool anchor_in_class = true;
};

struct DiscrepancyOptions {
  bool record_per_member = false;
};

/// (1/n) sum 1[h1(x_i) != h2(x_i)]. Labels of `s` are ignored.
double disparity01(const LabelingFunction& h1, const LabelingFunction& h2, const LabeledSample& s);

/// max over h' in H of disp_Q(h', h) - disp_P(h', h).
DiscrepancyReport dd(const LabelingFunction& h, const FiniteScoringClass& H, const LabeledSample& P,
                     const LabeledSample& Q, DiscrepancyOptions options = {});

/// max over (h, h') in H x H of |disp_Q(h', h) - disp_P(h', h)|.
DiscrepancyReport hdh_divergence(const FiniteScoringClass& H, const LabeledSample& P,
                                 const LabeledSample& Q, DiscrepancyOptions options = {});

/// (1/n) sum Phi_rho(rho_{f1}(x_i, h_{f2}(x_i))). Not symmetric in (f1, f2).
double margin_disparity(const ScoringFunction& f1, const ScoringFunction& f2,
                        const LabeledSample& s, double rho);

/// max over f' in F of disp^rho_Q(f', f) - disp^rho_P(f', f).
DiscrepancyReport mdd(const ScoringFunction& f, const FiniteScoringClass& F,
                      const LabeledSample& P, const LabeledSample& Q, double rho,
                      DiscrepancyOptions options = {});

struct IdealLambda {
  double value = 0.0;
  std::size_t witness_index = 0;
};

/// min over f* in F of margin_err(f*, P, rho) + margin_err(f*, Q, rho); both
/// samples must be fully labeled.
IdealLambda ideal_lambda(const FiniteScoringClass& F, const LabeledSample& P,
                         const LabeledSample& Q_labeled, double rho);

/// Table-level kernels. Score matrices are n x k with rows aligned to the
/// sample; these are what the sample-level functions above reduce to, and are
/// reused by the complexity checks and trainer diagnostics to avoid
/// re-evaluating scorers.
namespace tables {

double disparity01(const std::vector<int>& a, const std::vector<int>& b);

double margin_disparity(const Matrix& aux_scores, const std::vector<int>& anchor_labels,
                        double rho);

/// max over member tables of margin_disparity on Q minus on P.
DiscrepancyReport mdd(const std::vector<int>& anchor_labels_p,
                      const std::vector<int>& anchor_labels_q,
                      const std::vector<Matrix>& member_scores_p,
                      const std::vector<Matrix>& member_scores_q, double rho,
                      DiscrepancyOptions options = {});

}  // namespace tables

}  // namespace mddlab
