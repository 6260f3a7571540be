#include "mddlab/discrepancy.hpp"

#include <cmath>

#include "mddlab/error.hpp"

namespace mddlab {

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
}

void check_pair(const FiniteScoringClass& cls, const LabeledSample& P, const LabeledSample& Q) {
  if (P.dim() != cls.input_dim() || Q.dim() != cls.input_dim())
    throw InvalidArgument("sample dimension does not match the class");
}

// Running (value, index) maximum; the first maximiser wins.
struct ArgMax {
  double value = -INFINITY;
  std::size_t index = 0;
  bool empty = true;

  void offer(double v, std::size_t i) {
    if (empty || v > value) {
      value = v;
      index = i;
      empty = false;
    }
  }
};

}  // namespace

namespace tables {

double disparity01(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) throw InvalidArgument("disparity needs equal nonempty labelings");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

double margin_disparity(const Matrix& aux_scores, const std::vector<int>& anchor_labels,
                        double rho) {
  check_rho(rho);
  if (static_cast<std::size_t>(aux_scores.rows()) != anchor_labels.size() || anchor_labels.empty())
    throw InvalidArgument("margin disparity needs aligned nonempty inputs");
  double total = 0.0;
  for (Eigen::Index r = 0; r < aux_scores.rows(); ++r)
    total += ramp_loss(
        margin_from_scores(row_span(aux_scores, r), anchor_labels[static_cast<std::size_t>(r)]),
        rho);
  return total / static_cast<double>(anchor_labels.size());
}

DiscrepancyReport mdd(const std::vector<int>& anchor_labels_p,
                      const std::vector<int>& anchor_labels_q,
                      const std::vector<Matrix>& member_scores_p,
                      const std::vector<Matrix>& member_scores_q, double rho,
                      DiscrepancyOptions options) {
  check_rho(rho);
  if (member_scores_p.empty() || member_scores_p.size() != member_scores_q.size())
    throw InvalidArgument("scoring class must be nonempty");
  DiscrepancyReport report;
  if (options.record_per_member) report.per_member_values.emplace();
  ArgMax best;
  for (std::size_t j = 0; j < member_scores_p.size(); ++j) {
    const double v = margin_disparity(member_scores_q[j], anchor_labels_q, rho) -
                     margin_disparity(member_scores_p[j], anchor_labels_p, rho);
    best.offer(v, j);
    if (report.per_member_values) report.per_member_values->push_back(v);
  }
  report.value = best.value;
  report.argmax_index = best.index;
  return report;
}

}  // namespace tables

double disparity01(const LabelingFunction& h1, const LabelingFunction& h2, const LabeledSample& s) {
  return tables::disparity01(h1.labels(s.features()), h2.labels(s.features()));
}

DiscrepancyReport dd(const LabelingFunction& h, const FiniteScoringClass& H, const LabeledSample& P,
                     const LabeledSample& Q, DiscrepancyOptions options) {
  check_pair(H, P, Q);
  const auto hp = h.labels(P.features());
  const auto hq = h.labels(Q.features());
  const auto members_p = H.label_all(P.features());
  const auto members_q = H.label_all(Q.features());

  DiscrepancyReport report;
  report.anchor_in_class = false;
  if (options.record_per_member) report.per_member_values.emplace();
  ArgMax best;
  for (std::size_t j = 0; j < H.size(); ++j) {
    const double v =
        tables::disparity01(members_q[j], hq) - tables::disparity01(members_p[j], hp);
    best.offer(v, j);
    if (report.per_member_values) report.per_member_values->push_back(v);
    if (members_p[j] == hp && members_q[j] == hq) report.anchor_in_class = true;
  }
  report.value = best.value;
  report.argmax_index = best.index;
  return report;
}

DiscrepancyReport hdh_divergence(const FiniteScoringClass& H, const LabeledSample& P,
                                 const LabeledSample& Q, DiscrepancyOptions options) {
  check_pair(H, P, Q);
  const auto members_p = H.label_all(P.features());
  const auto members_q = H.label_all(Q.features());
  DiscrepancyReport report;
  if (options.record_per_member) report.per_member_values.emplace();
  ArgMax best;
  for (std::size_t a = 0; a < H.size(); ++a) {
    for (std::size_t b = 0; b < H.size(); ++b) {
      const double v = std::abs(tables::disparity01(members_q[b], members_q[a]) -
                                tables::disparity01(members_p[b], members_p[a]));
      best.offer(v, a * H.size() + b);
      if (report.per_member_values) report.per_member_values->push_back(v);
    }
  }
  report.value = best.value;
  report.argmax_index = best.index;
  return report;
}

double margin_disparity(const ScoringFunction& f1, const ScoringFunction& f2,
                        const LabeledSample& s, double rho) {
  return tables::margin_disparity(f1.score_batch(s.features()),
                                  argmax_rows(f2.score_batch(s.features())), rho);
}

DiscrepancyReport mdd(const ScoringFunction& f, const FiniteScoringClass& F,
                      const LabeledSample& P, const LabeledSample& Q, double rho,
                      DiscrepancyOptions options) {
  check_rho(rho);
  check_pair(F, P, Q);
  if (f.num_classes() != F.num_classes()) throw InvalidArgument("anchor and class disagree on k");
  const Matrix fp = f.score_batch(P.features());
  const Matrix fq = f.score_batch(Q.features());
  const auto members_p = F.score_all(P.features());
  const auto members_q = F.score_all(Q.features());
  auto report = tables::mdd(argmax_rows(fp), argmax_rows(fq), members_p, members_q, rho, options);
  report.anchor_in_class = false;
  for (std::size_t j = 0; j < F.size() && !report.anchor_in_class; ++j)
    report.anchor_in_class = members_p[j] == fp && members_q[j] == fq;
  return report;
}

IdealLambda ideal_lambda(const FiniteScoringClass& F, const LabeledSample& P,
                         const LabeledSample& Q_labeled, double rho) {
  check_rho(rho);
  check_pair(F, P, Q_labeled);
  if (!P.fully_labeled() || !Q_labeled.fully_labeled())
    throw InvalidArgument("ideal_lambda needs fully labeled samples");
  IdealLambda best{INFINITY, 0};
  for (std::size_t j = 0; j < F.size(); ++j) {
    const double v = margin_err(F[j], P, rho) + margin_err(F[j], Q_labeled, rho);
    if (v < best.value) best = {v, j};
  }
  return best;
}

}  // namespace mddlab
