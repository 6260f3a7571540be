#include "mddlab/complexity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mddlab/discrepancy.hpp"
#include "mddlab/error.hpp"
#include "mddlab/rng.hpp"

namespace mddlab {

FunctionValueMatrix pi1(const FiniteScoringClass& F, const Matrix& points) {
  const int k = F.num_classes();
  FunctionValueMatrix out;
  out.values.resize(static_cast<Eigen::Index>(F.size()) * k, points.rows());
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < F.size(); ++j) {
    const Matrix s = F[j].score_batch(points);
    for (int y = 0; y < k; ++y, ++row) {
      out.values.row(row) = s.col(y).transpose();
      out.row_labels.push_back(fmt::format("f{}:y{}", j, y));
    }
  }
  return out;
}

FunctionValueMatrix piH(const FiniteScoringClass& F, const FiniteScoringClass& H,
                        const Matrix& points) {
  if (F.num_classes() != H.num_classes()) throw InvalidArgument("F and H must share k");
  const auto scores = F.score_all(points);
  const auto labels = H.label_all(points);
  FunctionValueMatrix out;
  out.values.resize(static_cast<Eigen::Index>(H.size() * F.size()), points.rows());
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < H.size(); ++a) {
    for (std::size_t j = 0; j < F.size(); ++j, ++row) {
      for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.values(row, i) = scores[j](i, labels[a][static_cast<std::size_t>(i)]);
      out.row_labels.push_back(fmt::format("h{}:f{}", a, j));
    }
  }
  return out;
}

FunctionValueMatrix pi1_indicators(const FiniteScoringClass& H, const Matrix& points) {
  const int k = H.num_classes();
  const auto labels = H.label_all(points);
  FunctionValueMatrix out;
  out.values.resize(static_cast<Eigen::Index>(H.size()) * k, points.rows());
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < H.size(); ++a) {
    for (int y = 0; y < k; ++y, ++row) {
      for (Eigen::Index i = 0; i < points.rows(); ++i)
        out.values(row, i) = labels[a][static_cast<std::size_t>(i)] == y ? 1.0 : 0.0;
      out.row_labels.push_back(fmt::format("h{}:y{}", a, y));
    }
  }
  return out;
}

FunctionValueMatrix load_value_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') throw ParseError(line_no, "bad number '" + cell + "'");
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite entry");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(line_no, "ragged value matrix");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ParseError(line_no, "empty value matrix");
  FunctionValueMatrix M;
  M.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      M.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    M.row_labels.push_back(fmt::format("g{}", r));
  }
  return M;
}

void save_value_matrix(const FunctionValueMatrix& M, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  for (Eigen::Index r = 0; r < M.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.values.cols(); ++c)
      out << (c ? "," : "") << fmt::format("{:.17g}", M.values(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

void check_matrix(const FunctionValueMatrix& M) {
  if (M.values.rows() == 0 || M.values.cols() == 0) throw InvalidArgument("empty value matrix");
}

RademacherEstimate exhaustive_rademacher(const FunctionValueMatrix& M) {
  const auto n = M.values.cols();
  if (static_cast<std::size_t>(n) > kMaxExhaustivePoints)
    throw InvalidArgument(
        fmt::format("exhaustive enumeration supports at most {} points", kMaxExhaustivePoints));
  // Gray-code walk: flipping sigma_i from -1 to +1 adds 2 M(:, i) and back
  // subtracts it. The walk starts at sigma = (-1, ..., -1).
  Vector sums = -M.values.rowwise().sum();
  std::vector<int> sigma(static_cast<std::size_t>(n), -1);
  const std::uint64_t patterns = std::uint64_t{1} << n;
  double total = sums.maxCoeff();
  for (std::uint64_t g = 1; g < patterns; ++g) {
    const int bit = std::countr_zero(g);
    auto& s = sigma[static_cast<std::size_t>(bit)];
    s = -s;
    sums += (2.0 * s) * M.values.col(bit);
    total += sums.maxCoeff();
  }
  RademacherEstimate out;
  out.estimate = total / static_cast<double>(patterns) / static_cast<double>(n);
  out.trials = static_cast<std::size_t>(patterns);
  out.exhaustive = true;
  return out;
}

}  // namespace

RademacherEstimate empirical_rademacher(const FunctionValueMatrix& M, std::size_t trials,
                                        std::uint64_t seed) {
  check_matrix(M);
  if (trials == kExhaustive) return exhaustive_rademacher(M);

  const auto n = M.values.cols();
  std::vector<double> per_trial(trials);
  Vector sigma(n);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    for (Eigen::Index i = 0; i < n; ++i) sigma(i) = rng.sign();
    per_trial[t] = (M.values * sigma).maxCoeff() / static_cast<double>(n);
  }
  double mean = 0.0;
  for (double v : per_trial) mean += v;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : per_trial) var += (v - mean) * (v - mean);
  RademacherEstimate out;
  out.estimate = mean;
  out.trials = trials;
  if (trials > 1) {
    var /= static_cast<double>(trials - 1);
    out.std_error = std::sqrt(var / static_cast<double>(trials));
  }
  return out;
}

RademacherEstimate resampled_rademacher(const FunctionValueMatrix& population, std::size_t n,
                                        std::size_t resamples, std::size_t trials,
                                        std::uint64_t seed) {
  check_matrix(population);
  if (n == 0 || n > population.num_points())
    throw InvalidArgument("resample size must be in [1, population size]");
  if (resamples == 0) throw InvalidArgument("need at least one resample");
  std::vector<double> values(resamples);
  std::vector<Eigen::Index> idx(population.num_points());
  for (std::size_t r = 0; r < resamples; ++r) {
    Rng rng(derive_seed(seed, r));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    FunctionValueMatrix sub;
    sub.values.resize(population.values.rows(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      sub.values.col(static_cast<Eigen::Index>(i)) = population.values.col(idx[i]);
    values[r] = empirical_rademacher(sub, trials, derive_seed(seed ^ 0x5bd1e995ULL, r)).estimate;
  }
  RademacherEstimate out;
  for (double v : values) out.estimate += v;
  out.estimate /= static_cast<double>(resamples);
  if (resamples > 1) {
    double var = 0.0;
    for (double v : values) var += (v - out.estimate) * (v - out.estimate);
    out.std_error = std::sqrt(var / static_cast<double>(resamples - 1) / static_cast<double>(resamples));
  }
  out.trials = resamples;
  out.exhaustive = trials == kExhaustive;
  return out;
}

LinearRademacherReport linear_piHF_rademacher(const Matrix& x, double Lambda,
                                              const std::vector<Vector>& h_grid,
                                              std::size_t trials, std::uint64_t seed,
                                              std::optional<double> radius) {
  if (!(Lambda > 0.0)) throw InvalidArgument("Lambda must be positive");
  if (x.rows() == 0 || x.cols() == 0) throw InvalidArgument("empty point set");
  if (h_grid.empty()) throw InvalidArgument("labeler grid is empty");
  if (trials == 0) throw InvalidArgument("need at least one trial");
  const auto m = x.rows();
  const auto s = x.cols();

  // Signed points h(x_i) x_i for each labeler.
  std::vector<Matrix> signed_points;
  signed_points.reserve(h_grid.size());
  for (const auto& v : h_grid) {
    if (v.size() != s) throw InvalidArgument("labeler weight dimension mismatch");
    Matrix sp = x;
    for (Eigen::Index i = 0; i < m; ++i)
      if (x.row(i).dot(v) < 0.0) sp.row(i) = -sp.row(i);
    signed_points.push_back(std::move(sp));
  }

  std::vector<double> per_trial(trials);
  Vector sigma(m);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    for (Eigen::Index i = 0; i < m; ++i) sigma(i) = rng.sign();
    double best = 0.0;
    for (const auto& sp : signed_points)
      best = std::max(best, (sp.transpose() * sigma).norm());
    per_trial[t] = Lambda * best / static_cast<double>(m);
  }

  LinearRademacherReport out;
  for (double v : per_trial) out.estimate += v;
  out.estimate /= static_cast<double>(trials);
  if (trials > 1) {
    double var = 0.0;
    for (double v : per_trial) var += (v - out.estimate) * (v - out.estimate);
    out.std_error = std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials));
  }
  out.radius = radius ? *radius : x.rowwise().norm().maxCoeff();
  out.vc_surrogate = static_cast<std::size_t>(s) + 1;
  const double d = static_cast<double>(out.vc_surrogate);
  const double md = static_cast<double>(m);
  out.bound = 2.0 * Lambda * out.radius * std::sqrt(d * std::log(std::numbers::e * md / d) / md);
  out.within_bound = out.estimate <= out.bound;
  return out;
}

// ---------------------------------------------------------------------------

double l2_distance(const FunctionValueMatrix& M, std::size_t a, std::size_t b) {
  const auto ra = static_cast<Eigen::Index>(a);
  const auto rb = static_cast<Eigen::Index>(b);
  return std::sqrt((M.values.row(ra) - M.values.row(rb)).squaredNorm() /
                   static_cast<double>(M.values.cols()));
}

double sup_l2_norm(const FunctionValueMatrix& M) {
  check_matrix(M);
  return std::sqrt(M.values.rowwise().squaredNorm().maxCoeff() /
                   static_cast<double>(M.values.cols()));
}

GreedyCover::GreedyCover(const FunctionValueMatrix& M) {
  check_matrix(M);
  const std::size_t rows = M.num_functions();
  std::vector<double> nearest(rows, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(rows, false);
  std::size_t next = 0;
  for (std::size_t c = 0; c < rows; ++c) {
    order_.push_back(next);
    chosen[next] = true;
    for (std::size_t r = 0; r < rows; ++r)
      if (!chosen[r]) nearest[r] = std::min(nearest[r], l2_distance(M, r, next));
    double far = 0.0;
    std::size_t far_index = rows;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!chosen[r] && (far_index == rows || nearest[r] > far)) {
        far = nearest[r];
        far_index = r;
      }
    }
    radii_.push_back(far_index == rows ? 0.0 : far);
    if (far_index == rows || far == 0.0) break;  // remaining rows duplicate a centre
    next = far_index;
  }
}

std::size_t GreedyCover::count(double eps) const {
  if (!(eps > 0.0)) throw InvalidArgument("covering radius must be positive");
  for (std::size_t c = 0; c < radii_.size(); ++c)
    if (radii_[c] <= eps) return c + 1;
  return radii_.size();
}

double GreedyCover::entropy_integral(double lo, double hi) const {
  if (!(lo > 0.0)) lo = std::numeric_limits<double>::min();
  if (hi <= lo) return 0.0;
  // count(tau) = c + 1 on [radii_[c], radii_[c-1]); constant pieces.
  double total = 0.0;
  double upper = hi;
  for (std::size_t c = 1; c < radii_.size() && upper > lo; ++c) {
    const double piece_lo = std::max(lo, radii_[c]);
    const double piece_hi = std::min(upper, radii_[c - 1]);
    if (piece_hi > piece_lo) {
      total += (piece_hi - piece_lo) * std::sqrt(std::log(static_cast<double>(c + 1)));
      upper = piece_lo;
    }
  }
  return total;
}

double GreedyCover::entropy_riemann_upper(double lo, double hi, std::size_t steps) const {
  if (steps == 0) throw InvalidArgument("Riemann sum needs at least one cell");
  if (!(lo > 0.0)) throw InvalidArgument("integration lower limit must be positive");
  if (hi <= lo) return 0.0;
  const double width = (hi - lo) / static_cast<double>(steps);
  double total = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const double tau = lo + width * static_cast<double>(j);
    total += std::sqrt(std::log(static_cast<double>(count(tau))));
  }
  return total * width;
}

std::size_t covering_number(const FunctionValueMatrix& M, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("covering radius must be positive");
  return GreedyCover(M).count(eps);
}

std::vector<double> default_eps_grid(double scale) {
  std::vector<double> grid;
  for (int e = 0; e <= 10; ++e) grid.push_back(std::ldexp(scale, -e));
  return grid;
}

DudleyReport dudley_term(const FunctionValueMatrix& M, const std::vector<double>& eps_grid,
                         std::size_t integration_steps) {
  check_matrix(M);
  if (eps_grid.empty()) throw InvalidArgument("epsilon grid is empty");
  const GreedyCover cover(M);
  const double L = sup_l2_norm(M);
  const double scale = 12.0 / std::sqrt(static_cast<double>(M.num_points()));
  DudleyReport best;
  best.value = std::numeric_limits<double>::infinity();
  best.sup_norm = L;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw InvalidArgument("epsilon grid entries must be positive");
    const double integral = integration_steps == 0
                                ? cover.entropy_integral(eps, L)
                                : cover.entropy_riemann_upper(eps, L, integration_steps);
    const double v = 4.0 * eps + scale * integral;
    if (v < best.value) {
      best.value = v;
      best.best_eps = eps;
      best.integral = integral;
    }
  }
  return best;
}

std::size_t vc_dimension(const FiniteScoringClass& H, const Matrix& points) {
  if (H.num_classes() != 2) throw InvalidArgument("VC dimension needs a binary class");
  const auto n = static_cast<std::size_t>(points.rows());
  if (n > 12) throw InvalidArgument("exhaustive shattering search supports at most 12 points");
  const auto labels = H.label_all(points);
  std::vector<std::uint32_t> patterns;
  patterns.reserve(labels.size());
  for (const auto& l : labels) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) bits |= static_cast<std::uint32_t>(l[i] != 0) << i;
    patterns.push_back(bits);
  }
  std::size_t best = 0;
  for (std::uint32_t subset = 1; subset < (std::uint32_t{1} << n); ++subset) {
    const auto size = static_cast<std::size_t>(std::popcount(subset));
    if (size <= best) continue;
    std::set<std::uint32_t> seen;
    for (auto p : patterns) seen.insert(p & subset);
    if (seen.size() == (std::size_t{1} << size)) best = size;
  }
  return best;
}

// ---------------------------------------------------------------------------

double BoundReport::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t.value;
  throw InvalidArgument("no bound term named " + name);
}

namespace {

double confidence(double delta, std::size_t n) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

void finish(BoundReport& r) {
  r.total = 0.0;
  for (const auto& t : r.terms) {
    if (!std::isfinite(t.value)) throw NumericError("bound term " + t.name + " is not finite");
    r.total += t.value;
  }
}

void check_common(double delta, double delta_max, std::size_t n, std::size_t m, int k,
                  double rho) {
  if (!(delta > 0.0 && delta < delta_max))
    throw InvalidArgument(fmt::format("delta must lie in (0, {:.6g})", delta_max));
  if (n == 0 || m == 0) throw InvalidArgument("sample sizes must be positive");
  if (k < 2) throw InvalidArgument("class count must be at least 2");
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
}

}  // namespace

BoundReport bound_mdd(const MddBoundInputs& in) {
  check_common(in.delta, 1.0 / 3.0, in.n, in.m, in.k, in.rho);
  const double k = in.k;
  BoundReport r{"mdd", {}, 0.0, in.delta, in.rho, in.n, in.m, in.k};
  r.terms = {
      {"source_margin_error", in.source_margin_error},
      {"empirical_mdd", in.empirical_mdd},
      {"lambda", in.lambda},
      {"pi1_source_complexity", 2.0 * k * k / in.rho * in.rademacher_pi1_source},
      {"pihf_source_complexity", 2.0 * k / in.rho * in.rademacher_pihf_source},
      {"source_confidence", 2.0 * confidence(in.delta, in.n)},
      {"pihf_target_complexity", 2.0 * k / in.rho * in.rademacher_pihf_target},
      {"target_confidence", confidence(in.delta, in.m)},
  };
  finish(r);
  return r;
}

BoundReport mdd_deviation_bound(int k, double rho, double rademacher_pihf_source,
                                double rademacher_pihf_target, std::size_t n, std::size_t m,
                                double delta) {
  check_common(delta, 0.5, n, m, k, rho);
  const double kk = k;
  BoundReport r{"mdd-deviation", {}, 0.0, delta, rho, n, m, k};
  r.terms = {
      {"pihf_source_complexity", 2.0 * kk / rho * rademacher_pihf_source},
      {"pihf_target_complexity", 2.0 * kk / rho * rademacher_pihf_target},
      {"source_confidence", confidence(delta, n)},
      {"target_confidence", confidence(delta, m)},
  };
  finish(r);
  return r;
}

BoundReport bound_dd_binary_rademacher(const DdBinaryInputs& in) {
  check_common(in.delta, 1.0 / 3.0, in.n, in.m, 2, 1.0);
  BoundReport r{"dd-binary-rademacher", {}, 0.0, in.delta, 0.0, in.n, in.m, 2};
  r.terms = {
      {"source_error", in.source_error},
      {"empirical_dd", in.empirical_dd},
      {"lambda", in.lambda},
      {"hdh_source_complexity", 2.0 * in.rademacher_hdh_source},
      {"h_source_complexity", 2.0 * in.rademacher_h_source},
      {"source_confidence", 2.0 * confidence(in.delta, in.n)},
      {"hdh_target_complexity", 2.0 * in.rademacher_hdh_target},
      {"target_confidence", confidence(in.delta, in.m)},
  };
  finish(r);
  return r;
}

BoundReport bound_dd_binary_vc(const DdBinaryInputs& in) {
  check_common(in.delta, 1.0 / 3.0, in.n, in.m, 2, 1.0);
  if (in.n < in.vc_dim || in.m < in.vc_dim)
    throw InvalidArgument("VC form needs sample sizes n, m of at least the VC dimension");
  const double d = static_cast<double>(in.vc_dim);
  auto vc_term = [d](std::size_t count) {
    if (d == 0.0) return 0.0;
    const double c = static_cast<double>(count);
    return std::sqrt(d * std::log(std::numbers::e * c / d) / c);
  };
  BoundReport r{"dd-binary-vc", {}, 0.0, in.delta, 0.0, in.n, in.m, 2};
  r.terms = {
      {"source_error", in.source_error},
      {"empirical_dd", in.empirical_dd},
      {"lambda", in.lambda},
      {"source_vc_complexity", 4.0 * vc_term(in.n)},
      {"source_confidence", 2.0 * confidence(in.delta, in.n)},
      {"target_vc_complexity", 2.0 * vc_term(in.m)},
      {"target_confidence", confidence(in.delta, in.m)},
  };
  finish(r);
  return r;
}

BoundReport bound_covering(const CoveringBoundInputs& in) {
  check_common(in.delta, 1.0 / 3.0, in.n, in.m, in.k, in.rho);
  check_matrix(in.pi1_f);
  check_matrix(in.pi1_h);
  const double L = in.sup_norm ? *in.sup_norm : sup_l2_norm(in.pi1_f);
  if (!(L > 0.0)) throw InvalidArgument("sup norm bound must be positive");
  const auto grid = in.eps_grid.empty() ? default_eps_grid(L) : in.eps_grid;
  const GreedyCover cover_f(in.pi1_f);
  const GreedyCover cover_h(in.pi1_h);
  const double sample_factor =
      3.0 * (1.0 / std::sqrt(static_cast<double>(in.n)) + 1.0 / std::sqrt(static_cast<double>(in.m)));
  double best = std::numeric_limits<double>::infinity();
  for (double eps : grid) {
    if (!(eps > 0.0)) throw InvalidArgument("epsilon grid entries must be positive");
    const double inner = cover_f.entropy_integral(eps, L) + L * cover_h.entropy_integral(eps / L, 1.0);
    best = std::min(best, eps + sample_factor * inner);
  }
  const double k = in.k;
  BoundReport r{"covering", {}, 0.0, in.delta, in.rho, in.n, in.m, in.k};
  r.terms = {
      {"source_margin_error", in.source_margin_error},
      {"empirical_mdd", in.empirical_mdd},
      {"lambda", in.lambda},
      {"source_confidence", 2.0 * confidence(in.delta, in.n)},
      {"target_confidence", confidence(in.delta, in.m)},
      {"covering_complexity", 16.0 * k * k * std::sqrt(k) / in.rho * best},
  };
  finish(r);
  return r;
}

// ---------------------------------------------------------------------------

GapCheckReport lemma35_gap_check(const FiniteScoringClass& F, const LabeledSample& P,
                                 const LabeledSample& Q, const GapCheckConfig& config) {
  if (config.n == 0 || config.m == 0) throw InvalidArgument("subsample sizes must be positive");
  if (config.n > P.size() || config.m > Q.size())
    throw InvalidArgument("subsample larger than population");
  if (config.repetitions == 0) throw InvalidArgument("need at least one repetition");
  if (!(config.delta > 0.0 && config.delta < 0.5)) throw InvalidArgument("delta must lie in (0, 1/2)");

  // Population MDD for every anchor f in F.
  const auto pop_scores_p = F.score_all(P.features());
  const auto pop_scores_q = F.score_all(Q.features());
  std::vector<double> population_mdd(F.size());
  for (std::size_t a = 0; a < F.size(); ++a)
    population_mdd[a] = tables::mdd(argmax_rows(pop_scores_p[a]), argmax_rows(pop_scores_q[a]),
                                    pop_scores_p, pop_scores_q, config.rho)
                            .value;

  GapCheckReport report;
  report.repetitions = config.repetitions;
  report.min_bound = std::numeric_limits<double>::infinity();
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const auto p_hat = sample_rows(P, config.n, derive_seed(config.seed, 2 * rep));
    const auto q_hat = sample_rows(Q, config.m, derive_seed(config.seed, 2 * rep + 1));
    const auto sp = F.score_all(p_hat.features());
    const auto sq = F.score_all(q_hat.features());

    const auto rad_p = empirical_rademacher(piH(F, F, p_hat.features()), config.rademacher_trials,
                                            derive_seed(config.seed ^ 0xa5a5a5a5ULL, 2 * rep));
    const auto rad_q = empirical_rademacher(piH(F, F, q_hat.features()), config.rademacher_trials,
                                            derive_seed(config.seed ^ 0xa5a5a5a5ULL, 2 * rep + 1));
    const double bound = mdd_deviation_bound(F.num_classes(), config.rho, rad_p.estimate,
                                             rad_q.estimate, config.n, config.m, config.delta)
                             .total;
    report.min_bound = std::min(report.min_bound, bound);

    bool violated = false;
    for (std::size_t a = 0; a < F.size(); ++a) {
      const double empirical =
          tables::mdd(argmax_rows(sp[a]), argmax_rows(sq[a]), sp, sq, config.rho).value;
      const double gap = std::abs(empirical - population_mdd[a]);
      report.max_gap = std::max(report.max_gap, gap);
      violated |= gap > bound;
    }
    report.violations += violated ? 1 : 0;
  }
  const double reps = static_cast<double>(config.repetitions);
  report.violation_rate = static_cast<double>(report.violations) / reps;
  const double p = std::min(1.0, 2.0 * config.delta);
  report.allowed_rate = p + 3.0 * std::sqrt(p * (1.0 - p) / reps);
  report.passed = report.violation_rate <= report.allowed_rate;
  return report;
}

}  // namespace mddlab
