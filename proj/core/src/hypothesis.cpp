#include "mddlab/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "mddlab/error.hpp"

namespace mddlab {

Vector ScoringFunction::scores(const Vector& x) const {
  Matrix row(1, x.size());
  row.row(0) = x.transpose();
  return score_batch(row).row(0).transpose();
}

void ScoringFunction::check_input(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim())
    throw InvalidArgument(fmt::format("input has dimension {}, scorer expects {}", x.cols(),
                                      input_dim()));
}

int argmax_label(std::span<const double> scores) noexcept {
  int best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j)
    if (scores[j] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  return best;
}

double margin_from_scores(std::span<const double> scores, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= scores.size())
    throw InvalidArgument(fmt::format("class {} outside [0, {})", y, scores.size()));
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (static_cast<int>(j) != y) other = std::max(other, scores[j]);
  return 0.5 * (scores[static_cast<std::size_t>(y)] - other);
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r)
    out[static_cast<std::size_t>(r)] = argmax_label(row_span(scores, r));
  return out;
}

int predict_label(const ScoringFunction& f, const Vector& x) {
  const Vector s = f.scores(x);
  return argmax_label({s.data(), static_cast<std::size_t>(s.size())});
}

double margin(const ScoringFunction& f, const Vector& x, int y) {
  if (y < 0 || y >= f.num_classes()) throw InvalidArgument("margin: class index out of range");
  const Vector s = f.scores(x);
  return margin_from_scores({s.data(), static_cast<std::size_t>(s.size())}, y);
}

double ramp_loss(double t, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("ramp_loss needs rho > 0");
  if (t >= rho) return 0.0;
  if (t <= 0.0) return 1.0;
  return 1.0 - t / rho;
}

double ramp_loss_derivative(double t, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("ramp_loss needs rho > 0");
  return (t > 0.0 && t < rho) ? -1.0 / rho : 0.0;
}

LabelingFunction::LabelingFunction(ScorerPtr scorer) : scorer_(std::move(scorer)) {
  if (!scorer_) throw InvalidArgument("LabelingFunction needs a scorer");
}

int LabelingFunction::operator()(const Vector& x) const { return predict_label(*scorer_, x); }

std::vector<int> LabelingFunction::labels(const Matrix& x) const {
  return argmax_rows(scorer_->score_batch(x));
}

double err01(const LabelingFunction& h, const LabeledSample& s) {
  const auto y = s.require_labels();
  const auto pred = h.labels(s.features());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) wrong += pred[i] != y[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double margin_err(const ScoringFunction& f, const LabeledSample& s, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("margin_err needs rho > 0");
  const auto y = s.require_labels();
  const Matrix scores = f.score_batch(s.features());
  double total = 0.0;
  for (Eigen::Index r = 0; r < scores.rows(); ++r)
    total += ramp_loss(margin_from_scores(row_span(scores, r), y[static_cast<std::size_t>(r)]), rho);
  return total / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------

namespace {

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

TabularScorer::TabularScorer(Matrix points, Matrix table)
    : points_(std::move(points)), table_(std::move(table)) {
  if (points_.rows() == 0 || points_.cols() == 0) throw InvalidArgument("empty point set");
  if (table_.rows() != points_.rows()) throw InvalidArgument("one score row per point required");
  if (table_.cols() < 1) throw InvalidArgument("score table needs at least one class");
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  std::stable_sort(order_.begin(), order_.end(), [this](Eigen::Index a, Eigen::Index b) {
    return lex_less(row_span(points_, a), row_span(points_, b));
  });
}

Eigen::Index TabularScorer::find_point(std::span<const double> x) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), x, [this](Eigen::Index a, auto key) {
    return lex_less(row_span(points_, a), key);
  });
  if (it == order_.end()) return -1;
  const auto p = row_span(points_, *it);
  return std::equal(p.begin(), p.end(), x.begin(), x.end()) ? *it : -1;
}

Matrix TabularScorer::score_batch(const Matrix& x) const {
  check_input(x);
  Matrix out(x.rows(), table_.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto idx = find_point(row_span(x, r));
    if (idx < 0) throw InvalidArgument("TabularScorer evaluated outside its point set");
    out.row(r) = table_.row(idx);
  }
  return out;
}

LinearScorer::LinearScorer(Matrix weights, Vector bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) throw InvalidArgument("empty weight matrix");
  if (bias_.size() == 0) bias_ = Vector::Zero(weights_.rows());
  if (bias_.size() != weights_.rows()) throw InvalidArgument("bias length must equal k");
}

Matrix LinearScorer::score_batch(const Matrix& x) const {
  check_input(x);
  Matrix out = x * weights_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

BinaryLabelerScorer::BinaryLabelerScorer(Labeler labeler, std::size_t input_dim)
    : labeler_(std::move(labeler)), input_dim_(input_dim) {
  if (!labeler_) throw InvalidArgument("BinaryLabelerScorer needs a labeler");
}

Matrix BinaryLabelerScorer::score_batch(const Matrix& x) const {
  check_input(x);
  Matrix out(x.rows(), 2);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double c = labeler_(row_span(x, r)) != 0 ? 1.0 : -1.0;
    out(r, 0) = -c;
    out(r, 1) = c;
  }
  return out;
}

// ---------------------------------------------------------------------------

FiniteScoringClass::FiniteScoringClass(std::vector<ScorerPtr> members, ClassTraits traits)
    : members_(std::move(members)), traits_(traits) {
  if (members_.empty()) throw InvalidArgument("scoring class must be nonempty");
  for (const auto& m : members_)
    if (!m) throw InvalidArgument("null class member");
  k_ = members_.front()->num_classes();
  for (const auto& m : members_) {
    if (m->num_classes() != k_) throw InvalidArgument("class members disagree on k");
    if (m->input_dim() != members_.front()->input_dim())
      throw InvalidArgument("class members disagree on input dimension");
  }
}

std::vector<Matrix> FiniteScoringClass::score_all(const Matrix& x) const {
  std::vector<Matrix> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m->score_batch(x));
  return out;
}

std::vector<std::vector<int>> FiniteScoringClass::label_all(const Matrix& x) const {
  std::vector<std::vector<int>> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(argmax_rows(m->score_batch(x)));
  return out;
}

FiniteScoringClass FiniteScoringClass::with_member(ScorerPtr extra) const {
  auto members = members_;
  members.push_back(std::move(extra));
  return FiniteScoringClass(std::move(members), ClassTraits{});
}

FiniteScoringClass threshold_class(const std::vector<double>& thresholds,
                                   const std::vector<int>& signs, std::size_t input_dim,
                                   std::size_t axis) {
  if (thresholds.empty() || signs.empty()) throw InvalidArgument("threshold grid is empty");
  if (axis >= input_dim) throw InvalidArgument("threshold axis outside input dimension");
  bool has_pos = false;
  bool has_neg = false;
  std::vector<ScorerPtr> members;
  for (double t : thresholds) {
    for (int s : signs) {
      if (s != 1 && s != -1) throw InvalidArgument("threshold signs must be +1 or -1");
      has_pos |= s == 1;
      has_neg |= s == -1;
      BinaryLabelerScorer::Labeler g;
      if (s == 1) {
        g = [t, axis](std::span<const double> x) { return x[axis] >= t ? 1 : 0; };
      } else {
        g = [t, axis](std::span<const double> x) { return x[axis] < t ? 1 : 0; };
      }
      members.push_back(std::make_shared<BinaryLabelerScorer>(std::move(g), input_dim));
    }
  }
  return FiniteScoringClass(std::move(members), ClassTraits{has_pos && has_neg, false});
}

FiniteScoringClass linear_class(const std::vector<Matrix>& weights,
                                const std::vector<Vector>& biases) {
  if (weights.empty()) throw InvalidArgument("linear weight grid is empty");
  if (!biases.empty() && biases.size() != weights.size())
    throw InvalidArgument("need one bias per weight matrix");
  std::vector<ScorerPtr> members;
  for (std::size_t j = 0; j < weights.size(); ++j)
    members.push_back(
        std::make_shared<LinearScorer>(weights[j], biases.empty() ? Vector{} : biases[j]));
  return FiniteScoringClass(std::move(members));
}

FiniteScoringClass relu_example_class(const std::vector<double>& a_grid,
                                      const std::vector<double>& b_grid) {
  if (a_grid.empty() || b_grid.empty()) throw InvalidArgument("relu grid is empty");
  std::vector<ScorerPtr> members;
  for (double a : a_grid) {
    for (double b : b_grid) {
      auto g = [a, b](std::span<const double> x) {
        const double left = std::max(0.0, x[0] - a);
        const double right = std::max(0.0, x[1] - b);
        return left >= right ? 1 : 0;
      };
      members.push_back(std::make_shared<BinaryLabelerScorer>(std::move(g), 2));
    }
  }
  return FiniteScoringClass(std::move(members));
}

namespace {

ScorerPtr binary_table_scorer(const Matrix& points, const std::vector<int>& labeling) {
  Matrix table(points.rows(), 2);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double c = labeling[static_cast<std::size_t>(r)] != 0 ? 1.0 : -1.0;
    table(r, 0) = -c;
    table(r, 1) = c;
  }
  return std::make_shared<TabularScorer>(points, std::move(table));
}

}  // namespace

FiniteScoringClass binary_tabular_class(const Matrix& points,
                                        const std::vector<std::vector<int>>& labelings,
                                        bool add_complements) {
  if (labelings.empty()) throw InvalidArgument("no labelings given");
  std::vector<std::vector<int>> all;
  std::set<std::vector<int>> seen;
  for (const auto& l : labelings) {
    if (static_cast<Eigen::Index>(l.size()) != points.rows())
      throw InvalidArgument("labeling length must equal the number of points");
    for (int v : l)
      if (v != 0 && v != 1) throw InvalidArgument("binary labelings must be 0/1");
    all.push_back(l);
    seen.insert(l);
  }
  if (add_complements) {
    const std::size_t base = all.size();
    for (std::size_t j = 0; j < base; ++j) {
      std::vector<int> c(all[j].size());
      std::transform(all[j].begin(), all[j].end(), c.begin(), [](int v) { return 1 - v; });
      if (seen.insert(c).second) all.push_back(std::move(c));
    }
  }
  std::vector<ScorerPtr> members;
  members.reserve(all.size());
  for (const auto& l : all) members.push_back(binary_table_scorer(points, l));
  return FiniteScoringClass(std::move(members), ClassTraits{add_complements, false});
}

bool check_closed_under_complement(const FiniteScoringClass& cls, const Matrix& x) {
  if (cls.num_classes() != 2) return false;
  const auto labels = cls.label_all(x);
  std::set<std::vector<int>> seen(labels.begin(), labels.end());
  for (const auto& l : labels) {
    std::vector<int> c(l.size());
    std::transform(l.begin(), l.end(), c.begin(), [](int v) { return 1 - v; });
    if (!seen.contains(c)) return false;
  }
  return true;
}

void save_tabular_class(const FiniteScoringClass& cls, const Matrix& points,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << "member,point_index";
  for (int y = 0; y < cls.num_classes(); ++y) out << ",score_" << y;
  out << '\n';
  const auto tables = cls.score_all(points);
  for (std::size_t j = 0; j < tables.size(); ++j) {
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
      out << j << ',' << r;
      for (Eigen::Index y = 0; y < tables[j].cols(); ++y)
        out << fmt::format(",{:.17g}", tables[j](r, y));
      out << '\n';
    }
  }
}

FiniteScoringClass load_tabular_class(const std::filesystem::path& path, const Matrix& points) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "member" || header[1] != "point_index")
    throw ParseError(1, "header must be member,point_index,score_0,...");
  const std::size_t k = header.size() - 2;

  std::map<std::size_t, Matrix> tables;
  std::map<std::size_t, std::vector<bool>> filled;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != k + 2) throw ParseError(line_no, "wrong number of fields");
    std::size_t member = 0;
    long long point = 0;
    try {
      member = std::stoul(cells[0]);
      point = std::stoll(cells[1]);
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad member or point index");
    }
    if (point < 0 || point >= points.rows()) throw ParseError(line_no, "point_index out of range");
    auto [it, inserted] = tables.try_emplace(member, Matrix::Zero(points.rows(), static_cast<Eigen::Index>(k)));
    if (inserted) filled[member].assign(static_cast<std::size_t>(points.rows()), false);
    for (std::size_t y = 0; y < k; ++y) {
      char* end = nullptr;
      const double v = std::strtod(cells[y + 2].c_str(), &end);
      if (cells[y + 2].empty() || *end != '\0') throw ParseError(line_no, "bad score");
      it->second(point, static_cast<Eigen::Index>(y)) = v;
    }
    filled[member][static_cast<std::size_t>(point)] = true;
  }
  if (tables.empty()) throw ParseError(line_no, "no members");
  std::vector<ScorerPtr> members;
  std::size_t expected = 0;
  for (auto& [member, table] : tables) {
    if (member != expected++) throw ParseError(line_no, "member indices must be 0..M-1");
    const auto& f = filled[member];
    if (!std::all_of(f.begin(), f.end(), [](bool b) { return b; }))
      throw ParseError(line_no, fmt::format("member {} does not cover every point", member));
    members.push_back(std::make_shared<TabularScorer>(points, std::move(table)));
  }
  FiniteScoringClass cls(std::move(members));
  return FiniteScoringClass(cls.members(),
                            ClassTraits{check_closed_under_complement(cls, points), false});
}

}  // namespace mddlab
