#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

Vector row(const LabeledSample& s, std::size_t i) {
  return s.features().row(static_cast<Eigen::Index>(i)).transpose();
}

}  // namespace

int argmax(const Vector& s) {
  int best = 0;
  for (int c = 1; c < s.size(); ++c)
    if (s(c) > s(best)) best = c;
  return best;
}

double half_gap(const Vector& s, int y) {
  double other = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < s.size(); ++c)
    if (c != y) other = std::max(other, s(c));
  if (s.size() == 1) other = 0.0;
  return 0.5 * (s(y) - other);
}

double ramp(double t, double rho) {
  if (t <= 0.0) return 1.0;
  if (t >= rho) return 0.0;
  return 1.0 - t / rho;
}

int label_at(const ScoringFunction& f, const LabeledSample& s, std::size_t i) {
  return argmax(f.scores(row(s, i)));
}

double disagreement(const ScoringFunction& a, const ScoringFunction& b, const LabeledSample& s) {
  double count = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) count += label_at(a, s, i) != label_at(b, s, i);
  return count / static_cast<double>(s.size());
}

double zero_one_error(const ScoringFunction& f, const LabeledSample& s) {
  double count = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) count += label_at(f, s, i) != *s.label(i);
  return count / static_cast<double>(s.size());
}

double ramp_error(const ScoringFunction& f, const LabeledSample& s, double rho) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += ramp(half_gap(f.scores(row(s, i)), *s.label(i)), rho);
  return total / static_cast<double>(s.size());
}

double ramp_disparity(const ScoringFunction& f1, const ScoringFunction& f2,
                      const LabeledSample& s, double rho) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    total += ramp(half_gap(f1.scores(row(s, i)), label_at(f2, s, i)), rho);
  return total / static_cast<double>(s.size());
}

double dd(const ScoringFunction& anchor, const FiniteScoringClass& H, const LabeledSample& P,
          const LabeledSample& Q) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < H.size(); ++j)
    best = std::max(best, disagreement(H[j], anchor, Q) - disagreement(H[j], anchor, P));
  return best;
}

double hdh(const FiniteScoringClass& H, const LabeledSample& P, const LabeledSample& Q) {
  double best = 0.0;
  for (std::size_t a = 0; a < H.size(); ++a)
    for (std::size_t b = 0; b < H.size(); ++b)
      best = std::max(best, std::abs(disagreement(H[b], H[a], Q) - disagreement(H[b], H[a], P)));
  return best;
}

double mdd(const ScoringFunction& anchor, const FiniteScoringClass& F, const LabeledSample& P,
           const LabeledSample& Q, double rho) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < F.size(); ++j)
    best = std::max(best,
                    ramp_disparity(F[j], anchor, Q, rho) - ramp_disparity(F[j], anchor, P, rho));
  return best;
}

double lambda(const FiniteScoringClass& F, const LabeledSample& P, const LabeledSample& Q,
              double rho) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < F.size(); ++j)
    best = std::min(best, ramp_error(F[j], P, rho) + ramp_error(F[j], Q, rho));
  return best;
}

double rademacher_exhaustive(const Matrix& M) {
  const auto n = static_cast<int>(M.cols());
  const std::uint64_t patterns = std::uint64_t{1} << n;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < M.rows(); ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += ((mask >> i) & 1U) ? M(j, i) : -M(j, i);
      best = std::max(best, s);
    }
    total += best / n;
  }
  return total / static_cast<double>(patterns);
}

std::size_t exact_internal_cover(const Matrix& M, double eps) {
  const auto rows = static_cast<std::size_t>(M.rows());
  const double n = static_cast<double>(M.cols());
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::sqrt((M.row(static_cast<Eigen::Index>(a)) - M.row(static_cast<Eigen::Index>(b)))
                         .squaredNorm() / n);
  };
  for (std::size_t size = 1; size <= rows; ++size) {
    for (std::uint32_t subset = 0; subset < (std::uint32_t{1} << rows); ++subset) {
      if (static_cast<std::size_t>(std::popcount(subset)) != size) continue;
      bool covered = true;
      for (std::size_t r = 0; r < rows && covered; ++r) {
        bool near = false;
        for (std::size_t c = 0; c < rows && !near; ++c)
          near = ((subset >> c) & 1U) && dist(r, c) <= eps;
        covered = near;
      }
      if (covered) return size;
    }
  }
  return rows;
}

Vector central_difference(const std::function<double(const Vector&)>& fn, const Vector& theta,
                          double h) {
  Vector g(theta.size());
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const double up = fn(probe);
    probe(i) = theta(i) - h;
    const double down = fn(probe);
    probe(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& a, const Vector& b, double floor) {
  return (a - b).norm() / std::max(a.norm() + b.norm(), floor);
}

}  // namespace oracle
