#include "mddlab/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "mddlab/error.hpp"
#include "mddlab/rng.hpp"

namespace mddlab {

const char* to_string(Domain domain) noexcept {
  return domain == Domain::Source ? "source" : "target";
}

LabeledSample::LabeledSample(Matrix features, std::vector<Label> labels, Domain domain,
                             int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), domain_(domain), k_(num_classes) {
  if (features_.rows() == 0) throw InvalidArgument("sample must have at least one row");
  if (k_ < 2) throw InvalidArgument("class count must be at least 2");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size())
    throw InvalidArgument(fmt::format("{} feature rows but {} labels", features_.rows(),
                                      labels_.size()));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto& y = labels_[i];
    if (y && (*y < 0 || *y >= k_))
      throw InvalidArgument(fmt::format("label {} at row {} outside [0, {})", *y, i, k_));
  }
}

bool LabeledSample::fully_labeled() const noexcept {
  return std::all_of(labels_.begin(), labels_.end(), [](const Label& y) { return y.has_value(); });
}

bool LabeledSample::fully_unlabeled() const noexcept {
  return std::none_of(labels_.begin(), labels_.end(), [](const Label& y) { return y.has_value(); });
}

std::vector<int> LabeledSample::require_labels() const {
  std::vector<int> out;
  out.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!labels_[i]) throw InvalidArgument(fmt::format("row {} is unlabeled", i));
    out.push_back(*labels_[i]);
  }
  return out;
}

LabeledSample LabeledSample::without_labels() const {
  return {features_, std::vector<Label>(labels_.size(), kUnlabeled), domain_, k_};
}

LabeledSample LabeledSample::with_domain(Domain domain) const {
  return {features_, labels_, domain, k_};
}

LabeledSample LabeledSample::subset(std::span<const std::size_t> rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<Label> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw InvalidArgument("subset row index out of range");
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(rows[r]));
    y.push_back(labels_[rows[r]]);
  }
  return {std::move(x), std::move(y), domain_, k_};
}

LabeledSample LabeledSample::concat(const LabeledSample& other) const {
  if (other.dim() != dim() || other.k_ != k_)
    throw InvalidArgument("concat requires matching dimension and class count");
  Matrix x(features_.rows() + other.features_.rows(), features_.cols());
  x << features_, other.features_;
  std::vector<Label> y = labels_;
  y.insert(y.end(), other.labels_.begin(), other.labels_.end());
  return {std::move(x), std::move(y), domain_, k_};
}

bool operator==(const LabeledSample& a, const LabeledSample& b) {
  return a.domain_ == b.domain_ && a.k_ == b.k_ && a.labels_ == b.labels_ &&
         a.features_.rows() == b.features_.rows() && a.features_.cols() == b.features_.cols() &&
         a.features_ == b.features_;
}

ShiftTransform ShiftTransform::rotation_about(double angle, double cx, double cy) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  ShiftTransform t;
  t.rotation = angle;
  t.translation = Vector(2);
  t.translation << cx - (c * cx - s * cy), cy - (s * cx + c * cy);
  t.scale = 1.0;
  return t;
}

namespace {

// Evenly spaced angles over [0, pi]; a single point sits at angle 0.
double arc_angle(std::size_t i, std::size_t count) {
  if (count <= 1) return 0.0;
  return std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

LabeledSample make_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("make_moons needs n >= 2");
  if (!(noise >= 0.0)) throw InvalidArgument("make_moons needs noise >= 0");
  const std::size_t n0 = (n + 1) / 2;
  const std::size_t n1 = n / 2;
  Matrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<Label> y(n);
  for (std::size_t i = 0; i < n0; ++i) {
    const double t = arc_angle(i, n0);
    x(static_cast<Eigen::Index>(i), 0) = std::cos(t);
    x(static_cast<Eigen::Index>(i), 1) = std::sin(t);
    y[i] = 0;
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double t = arc_angle(i, n1);
    const auto row = static_cast<Eigen::Index>(n0 + i);
    x(row, 0) = 1.0 - std::cos(t);
    x(row, 1) = 0.5 - std::sin(t);
    y[n0 + i] = 1;
  }
  if (noise > 0.0) {
    Rng rng(seed);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) += noise * rng.normal();
  }
  return {std::move(x), std::move(y), Domain::Source, 2};
}

LabeledSample apply_shift(const LabeledSample& sample, const ShiftTransform& transform) {
  if (!(transform.scale > 0.0)) throw InvalidArgument("shift scale must be positive");
  const auto d = static_cast<Eigen::Index>(sample.dim());
  if (transform.translation.size() != 0 && transform.translation.size() != d)
    throw InvalidArgument("translation dimension does not match the sample");
  if (d < 2 && transform.rotation != 0.0)
    throw InvalidArgument("rotation needs at least two feature dimensions");

  Matrix x = sample.features();
  if (transform.rotation != 0.0) {
    const double c = std::cos(transform.rotation);
    const double s = std::sin(transform.rotation);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double a = x(r, 0);
      const double b = x(r, 1);
      x(r, 0) = c * a - s * b;
      x(r, 1) = s * a + c * b;
    }
  }
  if (transform.scale != 1.0) x *= transform.scale;
  if (transform.translation.size() != 0) x.rowwise() += transform.translation.transpose();
  return {std::move(x), sample.labels(), Domain::Target, sample.num_classes()};
}

LabeledSample make_gaussian_blobs(const std::vector<Vector>& means, double stddev,
                                  std::size_t n_per_class, std::uint64_t seed) {
  if (means.size() < 2) throw InvalidArgument("make_gaussian_blobs needs at least two means");
  if (!(stddev > 0.0)) throw InvalidArgument("make_gaussian_blobs needs stddev > 0");
  if (n_per_class == 0) throw InvalidArgument("make_gaussian_blobs needs n_per_class >= 1");
  const Eigen::Index d = means.front().size();
  for (const auto& m : means)
    if (m.size() != d || d == 0) throw InvalidArgument("all means must share a positive dimension");

  Rng rng(seed);
  const std::size_t n = means.size() * n_per_class;
  Matrix x(static_cast<Eigen::Index>(n), d);
  std::vector<Label> y(n);
  std::size_t row = 0;
  for (std::size_t j = 0; j < means.size(); ++j) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
      for (Eigen::Index c = 0; c < d; ++c)
        x(static_cast<Eigen::Index>(row), c) = means[j](c) + stddev * rng.normal();
      y[row] = static_cast<int>(j);
    }
  }
  return {std::move(x), std::move(y), Domain::Source, static_cast<int>(means.size())};
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line) {
  if (text.empty()) throw ParseError(line, "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw ParseError(line, "bad number '" + text + "'");
  return v;
}

int parse_int(const std::string& text, std::size_t line) {
  int v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw ParseError(line, "bad label '" + text + "'");
  return v;
}

}  // namespace

LabeledSample load_csv(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "domain")
    throw ParseError(1, "header must be x0,...,x{d-1},y,domain");
  const std::size_t d = header.size() - 2;
  for (std::size_t c = 0; c < d; ++c)
    if (header[c] != "x" + std::to_string(c)) throw ParseError(1, "unexpected column " + header[c]);

  std::vector<double> values;
  std::vector<Label> labels;
  std::vector<std::size_t> label_lines;
  std::optional<Domain> domain;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != d + 2)
      throw ParseError(line_no, fmt::format("expected {} fields, found {}", d + 2, cells.size()));
    for (std::size_t c = 0; c < d; ++c) values.push_back(parse_double(cells[c], line_no));
    const int y = parse_int(cells[d], line_no);
    if (y < -1) throw ParseError(line_no, "label must be >= -1");
    if (num_classes && y >= *num_classes)
      throw ParseError(line_no, fmt::format("label {} not below class count {}", y, *num_classes));
    labels.push_back(y == -1 ? kUnlabeled : Label{y});
    label_lines.push_back(line_no);

    Domain row_domain;
    if (cells[d + 1] == "source") {
      row_domain = Domain::Source;
    } else if (cells[d + 1] == "target") {
      row_domain = Domain::Target;
    } else {
      throw ParseError(line_no, "domain must be 'source' or 'target'");
    }
    if (domain && *domain != row_domain) throw ParseError(line_no, "mixed domains in one file");
    domain = row_domain;
  }
  if (labels.empty()) throw ParseError(line_no, "no data rows");

  int k = 2;
  if (num_classes) {
    k = *num_classes;
  } else {
    for (const auto& y : labels)
      if (y) k = std::max(k, *y + 1);
  }
  Matrix x(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      x(r, c) = values[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(c)];
  return {std::move(x), std::move(labels), *domain, k};
}

void save_csv(const LabeledSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < sample.dim(); ++c) out << 'x' << c << ',';
  out << "y,domain\n";
  const auto& x = sample.features();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << fmt::format("{:.17g},", x(r, c));
    const auto& y = sample.labels()[static_cast<std::size_t>(r)];
    out << (y ? *y : -1) << ',' << to_string(sample.domain()) << '\n';
  }
}

LabeledSample sample_rows(const LabeledSample& sample, std::size_t count, std::uint64_t seed) {
  if (count > sample.size()) throw InvalidArgument("subsample larger than population");
  if (count == 0) throw InvalidArgument("subsample must be nonempty");
  std::vector<std::size_t> idx(sample.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return sample.subset(idx);
}

}  // namespace mddlab
