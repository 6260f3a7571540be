#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mddlab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Domain { Source, Target };

/// A class index, or empty for an unlabeled row (written as -1 in CSV).
using Label = std::optional<int>;

inline constexpr std::nullopt_t kUnlabeled = std::nullopt;

const char* to_string(Domain domain) noexcept;

/// n x d feature matrix with one label per row, a domain tag and a class count.
///
/// This is the empirical distribution used everywhere downstream: each row has
/// weight 1/n. Expected quantities over a finite support are obtained by
/// passing the whole support as a sample.
class LabeledSample {
 public:
  /// Throws InvalidArgument when n == 0, k < 2, sizes disagree or a label is
  /// outside [0, k).
  LabeledSample(Matrix features, std::vector<Label> labels, Domain domain, int num_classes);

  std::size_t size() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  int num_classes() const noexcept { return k_; }
  Domain domain() const noexcept { return domain_; }

  const Matrix& features() const noexcept { return features_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  Label label(std::size_t i) const { return labels_.at(i); }

  bool fully_labeled() const noexcept;
  bool fully_unlabeled() const noexcept;

  /// Labels as plain ints; throws InvalidArgument if any row is unlabeled.
  std::vector<int> require_labels() const;

  /// Copy with every label replaced by kUnlabeled.
  LabeledSample without_labels() const;

  LabeledSample with_domain(Domain domain) const;

  /// Rows picked by index (repetition allowed), in the given order.
  LabeledSample subset(std::span<const std::size_t> rows) const;

  /// Rows are concatenated; the domain of `*this` is kept.
  LabeledSample concat(const LabeledSample& other) const;

  friend bool operator==(const LabeledSample&, const LabeledSample&);

 private:
  Matrix features_;
  std::vector<Label> labels_;
  Domain domain_;
  int k_;
};

/// scale * R(rotation) * x + translation, row-wise. For d > 2 the rotation acts
/// on the first two coordinates; for d == 1 only rotation 0 is allowed.
struct ShiftTransform {
  double rotation = 0.0;
  Vector translation;  // empty means zero
  double scale = 1.0;

  /// Rotation by `angle` about `center` (2-D), followed by no scaling.
  static ShiftTransform rotation_about(double angle, double cx, double cy);
};

/// Two interleaving half-circles of radius 1: class 0 on the upper half-circle
/// centred at (0, 0), class 1 on the lower half-circle centred at (1, 0.5).
/// Class 0 gets ceil(n/2) points, class 1 floor(n/2). Points on each arc are
/// evenly spaced in angle over [0, pi]; Gaussian noise of std `noise` is then
/// added per coordinate.
LabeledSample make_moons(std::size_t n, double noise, std::uint64_t seed);

LabeledSample apply_shift(const LabeledSample& sample, const ShiftTransform& transform);

/// Isotropic Gaussian clusters; class j is centred at means[j]. Rows are
/// grouped by class.
LabeledSample make_gaussian_blobs(const std::vector<Vector>& means, double stddev,
                                  std::size_t n_per_class, std::uint64_t seed);

/// CSV with header `x0,...,x{d-1},y,domain`. Labels of -1 load as unlabeled.
/// When `num_classes` is not given it is inferred as max(2, max label + 1).
/// Throws ParseError naming the line on malformed content.
LabeledSample load_csv(const std::filesystem::path& path,
                       std::optional<int> num_classes = std::nullopt);

/// Writes 17 significant digits per float, `\n` line endings.
void save_csv(const LabeledSample& sample, const std::filesystem::path& path);

/// Random subset of `count` distinct rows (without replacement).
LabeledSample sample_rows(const LabeledSample& sample, std::size_t count, std::uint64_t seed);

}  // namespace mddlab
