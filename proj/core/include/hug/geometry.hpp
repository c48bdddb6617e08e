#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hug/errors.hpp"

namespace hug {

/// Points are stored as rows; sample order is part of the state (separation
/// ties and greedy matchings break by index).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Unnormalized n x d row matrix (pre-normalization inputs, raw features).
using RawMatrix = Matrix;

/// An ordered set of n unit vectors in R^d.
///
/// Construction enforces the invariants: every entry finite and every row
/// norm within kNormTol of 1. Optimizer steps re-normalize rather than trust
/// accumulated drift.
class PointConfig {
 public:
  static constexpr double kNormTol = 1e-9;

  explicit PointConfig(Matrix points);

  const Matrix& points() const { return points_; }
  Eigen::Index n() const { return points_.rows(); }
  Eigen::Index d() const { return points_.cols(); }
  Eigen::RowVectorXd row(Eigen::Index i) const { return points_.row(i); }

 private:
  Matrix points_;
};

/// Per-sample class indices in [0, C) with the derived index sets A_c.
/// Every class must be non-empty and C >= 2.
class Labels {
 public:
  Labels(std::vector<int> y, int num_classes);

  int num_classes() const { return num_classes_; }
  Eigen::Index n() const { return static_cast<Eigen::Index>(y_.size()); }
  int operator[](Eigen::Index i) const { return y_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& y() const { return y_; }
  /// A_c: sample indices of class c, ascending.
  const std::vector<std::vector<int>>& index_sets() const { return index_sets_; }
  int class_count(int c) const {
    return static_cast<int>(index_sets_[static_cast<std::size_t>(c)].size());
  }

 private:
  std::vector<int> y_;
  int num_classes_;
  std::vector<std::vector<int>> index_sets_;
};

/// Class statistics of a feature matrix under a labelling.
struct ClassMeans {
  RawMatrix means;                  // C x d, mu_c = average over A_c
  PointConfig centered_normalized;  // rows (mu_c - mu_G) / ||mu_c - mu_G||
  Vector global_mean;               // mu_G
};

/// Row-wise projection onto the unit sphere. Throws ZeroRowError if a row
/// norm is below 1e-12.
PointConfig normalize_rows(const RawMatrix& m);

/// n i.i.d. uniform points on S^{d-1} (Gaussian rows, normalized), filled
/// row-major from Rng(seed) so the result is bit-reproducible.
PointConfig sample_gaussian_sphere(Eigen::Index n, Eigen::Index d, std::uint64_t seed);

/// Symmetric n x n matrix of squared Euclidean distances (diagonal 0).
Matrix pairwise_sq_dists(const PointConfig& p);

/// g - <g, base> base: the component of g tangent to the sphere at base.
Vector tangent_project(const Eigen::Ref<const Vector>& base,
                       const Eigen::Ref<const Vector>& g);

/// Row-wise tangent projection of a gradient matrix at the given points.
Matrix tangent_project_rows(const Matrix& base_points, const Matrix& grads);

/// Per-class means, their centered-normalized directions, and the global
/// mean. Throws DegenerateMeanError(c) if ||mu_c - mu_G|| < 1e-12.
ClassMeans class_means(const RawMatrix& features, const Labels& labels);

/// Norm of the average of all rows; 0 for balanced antipodal sets, 1 for a
/// single point.
double resultant_norm(const PointConfig& p);

}  // namespace hug
