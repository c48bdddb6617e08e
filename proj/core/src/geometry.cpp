#include "hug/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hug/rng.hpp"

namespace hug {

namespace {
constexpr double kZeroNorm = 1e-12;
}

PointConfig::PointConfig(Matrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 2) {
    throw Error("PointConfig requires n >= 1 and d >= 2");
  }
  if (!points_.allFinite()) {
    throw Error("PointConfig contains non-finite entries");
  }
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    const double norm = points_.row(i).norm();
    if (std::abs(norm - 1.0) > kNormTol) {
      throw Error("PointConfig row " + std::to_string(i) +
                  " is off the unit sphere (norm " + std::to_string(norm) + ")");
    }
  }
}

Labels::Labels(std::vector<int> y, int num_classes)
    : y_(std::move(y)), num_classes_(num_classes) {
  if (num_classes_ < 2) {
    throw Error("Labels require at least 2 classes");
  }
  if (y_.empty()) {
    throw Error("Labels require at least one sample");
  }
  index_sets_.resize(static_cast<std::size_t>(num_classes_));
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const int c = y_[i];
    if (c < 0 || c >= num_classes_) {
      throw Error("label " + std::to_string(c) + " out of range [0, " +
                  std::to_string(num_classes_) + ")");
    }
    index_sets_[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
  }
  // Empty classes are representable (a state can carry more proxies than
  // sampled classes); operations that need per-class statistics reject them.
}

PointConfig normalize_rows(const RawMatrix& m) {
  if (!m.allFinite()) {
    throw Error("normalize_rows: non-finite input");
  }
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm < kZeroNorm) {
      throw ZeroRowError(i);
    }
    out.row(i) /= norm;
  }
  return PointConfig(std::move(out));
}

PointConfig sample_gaussian_sphere(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  if (n < 1 || d < 2) {
    throw Error("sample_gaussian_sphere requires n >= 1 and d >= 2");
  }
  Rng rng(seed);
  Matrix out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out(i, j) = rng.gaussian();
    }
  }
  return normalize_rows(out);
}

Matrix pairwise_sq_dists(const PointConfig& p) {
  const Matrix& pts = p.points();
  const Eigen::Index n = pts.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (pts.row(i) - pts.row(j)).squaredNorm();
      out(i, j) = sq;
      out(j, i) = sq;
    }
  }
  return out;
}

Vector tangent_project(const Eigen::Ref<const Vector>& base,
                       const Eigen::Ref<const Vector>& g) {
  return g - base.dot(g) * base;
}

Matrix tangent_project_rows(const Matrix& base_points, const Matrix& grads) {
  Matrix out = grads;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) -= base_points.row(i).dot(grads.row(i)) * base_points.row(i);
  }
  return out;
}

ClassMeans class_means(const RawMatrix& features, const Labels& labels) {
  if (features.rows() != labels.n()) {
    throw Error("class_means: feature count does not match labels");
  }
  const int C = labels.num_classes();
  const Eigen::Index d = features.cols();
  RawMatrix means = RawMatrix::Zero(C, d);
  for (int c = 0; c < C; ++c) {
    const auto& idx = labels.index_sets()[static_cast<std::size_t>(c)];
    for (int i : idx) {
      means.row(c) += features.row(i);
    }
    means.row(c) /= static_cast<double>(idx.size());
  }
  Vector global_mean = features.colwise().mean().transpose();

  Matrix centered(C, d);
  for (int c = 0; c < C; ++c) {
    centered.row(c) = means.row(c) - global_mean.transpose();
    const double norm = centered.row(c).norm();
    if (norm < kZeroNorm) {
      throw DegenerateMeanError(c);
    }
    centered.row(c) /= norm;
  }
  return ClassMeans{std::move(means), PointConfig(std::move(centered)),
                    std::move(global_mean)};
}

double resultant_norm(const PointConfig& p) {
  return (p.points().colwise().mean()).norm();
}

}  // namespace hug
