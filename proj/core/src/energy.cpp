#include "hug/energy.hpp"

#include <cmath>
#include <future>
#include <thread>
#include <vector>

namespace hug {

namespace {

constexpr double kSqCoincident = 1e-24;  // squared-distance coincidence guard

// Riesz kernel on a squared distance; the common exponents skip pow.
inline double riesz_kernel_sq(double sq_dist, double s) {
  if (s == 2.0) return 1.0 / sq_dist;
  if (s == 1.0) return 1.0 / std::sqrt(sq_dist);
  if (s == -1.0) return -std::sqrt(sq_dist);
  if (s == -2.0) return -sq_dist;
  const double value = std::pow(sq_dist, -0.5 * s);
  return s > 0 ? value : -value;
}

double riesz_rows_ordered(const Matrix& pts, double s, Eigen::Index row_begin,
                          Eigen::Index row_end) {
  double total = 0.0;
  for (Eigen::Index i = row_begin; i < row_end; ++i) {
    for (Eigen::Index j = 0; j < pts.rows(); ++j) {
      if (j == i) continue;
      const double sq = (pts.row(i) - pts.row(j)).squaredNorm();
      if (s > 0 && sq < kSqCoincident) {
        throw CoincidentPointsError(std::min(i, j), std::max(i, j));
      }
      total += riesz_kernel_sq(sq, s);
    }
  }
  return total;
}

}  // namespace

KernelSpec KernelSpec::riesz(double s) {
  if (s == 0.0) throw Error("Riesz kernel requires s != 0");
  KernelSpec k;
  k.kind = Kind::Riesz;
  k.s = s;
  return k;
}

KernelSpec KernelSpec::logarithmic() {
  KernelSpec k;
  k.kind = Kind::Logarithmic;
  return k;
}

KernelSpec KernelSpec::gaussian(double epsilon) {
  if (!(epsilon > 0.0)) throw Error("Gaussian kernel requires epsilon > 0");
  KernelSpec k;
  k.kind = Kind::Gaussian;
  k.epsilon = epsilon;
  return k;
}

double KernelSpec::pair_value(double sq_dist) const {
  switch (kind) {
    case Kind::Riesz:
      return riesz_kernel_sq(sq_dist, s);
    case Kind::Logarithmic:
      return -0.5 * std::log(sq_dist);
    case Kind::Gaussian:
      return std::exp(-epsilon * epsilon * sq_dist);
  }
  return 0.0;
}

double riesz_energy(const PointConfig& p, double s, Reduce mode) {
  if (s == 0.0) throw Error("riesz_energy requires s != 0");
  const Matrix& pts = p.points();
  const Eigen::Index n = pts.rows();
  if (n < 2) return 0.0;

  if (mode == Reduce::Parallel && n >= 64) {
    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(),
                              static_cast<unsigned>(n / 16)));
    const Eigen::Index chunk = (n + workers - 1) / workers;
    std::vector<std::future<double>> parts;
    for (unsigned w = 0; w < workers; ++w) {
      const Eigen::Index begin = static_cast<Eigen::Index>(w) * chunk;
      const Eigen::Index end = std::min(n, begin + chunk);
      if (begin >= end) break;
      parts.push_back(std::async(std::launch::async, [&pts, s, begin, end] {
        return riesz_rows_ordered(pts, s, begin, end);
      }));
    }
    double total = 0.0;
    for (auto& part : parts) total += part.get();
    return total;
  }

  return riesz_rows_ordered(pts, s, 0, n);
}

Matrix riesz_energy_grad(const PointConfig& p, double s) {
  if (s == 0.0) throw Error("riesz_energy_grad requires s != 0");
  const Matrix& pts = p.points();
  const Eigen::Index n = pts.rows();
  Matrix grad = Matrix::Zero(n, pts.cols());
  const double abs_s = std::abs(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = pts.row(i) - pts.row(j);
      const double sq = diff.squaredNorm();
      if (sq < kSqCoincident) {
        if (s > 0) throw CoincidentPointsError(i, j);
        continue;  // s < 0: kink of the energy; zero subgradient
      }
      // d/dp_i of both ordered kernels: -2|s| * dist^{-s-2} * (p_i - p_j)
      const double coeff = -2.0 * abs_s * std::pow(sq, -0.5 * s - 1.0);
      grad.row(i) += coeff * diff;
      grad.row(j) -= coeff * diff;
    }
  }
  return tangent_project_rows(pts, grad);
}

double log_energy(const PointConfig& p) {
  const Matrix& pts = p.points();
  double total = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      const double sq = (pts.row(i) - pts.row(j)).squaredNorm();
      if (sq < kSqCoincident) throw CoincidentPointsError(i, j);
      total += -std::log(sq);  // two ordered pairs of -log dist
    }
  }
  return total;
}

PairExtremum separation(const PointConfig& p) {
  const Matrix& pts = p.points();
  if (pts.rows() < 2) throw Error("separation requires n >= 2");
  PairExtremum best;
  best.value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      const double dist = (pts.row(i) - pts.row(j)).norm();
      if (dist < best.value) {
        best = PairExtremum{dist, i, j};
      }
    }
  }
  return best;
}

PairExtremum max_pair_distance(const PointConfig& p) {
  const Matrix& pts = p.points();
  if (pts.rows() < 2) throw Error("max_pair_distance requires n >= 2");
  PairExtremum best{-1.0, 0, 1};
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      const double dist = (pts.row(i) - pts.row(j)).norm();
      if (dist > best.value) {
        best = PairExtremum{dist, i, j};
      }
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

namespace {

Matrix gaussian_gram(const Matrix& pts, double epsilon) {
  const Eigen::Index n = pts.rows();
  Matrix gram(n, n);
  const double e2 = epsilon * epsilon;
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = std::exp(-e2 * (pts.row(i) - pts.row(j)).squaredNorm());
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }
  return gram;
}

// Unpivoted Cholesky with the 1e-12 pivot floor; returns the lower factor.
Matrix cholesky_or_throw(const Matrix& gram) {
  const Eigen::Index n = gram.rows();
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double pivot = gram(k, k);
    for (Eigen::Index m = 0; m < k; ++m) pivot -= lower(k, m) * lower(k, m);
    if (pivot < 1e-12) throw SingularGramError(k);
    lower(k, k) = std::sqrt(pivot);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      double value = gram(i, k);
      for (Eigen::Index m = 0; m < k; ++m) value -= lower(i, m) * lower(k, m);
      lower(i, k) = value / lower(k, k);
    }
  }
  return lower;
}

}  // namespace

double log_det_gram(const PointConfig& p, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("log_det_gram requires epsilon > 0");
  const Matrix lower = cholesky_or_throw(gaussian_gram(p.points(), epsilon));
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < lower.rows(); ++k) {
    log_det += 2.0 * std::log(lower(k, k));
  }
  return log_det;
}

Matrix log_det_gram_grad(const PointConfig& p, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("log_det_gram_grad requires epsilon > 0");
  const Matrix& pts = p.points();
  const Eigen::Index n = pts.rows();
  const Matrix gram = gaussian_gram(pts, epsilon);
  const Matrix lower = cholesky_or_throw(gram);
  // G^{-1} from the factor; d(log det)/dG = G^{-1}.
  Matrix inv = Matrix::Identity(n, n);
  lower.triangularView<Eigen::Lower>().solveInPlace(inv);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);

  Matrix grad = Matrix::Zero(n, pts.cols());
  const double scale = -4.0 * epsilon * epsilon;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      grad.row(i) += scale * inv(i, j) * gram(i, j) * (pts.row(i) - pts.row(j));
    }
  }
  return tangent_project_rows(pts, grad);
}

double reverse_energy(const PointConfig& features, const Labels& labels) {
  if (features.n() != labels.n()) {
    throw Error("reverse_energy: feature count does not match labels");
  }
  const Matrix& pts = features.points();
  double total = 0.0;
  for (const auto& idx : labels.index_sets()) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        total += 2.0 * (pts.row(idx[a]) - pts.row(idx[b])).norm();
      }
    }
  }
  return total;
}

}  // namespace hug
