#include "hug/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hug/rng.hpp"

namespace hug {
namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

double riesz_pair(double sq_dist, double s) {
  const double value = std::pow(sq_dist, -0.5 * s);
  return s > 0 ? value : -value;
}

}  // namespace

PointConfig etf_config(int num_points, int d) {
  if (num_points < 2) throw Error("etf_config requires at least two points");
  if (num_points > d + 1) throw DimensionTooSmallError(num_points, d);
  const int C = num_points;

  // Columns of the centering matrix I - (1/C) 1 1^T span the hyperplane
  // orthogonal to the all-ones vector; orthonormalize the first C-1 of them
  // and express all C columns in that basis.
  Eigen::MatrixXd centered = Eigen::MatrixXd::Identity(C, C);
  centered.array() -= 1.0 / static_cast<double>(C);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(centered.leftCols(C - 1));
  const Eigen::MatrixXd basis =
      qr.householderQ() * Eigen::MatrixXd::Identity(C, C - 1);

  Matrix points = Matrix::Zero(C, d);
  for (int i = 0; i < C; ++i) {
    const Eigen::VectorXd column = centered.col(i).normalized();
    points.row(i).head(C - 1) = (basis.transpose() * column).transpose();
  }
  return normalize_rows(points);
}

double etf_energy(int num_points, double s) {
  const double C = static_cast<double>(num_points);
  return C * (C - 1.0) * std::pow(2.0 * C / (C - 1.0), -0.5 * s);
}

double circle_energy(int num_points, double s) {
  const double C = static_cast<double>(num_points);
  if (s == 2.0) {
    // Cosecant-sum identity: sum_k csc^2(pi k / C) = (C^2 - 1) / 3.
    return C * (C * C - 1.0) / 12.0;
  }
  double per_point = 0.0;
  for (int k = 1; k < num_points; ++k) {
    const double chord = 2.0 * std::sin(kPi * static_cast<double>(k) / C);
    const double value = std::pow(chord, -s);
    per_point += s > 0 ? value : -value;
  }
  return C * per_point;
}

PointConfig cross_polytope_config(int d) {
  if (d < 2) throw Error("cross_polytope_config requires d >= 2");
  Matrix points = Matrix::Zero(2 * d, d);
  for (int k = 0; k < d; ++k) {
    points(k, k) = 1.0;
    points(d + k, k) = -1.0;
  }
  return PointConfig(std::move(points));
}

double cross_polytope_energy(int d, double s) {
  const double n = 2.0 * static_cast<double>(d);
  return n * ((n - 2.0) * std::pow(2.0, -0.5 * s) + std::pow(4.0, -0.5 * s));
}

namespace {

double dense_energy(const Matrix& pts, double s) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      total += 2.0 * riesz_pair((pts.row(i) - pts.row(j)).squaredNorm(), s);
    }
  }
  return total;
}

Matrix dense_gradient(const Matrix& pts, double s) {
  Matrix grad = Matrix::Zero(pts.rows(), pts.cols());
  const double abs_s = std::abs(s);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      const Eigen::RowVectorXd diff = pts.row(i) - pts.row(j);
      const double sq = diff.squaredNorm();
      if (sq < 1e-24) continue;
      const double coeff = -2.0 * abs_s * std::pow(sq, -0.5 * s - 1.0);
      grad.row(i) += coeff * diff;
      grad.row(j) -= coeff * diff;
    }
  }
  return grad;
}

}  // namespace

BruteForceResult brute_force_min_energy(Eigen::Index n, Eigen::Index d, double s,
                                        int budget, std::uint64_t seed) {
  if (n * d > 64) throw Error("brute_force_min_energy is limited to n*d <= 64");
  if (n < 2 || d < 2) throw Error("brute_force_min_energy requires n >= 2, d >= 2");
  if (budget < 1) throw Error("brute_force_min_energy requires budget >= 1");

  constexpr int kRefinementSteps = 2000;
  Matrix best_points;
  double best_energy = std::numeric_limits<double>::infinity();

  for (int r = 0; r < budget; ++r) {
    Matrix pts = sample_gaussian_sphere(n, d, Rng::derive(seed, static_cast<std::uint64_t>(r)))
                     .points();
    double step = 0.05;
    for (int t = 0; t < kRefinementSteps; ++t) {
      Matrix grad = dense_gradient(pts, s);
      for (Eigen::Index i = 0; i < n; ++i) {
        grad.row(i) -= pts.row(i).dot(grad.row(i)) * pts.row(i);
      }
      pts -= step * grad;
      for (Eigen::Index i = 0; i < n; ++i) {
        pts.row(i) /= pts.row(i).norm();
      }
      if ((t + 1) % 250 == 0) step *= 0.5;
    }
    const double energy = dense_energy(pts, s);
    if (energy < best_energy) {
      best_energy = energy;
      best_points = pts;
    }
  }
  return BruteForceResult{PointConfig(std::move(best_points)), best_energy};
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const PointConfig& p, double h) {
  const Matrix raw = finite_diff_grad_raw(f, p.points(), h);
  Matrix projected = raw;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    projected.row(i) -= p.points().row(i).dot(raw.row(i)) * p.points().row(i);
  }
  return projected;
}

Matrix finite_diff_grad_raw(const std::function<double(const Matrix&)>& f,
                            const Matrix& m, double h) {
  Matrix grad(m.rows(), m.cols());
  Matrix probe = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double forward = f(probe);
      probe(i, j) = saved - h;
      const double backward = f(probe);
      probe(i, j) = saved;
      grad(i, j) = (forward - backward) / (2.0 * h);
    }
  }
  return grad;
}

Vector finite_diff_grad_vec(const std::function<double(const Vector&)>& f,
                            const Vector& v, double h) {
  Vector grad(v.size());
  Vector probe = v;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double saved = probe(k);
    probe(k) = saved + h;
    const double forward = f(probe);
    probe(k) = saved - h;
    const double backward = f(probe);
    probe(k) = saved;
    grad(k) = (forward - backward) / (2.0 * h);
  }
  return grad;
}

McEstimate mc_uniform_pair_energy(int d, double s, int samples, std::uint64_t seed) {
  if (s >= static_cast<double>(d - 1)) throw DivergentError(s, d);
  if (samples < 2) throw Error("mc_uniform_pair_energy requires samples >= 2");
  Rng rng(seed);
  const auto draw_unit = [&](Eigen::VectorXd& out) {
    double norm = 0.0;
    do {
      for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = rng.gaussian();
      norm = out.norm();
    } while (norm < 1e-12);
    out /= norm;
  };

  Eigen::VectorXd u(d), v(d);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < samples; ++k) {
    draw_unit(u);
    draw_unit(v);
    const double value = riesz_pair((u - v).squaredNorm(), s);
    sum += value;
    sum_sq += value * value;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double variance = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return McEstimate{mean, std::sqrt(variance / n)};
}

}  // namespace oracle
}  // namespace hug
