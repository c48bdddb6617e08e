#include "hug/gnc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hug/energy.hpp"

namespace hug {

namespace {
constexpr double kZeroNorm = 1e-12;
}

double average_energy(const PointConfig& points) {
  const Eigen::Index n = points.n();
  if (n < 2) throw Error("average_energy requires at least two points");
  return riesz_energy(points, 2.0) / static_cast<double>(n * (n - 1));
}

double afre(const PointConfig& features, const Labels& labels) {
  const Matrix& x = features.points();
  double total = 0.0;
  for (const auto& idx : labels.index_sets()) {
    const std::size_t m = idx.size();
    if (m < 2) continue;  // singleton classes contribute an empty average
    double class_sum = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        class_sum += 2.0 * (x.row(idx[a]) - x.row(idx[b])).norm();
      }
    }
    total += class_sum / static_cast<double>(m * (m - 1));
  }
  return total / static_cast<double>(labels.num_classes());
}

double afmre(const PointConfig& features, const Labels& labels) {
  const Matrix& x = features.points();
  double total = 0.0;
  for (int c = 0; c < labels.num_classes(); ++c) {
    const auto& idx = labels.index_sets()[static_cast<std::size_t>(c)];
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
    for (int i : idx) mean += x.row(i);
    mean /= static_cast<double>(idx.size());
    const double norm = mean.norm();
    if (norm < kZeroNorm) throw DegenerateMeanError(c);
    mean /= norm;
    double class_sum = 0.0;
    for (int i : idx) class_sum += (x.row(i) - mean).norm();
    total += class_sum / static_cast<double>(idx.size());
  }
  return total / static_cast<double>(labels.num_classes());
}

double collapse_metric(const PointConfig& features, const Labels& labels) {
  const Matrix& x = features.points();
  const Eigen::Index d = x.cols();
  const Eigen::Index n = x.rows();
  const int C = labels.num_classes();

  Matrix means = Matrix::Zero(C, d);
  for (int c = 0; c < C; ++c) {
    const auto& idx = labels.index_sets()[static_cast<std::size_t>(c)];
    for (int i : idx) means.row(c) += x.row(i);
    means.row(c) /= static_cast<double>(idx.size());
  }
  const Eigen::RowVectorXd global = x.colwise().mean();

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd delta = x.row(i) - means.row(labels[i]);
    within += delta.transpose() * delta;
  }
  within /= static_cast<double>(n);

  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < C; ++c) {
    const Eigen::RowVectorXd delta = means.row(c) - global;
    between += delta.transpose() * delta;
  }
  between /= static_cast<double>(C);

  // Moore-Penrose pseudoinverse; singular values below 1e-10 sigma_max drop.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      between, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? 1e-10 * sigma(0) : 0.0;
  Eigen::VectorXd inverted = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma(k) > cutoff && sigma(k) > 0.0) inverted(k) = 1.0 / sigma(k);
  }
  const Eigen::MatrixXd pinv =
      svd.matrixV() * inverted.asDiagonal() * svd.matrixU().transpose();
  return (pinv * within).trace();
}

double equinorm_cv(const PointConfig& features, const Labels& labels) {
  const ClassMeans cm = class_means(features.points(), labels);
  const int C = labels.num_classes();
  Eigen::VectorXd norms(C);
  for (int c = 0; c < C; ++c) {
    norms(c) = (cm.means.row(c) - cm.global_mean.transpose()).norm();
  }
  const double mean = norms.mean();
  if (mean < kZeroNorm) throw DegenerateMeanError(-1);
  const double variance = (norms.array() - mean).square().mean();
  return std::sqrt(variance) / mean;
}

double self_duality_gap(const PointConfig& proxies, const PointConfig& features,
                        const Labels& labels) {
  const ClassMeans cm = class_means(features.points(), labels);
  if (proxies.n() != labels.num_classes()) {
    throw Error("self_duality_gap: proxy count does not match class count");
  }
  double worst = 0.0;
  for (int c = 0; c < labels.num_classes(); ++c) {
    worst = std::max(
        worst,
        (proxies.row(c) - cm.centered_normalized.row(c)).norm());
  }
  return worst;
}

double nearest_mean_agreement(const PointConfig& proxies,
                              const PointConfig& features, const Labels& labels) {
  const ClassMeans cm = class_means(features.points(), labels);
  if (proxies.n() != labels.num_classes()) {
    throw Error("nearest_mean_agreement: proxy count does not match class count");
  }
  const Matrix& x = features.points();
  const int C = labels.num_classes();
  Eigen::Index agreements = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best_proxy = 0;
    double best_score = proxies.row(0).dot(x.row(i));
    int best_mean = 0;
    double best_dist = (x.row(i) - cm.means.row(0)).norm();
    for (int c = 1; c < C; ++c) {
      const double score = proxies.row(c).dot(x.row(i));
      if (score > best_score) {
        best_score = score;
        best_proxy = c;
      }
      const double dist = (x.row(i) - cm.means.row(c)).norm();
      if (dist < best_dist) {
        best_dist = dist;
        best_mean = c;
      }
    }
    if (best_proxy == best_mean) ++agreements;
  }
  return static_cast<double>(agreements) / static_cast<double>(x.rows());
}

std::pair<double, double> fda_traces(const RawMatrix& features, const Labels& labels) {
  if (features.rows() != labels.n()) {
    throw Error("fda_traces: feature count does not match labels");
  }
  const int C = labels.num_classes();
  const Eigen::RowVectorXd global = features.colwise().mean();

  double trace_sb = 0.0;
  double trace_sw = 0.0;
  for (int c = 0; c < C; ++c) {
    const auto& idx = labels.index_sets()[static_cast<std::size_t>(c)];
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features.cols());
    for (int i : idx) mean += features.row(i);
    mean /= static_cast<double>(idx.size());
    trace_sb += static_cast<double>(idx.size()) * (mean - global).squaredNorm();
    for (int i : idx) trace_sw += (features.row(i) - mean).squaredNorm();
  }
  return {trace_sb, trace_sw};
}

double etf_deviation(const PointConfig& p) {
  const Eigen::Index n = p.n();
  if (n < 2) throw Error("etf_deviation requires at least two points");
  const double target = -1.0 / static_cast<double>(n - 1);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(p.row(i).dot(p.row(j)) - target));
    }
  }
  return worst;
}

CrossPolytopeDeviation cross_polytope_deviation(const PointConfig& p) {
  const Eigen::Index n = p.n();
  if (n != 2 * p.d()) {
    throw WrongCountError("cross_polytope_deviation requires n = 2d (got n=" +
                          std::to_string(n) + ", d=" + std::to_string(p.d()) + ")");
  }
  std::vector<Eigen::Index> partner(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (partner[static_cast<std::size_t>(i)] >= 0) continue;
    Eigen::Index best = -1;
    double best_inner = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (partner[static_cast<std::size_t>(j)] >= 0) continue;
      const double inner = p.row(i).dot(p.row(j));
      if (inner < best_inner) {
        best_inner = inner;
        best = j;
      }
    }
    partner[static_cast<std::size_t>(i)] = best;
    partner[static_cast<std::size_t>(best)] = i;
  }

  CrossPolytopeDeviation out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double inner = p.row(i).dot(p.row(j));
      if (partner[static_cast<std::size_t>(i)] == j) {
        out.deviation = std::max(out.deviation, std::abs(inner + 1.0));
        if (inner > 0.0) out.matched_antipodal = false;
      } else {
        out.deviation = std::max(out.deviation, std::abs(inner));
      }
    }
  }
  return out;
}

std::pair<double, double> uniformity_stats(const PointConfig& p) {
  const Matrix& pts = p.points();
  const double first_moment = resultant_norm(p);
  const Eigen::Index d = pts.cols();
  Eigen::MatrixXd second = pts.transpose() * pts / static_cast<double>(pts.rows());
  second -= Eigen::MatrixXd::Identity(d, d) / static_cast<double>(d);
  return {first_moment, second.norm()};
}

GncReport gnc_report(const PointConfig& features, const Labels& labels,
                     const PointConfig& proxies) {
  GncReport report;
  const ClassMeans cm = class_means(features.points(), labels);

  report.ace = average_energy(proxies);
  report.acme = average_energy(cm.centered_normalized);
  report.afre = afre(features, labels);
  report.afmre = afmre(features, labels);
  report.reverse_energy = reverse_energy(features, labels);
  const auto traces = fda_traces(features.points(), labels);
  report.trace_sb = traces.first;
  report.trace_sw = traces.second;
  report.collapse_metric = collapse_metric(features, labels);
  report.equinorm_cv = equinorm_cv(features, labels);
  report.self_duality_gap = self_duality_gap(proxies, features, labels);
  report.nearest_mean_agreement = nearest_mean_agreement(proxies, features, labels);
  report.etf_deviation = etf_deviation(cm.centered_normalized);
  if (labels.num_classes() == 2 * features.d()) {
    report.cross_polytope_deviation =
        cross_polytope_deviation(cm.centered_normalized).deviation;
  }
  const auto uniformity = uniformity_stats(cm.centered_normalized);
  report.resultant_norm = uniformity.first;
  report.covariance_deviation = uniformity.second;
  return report;
}

}  // namespace hug
