#pragma once

// Shared helpers for the test suites: tiny state builders and the
// finite-difference oracle wrappers for loss gradients.

#include <cmath>
#include <functional>
#include <vector>

#include "hug/losses.hpp"
#include "hug/oracle.hpp"

namespace hug_test {

inline hug::Matrix rows(std::initializer_list<std::initializer_list<double>> data) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index d = static_cast<Eigen::Index>(data.begin()->size());
  hug::Matrix m(n, d);
  Eigen::Index i = 0;
  for (const auto& row : data) {
    Eigen::Index j = 0;
    for (double value : row) m(i, j++) = value;
    ++i;
  }
  return m;
}

inline hug::PointConfig circle(std::initializer_list<double> angles) {
  hug::Matrix m(static_cast<Eigen::Index>(angles.size()), 2);
  Eigen::Index i = 0;
  for (double a : angles) {
    m(i, 0) = std::cos(a);
    m(i, 1) = std::sin(a);
    ++i;
  }
  return hug::PointConfig(m);
}

inline hug::LabeledState random_state(int num_classes, int d, int per_class,
                                      std::uint64_t seed) {
  std::vector<int> y;
  for (int c = 0; c < num_classes; ++c) {
    y.insert(y.end(), static_cast<std::size_t>(per_class), c);
  }
  return hug::LabeledState(
      hug::sample_gaussian_sphere(num_classes * per_class, d, seed),
      hug::Labels(std::move(y), num_classes),
      hug::sample_gaussian_sphere(num_classes, d, seed ^ 0xabcdefULL));
}

using LossFn = std::function<hug::LossTerms(const hug::LabeledState&)>;

inline double rel_error(const hug::Matrix& analytic, const hug::Matrix& reference) {
  return (analytic - reference).norm() / std::max(reference.norm(), 1e-12);
}

// Finite-difference check of both gradients of an on-sphere loss. The probe
// re-normalizes rows, whose Jacobian at a unit row is exactly the tangent
// projector, so the differences converge to the Riemannian gradient.
inline double loss_fd_error(const hug::LabeledState& state, const LossFn& loss) {
  const hug::LossTerms terms = loss(state);

  const auto feature_value = [&](const hug::Matrix& m) {
    hug::LabeledState probe = state;
    probe.features = hug::normalize_rows(m).points();
    return loss(probe).value;
  };
  const auto proxy_value = [&](const hug::Matrix& m) {
    hug::LabeledState probe = state;
    probe.proxies = hug::normalize_rows(m).points();
    return loss(probe).value;
  };

  const hug::Matrix fd_features =
      hug::oracle::finite_diff_grad(feature_value, hug::PointConfig(state.features));
  const hug::Matrix fd_proxies =
      hug::oracle::finite_diff_grad(proxy_value, hug::PointConfig(state.proxies));

  return std::max(rel_error(terms.grad_features, fd_features),
                  rel_error(terms.grad_proxies(), fd_proxies));
}

// Euclidean (raw-matrix) variant for the unnormalized loss.
inline double loss_fd_error_raw(const hug::LabeledState& state, const LossFn& loss) {
  const hug::LossTerms terms = loss(state);

  const auto feature_value = [&](const hug::Matrix& m) {
    hug::LabeledState probe = state;
    probe.features = m;
    return loss(probe).value;
  };
  const auto proxy_value = [&](const hug::Matrix& m) {
    hug::LabeledState probe = state;
    probe.proxies = m;
    return loss(probe).value;
  };

  const hug::Matrix fd_features =
      hug::oracle::finite_diff_grad_raw(feature_value, state.features);
  const hug::Matrix fd_proxies =
      hug::oracle::finite_diff_grad_raw(proxy_value, state.proxies);

  return std::max(rel_error(terms.grad_features, fd_features),
                  rel_error(terms.grad_proxies(), fd_proxies));
}

}  // namespace hug_test
