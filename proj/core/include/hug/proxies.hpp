#pragma once

#include <cstdint>

#include "hug/geometry.hpp"
#include "hug/optim.hpp"

namespace hug {

enum class ProxyStrategy {
  Learnable,
  StaticRandom,
  StaticOptimized,
  PartiallyLearnable,
};

/// A set of class proxies together with its update strategy. The effective
/// proxies are `base` (or base * R(rotation_params) for the partially
/// learnable strategy) and always live on the sphere.
struct ProxySet {
  PointConfig base;
  ProxyStrategy strategy = ProxyStrategy::Learnable;
  /// Skew-symmetric parameters of length d(d-1)/2; PartiallyLearnable only.
  Vector rotation_params;
};

/// StaticRandom / Learnable start from a Gaussian sphere sample;
/// StaticOptimized and PartiallyLearnable pre-minimize the s=2 energy with
/// `cfg` (a built-in default when omitted).
ProxySet init_proxies(ProxyStrategy strategy, int num_classes, int d,
                      std::uint64_t seed, const OptimConfig* cfg = nullptr);

/// Cayley map R = (I - A)(I + A)^{-1} with A skew-symmetric from `params`
/// (upper-triangle order, row-major). R is exactly orthogonal with det +1.
/// Throws SingularCayleyError if (I + A) has a pivot below 1e-12.
Matrix cayley_rotation(const Vector& params, Eigen::Index d);

/// base, or base * R for PartiallyLearnable; rows re-normalized to absorb
/// rounding. Rotation preserves the base's pairwise distances.
PointConfig effective_proxies(const ProxySet& ps);

/// Gradient routed to the strategy's trainable parameters.
/// Learnable fills `proxies` (the tangent gradient unchanged); Static
/// strategies are frozen (both members zero / empty); PartiallyLearnable
/// fills `rotation_params` via the Cayley chain rule.
struct RoutedGradient {
  Matrix proxies;
  Vector rotation_params;
};

RoutedGradient route_proxy_gradient(const ProxySet& ps, const Matrix& grad_proxies);

}  // namespace hug
