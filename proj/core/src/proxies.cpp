#include "hug/proxies.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hug/rng.hpp"

namespace hug {

namespace {

OptimConfig default_proxy_optim(std::uint64_t seed) {
  OptimConfig cfg;
  cfg.step_size = 0.1;
  cfg.momentum = 0.9;
  cfg.max_iters = 6000;
  cfg.grad_tol = 1e-11;
  cfg.schedule = StepSchedule::StepDecay;
  cfg.decay_factor = 0.1;
  cfg.decay_every = 0;
  cfg.restarts = 8;
  cfg.seed = seed;
  return cfg;
}

Matrix skew_from_params(const Vector& params, Eigen::Index d) {
  if (params.size() != d * (d - 1) / 2) {
    throw Error("rotation parameter vector has wrong length");
  }
  if (!params.allFinite()) throw Error("rotation parameters must be finite");
  Matrix skew = Matrix::Zero(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j, ++k) {
      skew(i, j) = params(k);
      skew(j, i) = -params(k);
    }
  }
  return skew;
}

}  // namespace

ProxySet init_proxies(ProxyStrategy strategy, int num_classes, int d,
                      std::uint64_t seed, const OptimConfig* cfg) {
  if (num_classes < 2 || d < 2) {
    throw Error("init_proxies requires C >= 2 and d >= 2");
  }
  switch (strategy) {
    case ProxyStrategy::Learnable:
    case ProxyStrategy::StaticRandom:
      return ProxySet{sample_gaussian_sphere(num_classes, d, seed), strategy,
                      Vector()};
    case ProxyStrategy::StaticOptimized: {
      const OptimConfig optim = cfg ? *cfg : default_proxy_optim(seed);
      return ProxySet{minimize_energy(num_classes, d, 2.0, optim).config, strategy,
                      Vector()};
    }
    case ProxyStrategy::PartiallyLearnable: {
      const OptimConfig optim = cfg ? *cfg : default_proxy_optim(seed);
      return ProxySet{minimize_energy(num_classes, d, 2.0, optim).config, strategy,
                      Vector::Zero(static_cast<Eigen::Index>(d) * (d - 1) / 2)};
    }
  }
  throw Error("unknown proxy strategy");
}

Matrix cayley_rotation(const Vector& params, Eigen::Index d) {
  const Matrix skew = skew_from_params(params, d);
  const Matrix minus = Matrix::Identity(d, d) - skew;
  const Matrix plus = Matrix::Identity(d, d) + skew;
  // R = (I - A)(I + A)^{-1} = ((I - A)^{-1} (I + A))^T; (I + A)^T = I - A.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(minus);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::abs(packed(k, k)) < 1e-12) throw SingularCayleyError();
  }
  Matrix rotation = lu.solve(Eigen::MatrixXd(plus)).transpose();
  return rotation;
}

PointConfig effective_proxies(const ProxySet& ps) {
  if (ps.strategy != ProxyStrategy::PartiallyLearnable) {
    return ps.base;
  }
  const Matrix rotation = cayley_rotation(ps.rotation_params, ps.base.d());
  return normalize_rows(ps.base.points() * rotation);
}

RoutedGradient route_proxy_gradient(const ProxySet& ps, const Matrix& grad_proxies) {
  if (grad_proxies.rows() != ps.base.n() || grad_proxies.cols() != ps.base.d()) {
    throw Error("route_proxy_gradient: gradient shape mismatch");
  }
  switch (ps.strategy) {
    case ProxyStrategy::Learnable:
      return RoutedGradient{grad_proxies, Vector()};
    case ProxyStrategy::StaticRandom:
    case ProxyStrategy::StaticOptimized:
      return RoutedGradient{Matrix::Zero(grad_proxies.rows(), grad_proxies.cols()),
                            Vector()};
    case ProxyStrategy::PartiallyLearnable: {
      const Eigen::Index d = ps.base.d();
      const Matrix skew = skew_from_params(ps.rotation_params, d);
      const Matrix rotation = cayley_rotation(ps.rotation_params, d);
      // dL/dtheta_k for P = B R(theta): with M = B^T G and
      // S = (I + A)^{-1} M^T (I + R), the (i, j) parameter gets S_ij - S_ji.
      const Matrix mixed = ps.base.points().transpose() * grad_proxies;  // d x d
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(
          Eigen::MatrixXd(Matrix::Identity(d, d) + skew));
      const Matrix shifted =
          mixed.transpose() * (Matrix::Identity(d, d) + rotation);
      const Matrix sens = lu.solve(Eigen::MatrixXd(shifted));
      Vector grad_params(d * (d - 1) / 2);
      Eigen::Index k = 0;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j, ++k) {
          grad_params(k) = sens(i, j) - sens(j, i);
        }
      }
      return RoutedGradient{Matrix(), std::move(grad_params)};
    }
  }
  throw Error("unknown proxy strategy");
}

}  // namespace hug
