#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "hug/geometry.hpp"

namespace hug {
namespace oracle {

// Independent ground truth for the optimization and energy paths: canonical
// configurations, closed-form optima, a self-contained brute-force search,
// finite differences, and Monte Carlo continuous energies. Nothing here calls
// back into the optimizer it is used to check.

/// Canonical regular simplex of C unit vectors in R^d (pairwise inner
/// products exactly -1/(C-1)): the centered identity frame orthonormalized
/// and embedded. Throws DimensionTooSmallError unless 2 <= C <= d+1.
PointConfig etf_config(int num_points, int d);

/// Riesz s-energy of the simplex: C (C-1) (2C/(C-1))^{-s/2}.
double etf_energy(int num_points, double s);

/// Energy of C equally spaced points on the circle. For s = 2 this is the
/// exact value C (C^2 - 1) / 12 (the cosecant-sum identity); other exponents
/// fall back to the explicit chord sum.
double circle_energy(int num_points, double s = 2.0);

/// The 2d vertices +-e_k.
PointConfig cross_polytope_config(int d);

/// 2d [ (2d-2) 2^{-s/2} + 4^{-s/2} ].
double cross_polytope_energy(int d, double s);

struct BruteForceResult {
  PointConfig config;
  double energy = 0.0;
};

/// Dense random-restart local search for the minimal Riesz s-energy, written
/// independently of the optim module (own energy loop, own descent).
/// Instances are limited to n*d <= 64.
BruteForceResult brute_force_min_energy(Eigen::Index n, Eigen::Index d, double s,
                                        int budget, std::uint64_t seed);

/// Central finite differences of a scalar function of the raw point matrix,
/// tangent-projected at p for comparison against Riemannian gradients.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const PointConfig& p, double h = 1e-5);

/// Unprojected central differences over a raw matrix (Euclidean gradients,
/// e.g. the unnormalized variant).
Matrix finite_diff_grad_raw(const std::function<double(const Matrix&)>& f,
                            const Matrix& m, double h = 1e-5);

/// Central differences over a parameter vector (e.g. Cayley parameters).
Vector finite_diff_grad_vec(const std::function<double(const Vector&)>& f,
                            const Vector& v, double h = 1e-5);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of the continuous pair energy
/// E[K_s(u, v)] over independent uniform points of S^{d-1}.
/// Throws DivergentError when s >= d-1 (the integral diverges).
McEstimate mc_uniform_pair_energy(int d, double s, int samples, std::uint64_t seed);

}  // namespace oracle
}  // namespace hug
