#pragma once

#include "hug/geometry.hpp"

namespace hug {

/// Pairwise interaction kernel on the sphere (chordal distance throughout).
struct KernelSpec {
  enum class Kind { Riesz, Logarithmic, Gaussian };

  Kind kind = Kind::Riesz;
  double s = 2.0;        // Riesz exponent, s != 0
  double epsilon = 1.0;  // Gaussian width, > 0

  static KernelSpec riesz(double s);
  static KernelSpec logarithmic();
  static KernelSpec gaussian(double epsilon);

  /// Kernel value for a pair at squared distance sq_dist.
  /// Riesz: sign(s) * dist^{-s}; log: log(1/dist); Gaussian: exp(-eps^2 dist^2).
  double pair_value(double sq_dist) const;
};

enum class Reduce {
  Ordered,   // fixed row-major accumulation over ordered pairs; bit-reproducible
  Parallel,  // block-parallel; no bit-determinism guarantee
};

/// Riesz s-energy: sum over ordered pairs (i, j), i != j, of
/// sign(s) * ||p_i - p_j||^{-s}. Both orders of each pair are counted, so
/// the average energy is E / (n (n-1)).
/// Throws CoincidentPointsError for s > 0 when two points are closer than
/// 1e-12. Returns 0 for n < 2.
double riesz_energy(const PointConfig& p, double s, Reduce mode = Reduce::Ordered);

/// Riemannian gradient of riesz_energy: tangent-projected per row. Matches
/// central finite differences to relative 1e-5 away from coincidences.
/// For s < 0 a coincident pair is a kink of the energy; its contribution is
/// the zero subgradient.
Matrix riesz_energy_grad(const PointConfig& p, double s);

/// Logarithmic energy: sum over ordered pairs of -log ||p_i - p_j||.
double log_energy(const PointConfig& p);

/// A pairwise extremum together with the achieving pair (smallest (i, j) in
/// lexicographic order on ties).
struct PairExtremum {
  double value = 0.0;
  Eigen::Index i = 0, j = 0;
};

/// Separation distance: the minimum pairwise distance.
PairExtremum separation(const PointConfig& p);

/// Maximum pairwise distance (0 when all points coincide).
PairExtremum max_pair_distance(const PointConfig& p);

/// log det of the Gaussian-kernel gram matrix G_ij = exp(-eps^2 ||p_i-p_j||^2),
/// via an unpivoted Cholesky factorization. Throws SingularGramError if any
/// pivot falls below 1e-12 (e.g. duplicated points).
double log_det_gram(const PointConfig& p, double epsilon);

/// Tangent-projected gradient of log_det_gram.
Matrix log_det_gram_grad(const PointConfig& p, double epsilon);

/// Hyperspherical reverse-energy: sum over classes of the ordered intra-class
/// pairwise distances. Zero iff every class has collapsed to a point.
double reverse_energy(const PointConfig& features, const Labels& labels);

}  // namespace hug
