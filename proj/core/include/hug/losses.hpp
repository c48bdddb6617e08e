#pragma once

#include <cstdint>
#include <optional>

#include "hug/energy.hpp"
#include "hug/geometry.hpp"

namespace hug {

// The hyperspherical-uniformity-gap loss family and the cross-entropy
// baseline, each with value and analytic gradients w.r.t. features and
// proxies.
//
// Sign convention: every loss is returned as a quantity to MINIMIZE.
// Objectives stated as maximizations (MHS, MGD and the proxy-free /
// unnormalized variants) are negated internally.
//
// Gradients are Riemannian (tangent-projected row-wise) except for the
// unnormalized variant, whose gradients are plain Euclidean.

enum class LossVariant {
  MheHug,
  MheHugRelaxed,
  MhsHug,
  MhsHugSurrogate,
  MgdHug,
  PfHugRelaxed,
  PfHugFull,
  CoupledHug,
  UnnormalizedHug,
  Ce,
};

struct LossSpec {
  LossVariant variant = LossVariant::MheHugRelaxed;
  double alpha = 0.15;
  double beta = 0.015;
  /// Intra weight of the relaxed forms; defaults to beta when unset.
  std::optional<double> beta_prime;
  double s_b = 2.0;
  double s_w = -1.0;
  double epsilon = 1.0;  // MGD Gaussian width
  /// MHS smoothing temperature. 0 = exact min/max with active-pair
  /// subgradient; > 0 = log-sum-exp softening.
  double tau = 0.0;
  bool stop_gradient_proxies = false;
  // Unnormalized variant only: soft magnitude constraints toward s_target.
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double s_target = 1.0;

  double beta_prime_or_default() const { return beta_prime.value_or(beta); }
  void validate() const;  // alpha > 0 or beta > 0, field ranges
};

/// The optimizable state of a HUG / CE experiment: features, labels, and one
/// proxy per class. `on_sphere` marks whether rows carry the unit-norm
/// invariant (everything except the unnormalized variant).
struct LabeledState {
  Matrix features;  // n x d
  Labels labels;
  Matrix proxies;  // C x d
  bool on_sphere = true;

  LabeledState(PointConfig features_, Labels labels_, PointConfig proxies_);
  LabeledState(Matrix raw_features, Labels labels_, Matrix raw_proxies);

  PointConfig features_config() const { return PointConfig(features); }
  PointConfig proxies_config() const { return PointConfig(proxies); }
  void validate() const;
};

/// Loss value with its inter-class / intra-class split and gradients.
/// Proxy gradients are kept per term so the stop-gradient variant can drop
/// the intra-class contribution alone. `value` equals inter_term + intra_term
/// except for the unnormalized variant, which adds the magnitude penalties.
struct LossTerms {
  double value = 0.0;
  double inter_term = 0.0;
  double intra_term = 0.0;
  Matrix grad_features;
  Matrix grad_proxies_inter;
  Matrix grad_proxies_intra;

  Matrix grad_proxies() const { return grad_proxies_inter + grad_proxies_intra; }
};

/// Eq-5 style exact form: alpha * E_{s_b}(proxies) - beta * sum_c E_{s_w} of
/// each intra-class set, where the class proxy is a member of its set.
LossTerms mhe_hug(const LabeledState& state, const LossSpec& spec);

/// Relaxed upper bound: alpha * sum_{c != c'} ||w_c - w_c'||^-2
/// + beta' * sum_c sum_{i in A_c} ||x_i - w_c||.
LossTerms mhe_hug_relaxed(const LabeledState& state, const LossSpec& spec);

/// The relaxed value with the intra coefficient matched per class to
/// 2 * beta * |A_c| (the triangle-inequality derivation), which dominates
/// mhe_hug at every state. Used by the bound suites.
double mhe_hug_relaxed_matched(const LabeledState& state, const LossSpec& spec);

/// Negated separation gap: -[alpha * theta(proxies)
/// - beta * sum_c theta^{-1}(intra set with proxy)], where theta is the min
/// pairwise distance and theta^{-1} the max.
LossTerms mhs_hug(const LabeledState& state, const LossSpec& spec);

/// Surrogate with the intra max taken only over feature-to-proxy distances.
LossTerms mhs_hug_surrogate(const LabeledState& state, const LossSpec& spec);

/// -alpha * log det G(proxies) + beta' * sum_c sum_i ||x_i - w_c||.
LossTerms mgd_hug(const LabeledState& state, const LossSpec& spec);

enum class PfMode { Relaxed, Full };

/// Proxy-free HUG. Relaxed mode draws one seed-deterministic representative
/// per class for the inter term; Full uses all cross-class pairs. The intra
/// term is the full ordered intra-class distance sum. Proxies are unused.
LossTerms pf_hug(const LabeledState& state, const LossSpec& spec, PfMode mode,
                 std::uint64_t seed);

/// alpha * sum_i sum_{c != y_i} ||x_i - w_c||^-2
/// + beta' * sum_c sum_{i != j in A_c} ||x_i - x_j||.
LossTerms coupled_hug(const LabeledState& state, const LossSpec& spec);

/// MHE-HUG on raw (unnormalized) vectors plus soft magnitude constraints
/// lambda1 * sum_c (||w_c|| - s_target)^2 + lambda2 * sum_i (||x_i|| - s_target)^2.
/// Gradients are Euclidean; no tangent projection.
LossTerms unnormalized_hug(const LabeledState& state, const LossSpec& spec);

/// Cross-entropy sum_i log(1 + sum_{j != y_i} exp(<w_j, x_i> - <w_{y_i}, x_i>))
/// on hypersphere-normalized features and proxies, no bias.
LossTerms ce_loss(const LabeledState& state, const LossSpec& spec);

struct CeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// lower = sum_i sum_{j != y_i} <w_j, x_i> - (C-1) sum_i <w_{y_i}, x_i>;
/// upper = log(1 + sum_i sum_{j != y_i} e^{<w_j, x_i>}
///               + (C-1) sum_i e^{-<w_{y_i}, x_i>}).
CeBounds ce_bounds(const LabeledState& state);

/// Evaluates Q1(w*) + Q2(w*) of the convex-split CE decomposition at the
/// given lambda, with softmax confidences l_ic taken from the state's current
/// proxies. Returned as a diagnostic: the bound can sit above the CE value
/// when lambda is outside the convexity regime, and that is reported by the
/// caller, not treated as an error.
double ce_boudiaf_lower(const LabeledState& state, double lambda);

/// When spec.stop_gradient_proxies is set, zeroes the intra-class proxy
/// gradient; the inter-class proxy gradient is preserved. No-op otherwise.
LossTerms apply_stop_gradient(LossTerms terms, const LossSpec& spec);

/// Dispatch on spec.variant. `pf_seed` feeds the proxy-free relaxed
/// representative draw and is ignored by the other variants.
LossTerms evaluate(const LabeledState& state, const LossSpec& spec,
                   std::uint64_t pf_seed = 0);

}  // namespace hug
