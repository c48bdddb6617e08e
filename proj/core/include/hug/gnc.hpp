#pragma once

#include <optional>
#include <utility>

#include "hug/geometry.hpp"

namespace hug {

/// The full generalized-neural-collapse diagnostic vector for one state.
/// All fields are finite; agreement lies in [0, 1]; cross_polytope_deviation
/// is present only when the class count equals 2d.
struct GncReport {
  double ace = 0.0;   // average proxy energy, Riesz s=2 over ordered pairs
  double acme = 0.0;  // same on centered-normalized class means
  double afre = 0.0;  // per-class average intra distance to peers
  double afmre = 0.0; // per-class average distance to the normalized class mean
  double reverse_energy = 0.0;
  double trace_sb = 0.0;
  double trace_sw = 0.0;
  double collapse_metric = 0.0;  // trace of pinv(Sigma_B) * Sigma_W
  double equinorm_cv = 0.0;      // coefficient of variation of ||mu_c - mu_G||
  double self_duality_gap = 0.0; // max_c ||w_c - mu_hat_c||
  double nearest_mean_agreement = 0.0;
  double etf_deviation = 0.0;
  std::optional<double> cross_polytope_deviation;
  double resultant_norm = 0.0;       // of the centered-normalized class means
  double covariance_deviation = 0.0; // ditto
};

/// Computes every field above in one pass. Errors from degenerate means or
/// coincident proxies propagate.
GncReport gnc_report(const PointConfig& features, const Labels& labels,
                     const PointConfig& proxies);

/// Average Riesz s=2 energy over ordered pairs: E_2 / (n (n-1)).
/// Applied to proxies this is the classifier energy; applied to normalized
/// class means, the class-mean energy.
double average_energy(const PointConfig& points);

/// Average feature reverse-energy: per-class mean ordered-pair distance, then
/// averaged over classes. Singleton classes contribute 0.
double afre(const PointConfig& features, const Labels& labels);

/// Average feature-mean reverse-energy: per-class mean distance to the
/// class mean normalized onto the sphere (mu_c / ||mu_c||). Throws
/// DegenerateMeanError(c) if a class mean sits at the origin.
double afmre(const PointConfig& features, const Labels& labels);

/// trace(pinv(Sigma_B) Sigma_W) with the pseudoinverse computed by SVD,
/// singular values below 1e-10 * sigma_max truncated.
double collapse_metric(const PointConfig& features, const Labels& labels);

/// std / mean of the centered class-mean norms {||mu_c - mu_G||}; zero iff
/// all are equal. Throws DegenerateMeanError if the mean norm is ~0.
double equinorm_cv(const PointConfig& features, const Labels& labels);

/// max over classes of ||w_c - mu_hat_c|| with mu_hat the centered-normalized
/// class mean (0 at self-duality, 2 for an antipodal proxy).
double self_duality_gap(const PointConfig& proxies, const PointConfig& features,
                        const Labels& labels);

/// Fraction of samples where argmax_c <w_c, x> and argmin_c ||x - mu_c||
/// agree; ties break to the lowest class index in both rules.
double nearest_mean_agreement(const PointConfig& proxies,
                              const PointConfig& features, const Labels& labels);

/// (trace S_b, trace S_w): the between / within scatter traces
/// sum_c n_c ||mu_c - mu_bar||^2 and sum_c sum_{j in A_c} ||x_j - mu_c||^2.
std::pair<double, double> fda_traces(const RawMatrix& features, const Labels& labels);

/// max_{i != j} |<p_i, p_j> + 1/(n-1)|: zero exactly on a simplex ETF.
double etf_deviation(const PointConfig& p);

struct CrossPolytopeDeviation {
  double deviation = 0.0;
  /// False when some greedily matched pair is not even negatively correlated;
  /// the greedy antipodal matching is only trustworthy below deviation 0.5.
  bool matched_antipodal = true;
};

/// Greedily pairs each point with its most-negative-inner-product partner
/// (lowest index on ties); deviation is the max of |<matched> + 1| and
/// |<unmatched>|. Throws WrongCountError unless n = 2d.
CrossPolytopeDeviation cross_polytope_deviation(const PointConfig& p);

/// (resultant norm, || (1/n) P^T P - I/d ||_F): both zero for configurations
/// matching the uniform measure's first and second moments.
std::pair<double, double> uniformity_stats(const PointConfig& p);

}  // namespace hug
