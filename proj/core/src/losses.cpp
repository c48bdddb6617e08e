#include "hug/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hug/rng.hpp"

namespace hug {

namespace {

constexpr double kSqCoincident = 1e-24;
constexpr double kDistCoincident = 1e-12;

double riesz_kernel_sq(double sq_dist, double s) {
  if (s == 2.0) return 1.0 / sq_dist;
  if (s == 1.0) return 1.0 / std::sqrt(sq_dist);
  if (s == -1.0) return -std::sqrt(sq_dist);
  if (s == -2.0) return -sq_dist;
  const double value = std::pow(sq_dist, -0.5 * s);
  return s > 0 ? value : -value;
}

struct PairSum {
  double energy = 0.0;
  Matrix grad;  // Euclidean
};

// Riesz double-sum over an arbitrary row set, with the Euclidean gradient.
// Coincident pairs throw for s > 0 and contribute the zero subgradient for
// s < 0 (their energy term is 0 there as well).
PairSum riesz_set(const Matrix& pts, double s, bool want_grad) {
  const Eigen::Index n = pts.rows();
  PairSum out;
  if (want_grad) out.grad = Matrix::Zero(n, pts.cols());
  const double abs_s = std::abs(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = pts.row(i) - pts.row(j);
      const double sq = diff.squaredNorm();
      if (sq < kSqCoincident) {
        if (s > 0) throw CoincidentPointsError(i, j);
        continue;  // value ~ 0 and kink: zero subgradient
      }
      out.energy += 2.0 * riesz_kernel_sq(sq, s);
      if (want_grad) {
        const double coeff = -2.0 * abs_s * std::pow(sq, -0.5 * s - 1.0);
        out.grad.row(i) += coeff * diff;
        out.grad.row(j) -= coeff * diff;
      }
    }
  }
  return out;
}

// Sum of feature-to-own-proxy distances with gradients accumulated at weight
// `coeff`; the collapsed position is the kink minimum, so it contributes the
// zero subgradient.
double feature_proxy_pull(const LabeledState& state, double coeff,
                          Matrix& grad_features, Matrix& grad_proxies) {
  double total = 0.0;
  for (int c = 0; c < state.labels.num_classes(); ++c) {
    for (int i : state.labels.index_sets()[static_cast<std::size_t>(c)]) {
      const Eigen::RowVectorXd diff = state.features.row(i) - state.proxies.row(c);
      const double dist = diff.norm();
      total += dist;
      if (dist > kDistCoincident) {
        grad_features.row(i) += coeff * diff / dist;
        grad_proxies.row(c) -= coeff * diff / dist;
      }
    }
  }
  return total;
}

// Ordered intra-class pairwise distance sum with gradients at weight `coeff`.
double intra_pair_distances(const LabeledState& state, double coeff,
                            Matrix& grad_features) {
  double total = 0.0;
  const Matrix& x = state.features;
  for (const auto& idx : state.labels.index_sets()) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const Eigen::RowVectorXd diff = x.row(idx[a]) - x.row(idx[b]);
        const double dist = diff.norm();
        total += 2.0 * dist;
        if (dist > kDistCoincident) {
          grad_features.row(idx[a]) += 2.0 * coeff * diff / dist;
          grad_features.row(idx[b]) -= 2.0 * coeff * diff / dist;
        }
      }
    }
  }
  return total;
}

struct DistPair {
  double dist = 0.0;
  // Row indices into features (>= 0) or proxies (encoded as -1 - c).
  int a = 0, b = 0;
};

int encode_proxy(int c) { return -1 - c; }

// min / max over a pair list with log-sum-exp smoothing at temperature tau.
// tau = 0 returns the exact extremum with all weight on the first achiever
// (pairs are enumerated in ascending index order, so ties break to the
// smallest lexicographic pair).
struct SoftExtremum {
  double value = 0.0;
  std::vector<double> weights;
};

SoftExtremum soft_extremum(const std::vector<DistPair>& pairs, double tau,
                           bool want_min) {
  SoftExtremum out;
  out.weights.assign(pairs.size(), 0.0);
  if (pairs.empty()) return out;
  const double sign = want_min ? -1.0 : 1.0;
  std::size_t arg = 0;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    if (sign * pairs[k].dist > sign * pairs[arg].dist) arg = k;
  }
  if (tau <= 0.0) {
    out.value = pairs[arg].dist;
    out.weights[arg] = 1.0;
    return out;
  }
  const double pivot = pairs[arg].dist;
  double denom = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.weights[k] = std::exp(sign * (pairs[k].dist - pivot) / tau);
    denom += out.weights[k];
  }
  for (auto& w : out.weights) w /= denom;
  out.value = pivot + sign * tau * std::log(denom);
  return out;
}

// Adds weight * d(dist)/d(endpoints) for one pair into the split gradients.
void add_pair_gradient(const LabeledState& state, const DistPair& pair,
                       double weight, Matrix& grad_features,
                       Matrix& grad_proxies) {
  if (pair.dist <= kDistCoincident || weight == 0.0) return;
  const auto point = [&](int code) -> Eigen::RowVectorXd {
    return code >= 0 ? state.features.row(code) : state.proxies.row(-1 - code);
  };
  const Eigen::RowVectorXd dir = (point(pair.a) - point(pair.b)) / pair.dist;
  const auto add = [&](int code, const Eigen::RowVectorXd& g) {
    if (code >= 0) {
      grad_features.row(code) += g;
    } else {
      grad_proxies.row(-1 - code) += g;
    }
  };
  add(pair.a, weight * dir);
  add(pair.b, -weight * dir);
}

LossTerms make_terms(const LabeledState& state) {
  LossTerms t;
  t.grad_features = Matrix::Zero(state.features.rows(), state.features.cols());
  t.grad_proxies_inter = Matrix::Zero(state.proxies.rows(), state.proxies.cols());
  t.grad_proxies_intra = Matrix::Zero(state.proxies.rows(), state.proxies.cols());
  return t;
}

void project_all(const LabeledState& state, LossTerms& t) {
  t.grad_features = tangent_project_rows(state.features, t.grad_features);
  t.grad_proxies_inter = tangent_project_rows(state.proxies, t.grad_proxies_inter);
  t.grad_proxies_intra = tangent_project_rows(state.proxies, t.grad_proxies_intra);
}

void require_sphere(const LabeledState& state, const char* who) {
  if (!state.on_sphere) {
    throw Error(std::string(who) + " requires a hypersphere-normalized state");
  }
}

std::vector<DistPair> proxy_pairs(const LabeledState& state) {
  std::vector<DistPair> pairs;
  const int C = state.labels.num_classes();
  pairs.reserve(static_cast<std::size_t>(C) * (C - 1) / 2);
  for (int c = 0; c < C; ++c) {
    for (int e = c + 1; e < C; ++e) {
      pairs.push_back(DistPair{(state.proxies.row(c) - state.proxies.row(e)).norm(),
                               encode_proxy(c), encode_proxy(e)});
    }
  }
  return pairs;
}

}  // namespace

void LossSpec::validate() const {
  if (!(alpha > 0.0) && !(beta > 0.0)) {
    throw Error("LossSpec requires alpha > 0 or beta > 0");
  }
  if (alpha < 0.0 || beta < 0.0) throw Error("LossSpec weights must be nonnegative");
  if (beta_prime && *beta_prime < 0.0) throw Error("beta_prime must be nonnegative");
  if (s_b == 0.0 || s_w == 0.0) throw Error("Riesz exponents must be nonzero");
  if (variant == LossVariant::MgdHug && !(epsilon > 0.0)) {
    throw Error("MGD requires epsilon > 0");
  }
  if (tau < 0.0) throw Error("tau must be nonnegative");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw Error("lambdas must be nonnegative");
}

LabeledState::LabeledState(PointConfig features_, Labels labels_, PointConfig proxies_)
    : features(features_.points()),
      labels(std::move(labels_)),
      proxies(proxies_.points()),
      on_sphere(true) {
  validate();
}

LabeledState::LabeledState(Matrix raw_features, Labels labels_, Matrix raw_proxies)
    : features(std::move(raw_features)),
      labels(std::move(labels_)),
      proxies(std::move(raw_proxies)),
      on_sphere(false) {
  validate();
}

void LabeledState::validate() const {
  if (!features.allFinite() || !proxies.allFinite()) {
    throw Error("LabeledState contains non-finite entries");
  }
  if (features.cols() != proxies.cols()) {
    throw Error("feature and proxy dimensions differ");
  }
  if (features.rows() != labels.n()) {
    throw Error("feature count does not match labels");
  }
  if (proxies.rows() != labels.num_classes()) {
    throw Error("proxy count does not match the class count");
  }
  if (on_sphere) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      if (std::abs(features.row(i).norm() - 1.0) > PointConfig::kNormTol) {
        throw Error("feature row " + std::to_string(i) + " off the sphere");
      }
    }
    for (Eigen::Index c = 0; c < proxies.rows(); ++c) {
      if (std::abs(proxies.row(c).norm() - 1.0) > PointConfig::kNormTol) {
        throw Error("proxy row " + std::to_string(c) + " off the sphere");
      }
    }
  }
}

LossTerms mhe_hug(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mhe_hug");
  LossTerms t = make_terms(state);

  const PairSum inter = riesz_set(state.proxies, spec.s_b, true);
  t.inter_term = spec.alpha * inter.energy;
  t.grad_proxies_inter = spec.alpha * inter.grad;

  double intra_energy = 0.0;
  const Eigen::Index d = state.features.cols();
  for (int c = 0; c < state.labels.num_classes(); ++c) {
    const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
    Matrix set(static_cast<Eigen::Index>(idx.size()) + 1, d);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      set.row(static_cast<Eigen::Index>(a)) = state.features.row(idx[a]);
    }
    set.row(set.rows() - 1) = state.proxies.row(c);
    const PairSum part = riesz_set(set, spec.s_w, true);
    intra_energy += part.energy;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      t.grad_features.row(idx[a]) -=
          spec.beta * part.grad.row(static_cast<Eigen::Index>(a));
    }
    t.grad_proxies_intra.row(c) -= spec.beta * part.grad.row(set.rows() - 1);
  }
  t.intra_term = -spec.beta * intra_energy;
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms mhe_hug_relaxed(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mhe_hug_relaxed");
  LossTerms t = make_terms(state);

  const PairSum inter = riesz_set(state.proxies, 2.0, true);
  t.inter_term = spec.alpha * inter.energy;
  t.grad_proxies_inter = spec.alpha * inter.grad;

  const double beta_prime = spec.beta_prime_or_default();
  t.intra_term = beta_prime * feature_proxy_pull(state, beta_prime,
                                                 t.grad_features,
                                                 t.grad_proxies_intra);
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

double mhe_hug_relaxed_matched(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mhe_hug_relaxed_matched");
  const PairSum inter = riesz_set(state.proxies, 2.0, false);
  // Triangle-inequality matching: the intra coefficient per class is
  // 2 * beta * |A_c| (pair expansion plus the doubled proxy terms).
  double intra = 0.0;
  for (int c = 0; c < state.labels.num_classes(); ++c) {
    const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
    double pull = 0.0;
    for (int i : idx) {
      pull += (state.features.row(i) - state.proxies.row(c)).norm();
    }
    intra += 2.0 * spec.beta * static_cast<double>(idx.size()) * pull;
  }
  return spec.alpha * inter.energy + intra;
}

LossTerms mhs_hug(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mhs_hug");
  LossTerms t = make_terms(state);

  const std::vector<DistPair> inter_pairs = proxy_pairs(state);
  const SoftExtremum sep = soft_extremum(inter_pairs, spec.tau, /*want_min=*/true);
  t.inter_term = -spec.alpha * sep.value;
  for (std::size_t k = 0; k < inter_pairs.size(); ++k) {
    add_pair_gradient(state, inter_pairs[k], -spec.alpha * sep.weights[k],
                      t.grad_features, t.grad_proxies_inter);
  }

  for (int c = 0; c < state.labels.num_classes(); ++c) {
    const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
    std::vector<int> members(idx.begin(), idx.end());
    members.push_back(encode_proxy(c));
    std::vector<DistPair> pairs;
    const auto point = [&](int code) -> Eigen::RowVectorXd {
      return code >= 0 ? state.features.row(code) : state.proxies.row(-1 - code);
    };
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        pairs.push_back(DistPair{(point(members[a]) - point(members[b])).norm(),
                                 members[a], members[b]});
      }
    }
    const SoftExtremum spread = soft_extremum(pairs, spec.tau, /*want_min=*/false);
    t.intra_term += spec.beta * spread.value;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      add_pair_gradient(state, pairs[k], spec.beta * spread.weights[k],
                        t.grad_features, t.grad_proxies_intra);
    }
  }
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms mhs_hug_surrogate(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mhs_hug_surrogate");
  LossTerms t = make_terms(state);

  const std::vector<DistPair> inter_pairs = proxy_pairs(state);
  const SoftExtremum sep = soft_extremum(inter_pairs, spec.tau, /*want_min=*/true);
  t.inter_term = -spec.alpha * sep.value;
  for (std::size_t k = 0; k < inter_pairs.size(); ++k) {
    add_pair_gradient(state, inter_pairs[k], -spec.alpha * sep.weights[k],
                      t.grad_features, t.grad_proxies_inter);
  }

  for (int c = 0; c < state.labels.num_classes(); ++c) {
    const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
    std::vector<DistPair> pairs;
    pairs.reserve(idx.size());
    for (int i : idx) {
      pairs.push_back(
          DistPair{(state.features.row(i) - state.proxies.row(c)).norm(), i,
                   encode_proxy(c)});
    }
    const SoftExtremum spread = soft_extremum(pairs, spec.tau, /*want_min=*/false);
    t.intra_term += spec.beta * spread.value;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      add_pair_gradient(state, pairs[k], spec.beta * spread.weights[k],
                        t.grad_features, t.grad_proxies_intra);
    }
  }
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms mgd_hug(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "mgd_hug");
  LossTerms t = make_terms(state);

  const PointConfig proxies = state.proxies_config();
  t.inter_term = -spec.alpha * log_det_gram(proxies, spec.epsilon);
  t.grad_proxies_inter = -spec.alpha * log_det_gram_grad(proxies, spec.epsilon);

  const double beta_prime = spec.beta_prime_or_default();
  t.intra_term = beta_prime * feature_proxy_pull(state, beta_prime,
                                                 t.grad_features,
                                                 t.grad_proxies_intra);
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms pf_hug(const LabeledState& state, const LossSpec& spec, PfMode mode,
                 std::uint64_t seed) {
  require_sphere(state, "pf_hug");
  LossTerms t = make_terms(state);
  const int C = state.labels.num_classes();
  const Matrix& x = state.features;

  double inter_energy = 0.0;
  if (mode == PfMode::Full) {
    for (int c = 0; c < C; ++c) {
      for (int e = c + 1; e < C; ++e) {
        for (int i : state.labels.index_sets()[static_cast<std::size_t>(c)]) {
          for (int j : state.labels.index_sets()[static_cast<std::size_t>(e)]) {
            const Eigen::RowVectorXd diff = x.row(i) - x.row(j);
            const double sq = diff.squaredNorm();
            if (sq < kSqCoincident) throw CoincidentPointsError(i, j);
            inter_energy += 2.0 / sq;
            const double coeff = -4.0 * spec.alpha / (sq * sq);
            t.grad_features.row(i) += coeff * diff;
            t.grad_features.row(j) -= coeff * diff;
          }
        }
      }
    }
  } else {
    // One seed-deterministic representative per class.
    Rng rng(seed);
    std::vector<int> reps(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
      const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
      reps[static_cast<std::size_t>(c)] =
          idx[static_cast<std::size_t>(rng.next_u64() % idx.size())];
    }
    for (int c = 0; c < C; ++c) {
      for (int e = c + 1; e < C; ++e) {
        const int i = reps[static_cast<std::size_t>(c)];
        const int j = reps[static_cast<std::size_t>(e)];
        const Eigen::RowVectorXd diff = x.row(i) - x.row(j);
        const double sq = diff.squaredNorm();
        if (sq < kSqCoincident) throw CoincidentPointsError(i, j);
        inter_energy += 2.0 / sq;
        const double coeff = -4.0 * spec.alpha / (sq * sq);
        t.grad_features.row(i) += coeff * diff;
        t.grad_features.row(j) -= coeff * diff;
      }
    }
  }
  t.inter_term = spec.alpha * inter_energy;

  const double beta_prime = spec.beta_prime_or_default();
  t.intra_term = beta_prime * intra_pair_distances(state, beta_prime, t.grad_features);
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms coupled_hug(const LabeledState& state, const LossSpec& spec) {
  require_sphere(state, "coupled_hug");
  LossTerms t = make_terms(state);
  const Matrix& x = state.features;

  double inter = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int c = 0; c < state.labels.num_classes(); ++c) {
      if (c == state.labels[i]) continue;
      const Eigen::RowVectorXd diff = x.row(i) - state.proxies.row(c);
      const double sq = diff.squaredNorm();
      if (sq < kSqCoincident) throw CoincidentPointsError(i, c);
      inter += 1.0 / sq;
      const double coeff = -2.0 * spec.alpha / (sq * sq);
      t.grad_features.row(i) += coeff * diff;
      t.grad_proxies_inter.row(c) -= coeff * diff;
    }
  }
  t.inter_term = spec.alpha * inter;

  const double beta_prime = spec.beta_prime_or_default();
  t.intra_term = beta_prime * intra_pair_distances(state, beta_prime, t.grad_features);
  t.value = t.inter_term + t.intra_term;
  project_all(state, t);
  return t;
}

LossTerms unnormalized_hug(const LabeledState& state, const LossSpec& spec) {
  LossTerms t = make_terms(state);

  const PairSum inter = riesz_set(state.proxies, spec.s_b, true);
  t.inter_term = spec.alpha * inter.energy;
  t.grad_proxies_inter = spec.alpha * inter.grad;

  double intra_energy = 0.0;
  const Eigen::Index d = state.features.cols();
  for (int c = 0; c < state.labels.num_classes(); ++c) {
    const auto& idx = state.labels.index_sets()[static_cast<std::size_t>(c)];
    Matrix set(static_cast<Eigen::Index>(idx.size()) + 1, d);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      set.row(static_cast<Eigen::Index>(a)) = state.features.row(idx[a]);
    }
    set.row(set.rows() - 1) = state.proxies.row(c);
    const PairSum part = riesz_set(set, spec.s_w, true);
    intra_energy += part.energy;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      t.grad_features.row(idx[a]) -=
          spec.beta * part.grad.row(static_cast<Eigen::Index>(a));
    }
    t.grad_proxies_intra.row(c) -= spec.beta * part.grad.row(set.rows() - 1);
  }
  t.intra_term = -spec.beta * intra_energy;

  // Soft magnitude constraints toward s_target; these survive the
  // stop-gradient flag, so they live in the inter bucket.
  double penalty = 0.0;
  for (Eigen::Index c = 0; c < state.proxies.rows(); ++c) {
    const double norm = state.proxies.row(c).norm();
    const double gap = norm - spec.s_target;
    penalty += spec.lambda1 * gap * gap;
    if (norm > kDistCoincident) {
      t.grad_proxies_inter.row(c) +=
          2.0 * spec.lambda1 * gap * state.proxies.row(c) / norm;
    }
  }
  for (Eigen::Index i = 0; i < state.features.rows(); ++i) {
    const double norm = state.features.row(i).norm();
    const double gap = norm - spec.s_target;
    penalty += spec.lambda2 * gap * gap;
    if (norm > kDistCoincident) {
      t.grad_features.row(i) +=
          2.0 * spec.lambda2 * gap * state.features.row(i) / norm;
    }
  }
  t.value = t.inter_term + t.intra_term + penalty;
  // Euclidean gradients: no tangent projection.
  return t;
}

LossTerms ce_loss(const LabeledState& state, const LossSpec& /*spec*/) {
  require_sphere(state, "ce_loss");
  LossTerms t = make_terms(state);
  const Eigen::Index n = state.features.rows();
  const int C = state.labels.num_classes();
  const Matrix logits = state.features * state.proxies.transpose();  // n x C

  double value = 0.0;
  Matrix softmax(n, C);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = logits.row(i).maxCoeff();
    double denom = 0.0;
    for (int c = 0; c < C; ++c) {
      softmax(i, c) = std::exp(logits(i, c) - peak);
      denom += softmax(i, c);
    }
    softmax.row(i) /= denom;
    value += peak + std::log(denom) - logits(i, state.labels[i]);
  }

  Matrix residual = softmax;
  for (Eigen::Index i = 0; i < n; ++i) {
    residual(i, state.labels[i]) -= 1.0;
  }
  t.grad_features = residual * state.proxies;
  t.grad_proxies_inter = residual.transpose() * state.features;

  t.value = value;
  t.inter_term = value;  // CE does not decouple; the whole loss is reported here
  t.intra_term = 0.0;
  project_all(state, t);
  return t;
}

CeBounds ce_bounds(const LabeledState& state) {
  require_sphere(state, "ce_bounds");
  const Eigen::Index n = state.features.rows();
  const int C = state.labels.num_classes();
  const Matrix logits = state.features * state.proxies.transpose();
  const double rho = static_cast<double>(C - 1);

  CeBounds bounds;
  double upper_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = state.labels[i];
    for (int c = 0; c < C; ++c) {
      if (c == y) continue;
      bounds.lower += logits(i, c);
      upper_sum += std::exp(logits(i, c));
    }
    bounds.lower -= rho * logits(i, y);
    upper_sum += rho * std::exp(-logits(i, y));
  }
  bounds.upper = std::log1p(upper_sum);
  return bounds;
}

double ce_boudiaf_lower(const LabeledState& state, double lambda) {
  require_sphere(state, "ce_boudiaf_lower");
  if (!(lambda > 0.0)) throw Error("ce_boudiaf_lower requires lambda > 0");
  const Eigen::Index n = state.features.rows();
  const int C = state.labels.num_classes();
  const double dn = static_cast<double>(n);

  // Softmax confidences from the state's current proxies.
  const Matrix logits = state.features * state.proxies.transpose();
  Matrix conf(n, C);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = logits.row(i).maxCoeff();
    double denom = 0.0;
    for (int c = 0; c < C; ++c) {
      conf(i, c) = std::exp(logits(i, c) - peak);
      denom += conf(i, c);
    }
    conf.row(i) /= denom;
  }

  const Matrix gram = state.features * state.features.transpose();

  // Q1 at its minimizer: -(1/(2 lambda n)) sum_i sum_{j in A_{y_i}} <x_i, x_j>.
  double q1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j : state.labels.index_sets()[static_cast<std::size_t>(state.labels[i])]) {
      q1 += gram(i, j);
    }
  }
  q1 *= -1.0 / (2.0 * lambda * dn);

  // Q2 at its minimizer.
  const Matrix mixed = gram * conf / (lambda * dn);  // n x C
  double q2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = mixed.row(i).maxCoeff();
    double denom = 0.0;
    for (int c = 0; c < C; ++c) denom += std::exp(mixed(i, c) - peak);
    q2 += peak + std::log(denom);
  }
  const Matrix class_pull = conf.transpose() * state.features / dn;  // C x d
  q2 -= dn / (2.0 * lambda) * class_pull.rowwise().squaredNorm().sum();

  return q1 + q2;
}

LossTerms apply_stop_gradient(LossTerms terms, const LossSpec& spec) {
  if (spec.stop_gradient_proxies) {
    terms.grad_proxies_intra.setZero();
  }
  return terms;
}

LossTerms evaluate(const LabeledState& state, const LossSpec& spec,
                   std::uint64_t pf_seed) {
  spec.validate();
  switch (spec.variant) {
    case LossVariant::MheHug:
      return mhe_hug(state, spec);
    case LossVariant::MheHugRelaxed:
      return mhe_hug_relaxed(state, spec);
    case LossVariant::MhsHug:
      return mhs_hug(state, spec);
    case LossVariant::MhsHugSurrogate:
      return mhs_hug_surrogate(state, spec);
    case LossVariant::MgdHug:
      return mgd_hug(state, spec);
    case LossVariant::PfHugRelaxed:
      return pf_hug(state, spec, PfMode::Relaxed, pf_seed);
    case LossVariant::PfHugFull:
      return pf_hug(state, spec, PfMode::Full, pf_seed);
    case LossVariant::CoupledHug:
      return coupled_hug(state, spec);
    case LossVariant::UnnormalizedHug:
      return unnormalized_hug(state, spec);
    case LossVariant::Ce:
      return ce_loss(state, spec);
  }
  throw Error("unknown loss variant");
}

}  // namespace hug
