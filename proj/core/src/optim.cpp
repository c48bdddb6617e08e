#include "hug/optim.hpp"

#include <cmath>
#include <future>
#include <vector>

#include "hug/energy.hpp"
#include "hug/rng.hpp"

namespace hug {

namespace {

// Renormalizes rows in place; a vanished or non-finite row aborts the run
// with the failing iteration attached.
void retract_rows(Matrix& pts, int iteration) {
  if (!pts.allFinite()) throw NonFiniteError(iteration);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double norm = pts.row(i).norm();
    if (!(norm > 1e-12)) throw NonFiniteError(iteration);
    pts.row(i) /= norm;
  }
}

}  // namespace

void OptimConfig::validate() const {
  if (!(step_size > 0.0)) throw Error("step_size must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error("momentum must lie in [0, 1)");
  if (max_iters < 1) throw Error("max_iters must be at least 1");
  if (!(grad_tol > 0.0)) throw Error("grad_tol must be positive");
  if (!(decay_factor > 0.0) || decay_factor > 1.0) {
    throw Error("decay_factor must lie in (0, 1]");
  }
  if (decay_every < 0) throw Error("decay_every must be nonnegative");
  if (restarts < 1) throw Error("restarts must be at least 1");
  if (record_every < 1) throw Error("record_every must be at least 1");
}

double OptimConfig::step_at(int iteration) const {
  if (schedule == StepSchedule::Constant) return step_size;
  int every = decay_every;
  if (every == 0) {
    // Paper-shaped default: decays at 30 / 60 / 90% of the run.
    every = std::max(1, (3 * max_iters) / 10);
  }
  const int drops = iteration / every;
  return step_size * std::pow(decay_factor, drops);
}

LabeledState pgd_step(const LabeledState& state, const Matrix& grad_features,
                      const Matrix& grad_proxies, const OptimConfig& cfg,
                      Velocity& velocity, double step_size, int iteration) {
  if (velocity.features.size() == 0) {
    velocity.features = Matrix::Zero(state.features.rows(), state.features.cols());
  }
  if (velocity.proxies.size() == 0) {
    velocity.proxies = Matrix::Zero(state.proxies.rows(), state.proxies.cols());
  }
  velocity.features = cfg.momentum * velocity.features + grad_features;
  velocity.proxies = cfg.momentum * velocity.proxies + grad_proxies;

  Matrix features = state.features - step_size * velocity.features;
  Matrix proxies = state.proxies - step_size * velocity.proxies;
  if (state.on_sphere) {
    retract_rows(features, iteration);
    retract_rows(proxies, iteration);
    return LabeledState(PointConfig(std::move(features)), state.labels,
                        PointConfig(std::move(proxies)));
  }
  if (!features.allFinite() || !proxies.allFinite()) {
    throw NonFiniteError(iteration);
  }
  return LabeledState(std::move(features), state.labels, std::move(proxies));
}

RunResult run(const LabeledState& state, const LossSpec& spec,
              const OptimConfig& cfg, const GncSnapshotFn& snapshot) {
  cfg.validate();
  spec.validate();
  LabeledState current = state;
  Velocity velocity;
  Trajectory trajectory;
  bool converged = false;
  int t = 0;
  for (; t < cfg.max_iters; ++t) {
    LossTerms terms = apply_stop_gradient(evaluate(current, spec, cfg.seed), spec);
    const Matrix grad_proxies = terms.grad_proxies();
    const double grad_norm = std::sqrt(terms.grad_features.squaredNorm() +
                                       grad_proxies.squaredNorm());
    if (t % cfg.record_every == 0) {
      TrajectoryPoint point{t, terms.value, terms.inter_term, terms.intra_term,
                            grad_norm, std::nullopt};
      if (snapshot) point.gnc = snapshot(t, current);
      trajectory.points.push_back(std::move(point));
    }
    if (grad_norm < cfg.grad_tol) {
      converged = true;
      break;
    }
    current = pgd_step(current, terms.grad_features, grad_proxies, cfg, velocity,
                       cfg.step_at(t), t);
  }
  return RunResult{std::move(current), std::move(trajectory), t, converged};
}

namespace {

struct SingleMinimization {
  Matrix points;
  double energy = 0.0;
};

SingleMinimization minimize_once(Eigen::Index n, Eigen::Index d, double s,
                                 const OptimConfig& cfg, std::uint64_t seed) {
  Matrix pts = sample_gaussian_sphere(n, d, seed).points();
  Matrix velocity = Matrix::Zero(n, d);
  for (int t = 0; t < cfg.max_iters; ++t) {
    const Matrix grad = riesz_energy_grad(PointConfig(pts), s);
    if (grad.norm() < cfg.grad_tol) break;
    velocity = cfg.momentum * velocity + grad;
    pts -= cfg.step_at(t) * velocity;
    retract_rows(pts, t);
  }
  const double energy = riesz_energy(PointConfig(pts), s);
  return SingleMinimization{std::move(pts), energy};
}

}  // namespace

EnergyMinimum minimize_energy(Eigen::Index n, Eigen::Index d, double s,
                              const OptimConfig& cfg) {
  cfg.validate();
  if (n < 2) throw Error("minimize_energy requires n >= 2");

  std::vector<SingleMinimization> results(static_cast<std::size_t>(cfg.restarts));
  if (cfg.restarts == 1) {
    results[0] = minimize_once(n, d, s, cfg, cfg.seed);
  } else {
    std::vector<std::future<SingleMinimization>> futures;
    futures.reserve(static_cast<std::size_t>(cfg.restarts));
    for (int r = 0; r < cfg.restarts; ++r) {
      futures.push_back(std::async(std::launch::async, [&, r] {
        return minimize_once(n, d, s, cfg,
                             Rng::derive(cfg.seed, static_cast<std::uint64_t>(r)));
      }));
    }
    for (int r = 0; r < cfg.restarts; ++r) {
      results[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r)].get();
    }
  }

  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r) {
    if (results[static_cast<std::size_t>(r)].energy <
        results[static_cast<std::size_t>(best)].energy) {
      best = r;
    }
  }
  auto& winner = results[static_cast<std::size_t>(best)];
  return EnergyMinimum{PointConfig(std::move(winner.points)), winner.energy, best};
}

}  // namespace hug
