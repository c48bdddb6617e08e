#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hug/gnc.hpp"
#include "hug/losses.hpp"

namespace hug {

// Projected (Riemannian) gradient descent on products of unit hyperspheres.
// The retraction is metric projection (row renormalization), which is exact
// enough at these step sizes; the exponential map buys nothing here.

enum class StepSchedule { Constant, StepDecay };

struct OptimConfig {
  double step_size = 0.1;
  double momentum = 0.0;        // in [0, 1)
  int max_iters = 1000;
  double grad_tol = 1e-8;
  StepSchedule schedule = StepSchedule::StepDecay;
  double decay_factor = 0.1;
  /// Multiply the step by decay_factor every decay_every iterations;
  /// 0 derives the paper-shaped schedule (decays at 30/60/90% of max_iters).
  int decay_every = 0;
  std::uint64_t seed = 0;
  int restarts = 1;
  int record_every = 1;

  void validate() const;
  double step_at(int iteration) const;
};

struct TrajectoryPoint {
  int iteration = 0;
  double loss = 0.0;
  double inter_term = 0.0;
  double intra_term = 0.0;
  double grad_norm = 0.0;
  std::optional<GncReport> gnc;
};

/// Per-iteration records of a run; iterations strictly increasing.
struct Trajectory {
  std::vector<TrajectoryPoint> points;
};

struct Velocity {
  Matrix features;
  Matrix proxies;
};

/// One momentum step: v' = momentum * v + grad; rows move by -step * v' and
/// are renormalized onto the sphere (skipped when the state is off-sphere).
/// Throws NonFiniteError(iteration) on a non-finite update.
LabeledState pgd_step(const LabeledState& state, const Matrix& grad_features,
                      const Matrix& grad_proxies, const OptimConfig& cfg,
                      Velocity& velocity, double step_size, int iteration = 0);

using GncSnapshotFn =
    std::function<std::optional<GncReport>(int iteration, const LabeledState&)>;

struct RunResult {
  LabeledState final_state;
  Trajectory trajectory;
  int iterations = 0;
  bool converged = false;  // grad_tol reached before max_iters
};

/// Full-batch PGD on features and proxies until max_iters or the Riemannian
/// gradient norm falls below grad_tol. Records every record_every iterations;
/// bit-reproducible given (state, spec, cfg). `snapshot` may attach a
/// GncReport to a record.
RunResult run(const LabeledState& state, const LossSpec& spec,
              const OptimConfig& cfg, const GncSnapshotFn& snapshot = nullptr);

struct EnergyMinimum {
  PointConfig config;
  double energy = 0.0;
  int restart_index = 0;
};

/// Best-of-restarts Riesz s-energy minimization of n free points on S^{d-1}.
/// Restart r is seeded with Rng::derive(cfg.seed, r) and runs independently
/// (in parallel); the lowest energy wins, ties to the lowest restart index.
EnergyMinimum minimize_energy(Eigen::Index n, Eigen::Index d, double s,
                              const OptimConfig& cfg);

}  // namespace hug
