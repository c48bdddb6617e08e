#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hug/gnc.hpp"
#include "hug/losses.hpp"
#include "hug/optim.hpp"
#include "hug/proxies.hpp"

namespace hug {

/// One unconstrained-features experiment: synthetic state generation, a full
/// optimization run with periodic GNC snapshots, and persistence of the
/// trajectory, final state, report, and manifest.
struct ExperimentConfig {
  int C = 3;
  int d = 2;
  int samples_per_class = 10;
  /// When set, class c receives ceil(samples_per_class * IR^{c/(C-1)})
  /// samples (geometric long-tail schedule); the head keeps samples_per_class.
  std::optional<double> imbalance_ratio;
  LossSpec loss;
  ProxyStrategy proxy_strategy = ProxyStrategy::Learnable;
  OptimConfig optim;
  struct Outputs {
    std::string trajectory_csv;
    std::string state_json;
    std::string report_json;
    std::string manifest_json;
  } outputs;
  /// GNC snapshot cadence in iterations (0 = none); decoupled from
  /// record_every because the collapse-metric SVD dominates diagnostic cost.
  int gnc_every = 0;

  void validate() const;
};

struct RunManifest {
  std::string config_json;
  std::uint64_t seed = 0;
  std::string library_version;
  std::string started_at;
  std::string finished_at;
  GncReport final_report;
  /// FNV-1a 64-bit digests of the emitted files, keyed by output role.
  std::vector<std::pair<std::string, std::string>> file_digests;
};

struct ExperimentResult {
  LabeledState final_state;
  Trajectory trajectory;
  GncReport report;
  RunManifest manifest;
};

/// Features sampled uniformly on the sphere per the (possibly long-tailed)
/// class counts, labels in class-block order, proxies per the configured
/// strategy. Deterministic given seed. Throws EmptyClassError if a class
/// count rounds to zero.
LabeledState generate_state(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs the experiment seeded by cfg.optim.seed and writes every configured
/// output (paths left empty are skipped). Partial outputs are removed if the
/// run fails.
ExperimentResult experiment(const ExperimentConfig& cfg);

LabeledState load_state(const std::string& path);
void save_state(const LabeledState& state, const std::string& path);

std::string to_json(const ExperimentConfig& cfg, int indent = -1);
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string to_json(const RunManifest& manifest, int indent = -1);

/// FNV-1a 64-bit content digest, hex-encoded (manifest integrity checks).
std::string fnv1a_digest(const std::string& bytes);

}  // namespace hug
