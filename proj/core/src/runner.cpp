#include "hug/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hug/rng.hpp"
#include "hug/serialize.hpp"
#include "hug/version.hpp"

namespace hug {

using nlohmann::json;

namespace {

// Sub-stream indices for the experiment seed.
constexpr std::uint64_t kFeatureStream = 1;
constexpr std::uint64_t kProxyStream = 2;

std::vector<int> class_counts(const ExperimentConfig& cfg) {
  std::vector<int> counts(static_cast<std::size_t>(cfg.C));
  for (int c = 0; c < cfg.C; ++c) {
    double count = static_cast<double>(cfg.samples_per_class);
    if (cfg.imbalance_ratio) {
      const double exponent =
          static_cast<double>(c) / static_cast<double>(cfg.C - 1);
      count = std::ceil(static_cast<double>(cfg.samples_per_class) *
                        std::pow(*cfg.imbalance_ratio, exponent));
    }
    if (count < 1.0) throw EmptyClassError(c);
    counts[static_cast<std::size_t>(c)] = static_cast<int>(count);
  }
  return counts;
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out.good()) throw Error("writing '" + path + "' failed");
}

json parse_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(std::string(what) + ": cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError(std::string(what) + ": malformed JSON in '" + path + "'");
  }
  return j;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_parse(const json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + ": expected an object");
  if (!j.contains("n") || !j.contains("d") || !j.contains("points")) {
    throw ParseError(std::string(what) + ": missing n/d/points");
  }
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  const Eigen::Index d = j["d"].get<Eigen::Index>();
  const json& rows = j["points"];
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
    throw ParseError(std::string(what) + ": row count does not match n");
  }
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ParseError(std::string(what) + ": row " + std::to_string(i) +
                       " does not match d");
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) {
        throw ParseError(std::string(what) + ": non-numeric entry in row " +
                         std::to_string(i));
      }
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (C < 2) throw Error("ExperimentConfig requires C >= 2");
  if (d < 2) throw Error("ExperimentConfig requires d >= 2");
  if (samples_per_class < 1) throw Error("samples_per_class must be >= 1");
  if (imbalance_ratio && (*imbalance_ratio <= 0.0 || *imbalance_ratio > 1.0)) {
    throw Error("imbalance_ratio must lie in (0, 1]");
  }
  if (gnc_every < 0) throw Error("gnc_every must be nonnegative");
  loss.validate();
  optim.validate();
}

LabeledState generate_state(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::vector<int> counts = class_counts(cfg);
  int total = 0;
  std::vector<int> y;
  for (int c = 0; c < cfg.C; ++c) {
    total += counts[static_cast<std::size_t>(c)];
    y.insert(y.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]), c);
  }
  Labels labels(std::move(y), cfg.C);

  PointConfig features =
      sample_gaussian_sphere(total, cfg.d, Rng::derive(seed, kFeatureStream));
  ProxySet proxies = init_proxies(cfg.proxy_strategy, cfg.C, cfg.d,
                                  Rng::derive(seed, kProxyStream), &cfg.optim);

  LabeledState state(features, std::move(labels), effective_proxies(proxies));
  state.on_sphere = cfg.loss.variant != LossVariant::UnnormalizedHug;
  return state;
}

namespace {

struct StrategyRun {
  LabeledState final_state;
  Trajectory trajectory;
};

// The optimization loop with proxy-gradient routing per strategy. Matches
// optim::run record-for-record in the learnable case.
StrategyRun run_with_strategy(LabeledState state, ProxySet& proxies,
                              const ExperimentConfig& cfg) {
  const LossSpec& spec = cfg.loss;
  const OptimConfig& optim = cfg.optim;
  Matrix vel_features = Matrix::Zero(state.features.rows(), state.features.cols());
  Matrix vel_proxies = Matrix::Zero(state.proxies.rows(), state.proxies.cols());
  Vector vel_rotation = Vector::Zero(proxies.rotation_params.size());

  Trajectory trajectory;
  for (int t = 0; t < optim.max_iters; ++t) {
    LossTerms terms = apply_stop_gradient(evaluate(state, spec, optim.seed), spec);
    const RoutedGradient routed = route_proxy_gradient(proxies, terms.grad_proxies());

    double grad_sq = terms.grad_features.squaredNorm();
    if (routed.proxies.size() > 0) grad_sq += routed.proxies.squaredNorm();
    if (routed.rotation_params.size() > 0) grad_sq += routed.rotation_params.squaredNorm();
    const double grad_norm = std::sqrt(grad_sq);

    if (t % optim.record_every == 0) {
      TrajectoryPoint point{t, terms.value, terms.inter_term, terms.intra_term,
                            grad_norm, std::nullopt};
      if (cfg.gnc_every > 0 && t % cfg.gnc_every == 0) {
        point.gnc = gnc_report(state.features_config(), state.labels,
                               state.proxies_config());
      }
      trajectory.points.push_back(std::move(point));
    }
    if (grad_norm < optim.grad_tol) break;

    const double step = optim.step_at(t);
    vel_features = optim.momentum * vel_features + terms.grad_features;
    Matrix features = state.features - step * vel_features;
    if (state.on_sphere) {
      if (!features.allFinite()) throw NonFiniteError(t);
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const double norm = features.row(i).norm();
        if (!(norm > 1e-12)) throw NonFiniteError(t);
        features.row(i) /= norm;
      }
    } else if (!features.allFinite()) {
      throw NonFiniteError(t);
    }

    Matrix new_proxies = state.proxies;
    switch (proxies.strategy) {
      case ProxyStrategy::Learnable: {
        vel_proxies = optim.momentum * vel_proxies + routed.proxies;
        new_proxies -= step * vel_proxies;
        if (!new_proxies.allFinite()) throw NonFiniteError(t);
        if (state.on_sphere) {
          for (Eigen::Index c = 0; c < new_proxies.rows(); ++c) {
            const double norm = new_proxies.row(c).norm();
            if (!(norm > 1e-12)) throw NonFiniteError(t);
            new_proxies.row(c) /= norm;
          }
          proxies.base = PointConfig(new_proxies);
        }
        break;
      }
      case ProxyStrategy::StaticRandom:
      case ProxyStrategy::StaticOptimized:
        break;
      case ProxyStrategy::PartiallyLearnable: {
        vel_rotation = optim.momentum * vel_rotation + routed.rotation_params;
        proxies.rotation_params -= step * vel_rotation;
        if (!proxies.rotation_params.allFinite()) throw NonFiniteError(t);
        new_proxies = effective_proxies(proxies).points();
        break;
      }
    }

    state.features = std::move(features);
    state.proxies = std::move(new_proxies);
    state.validate();
  }
  return StrategyRun{std::move(state), std::move(trajectory)};
}

}  // namespace

ExperimentResult experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::system_clock::now();
  const std::uint64_t seed = cfg.optim.seed;

  const std::vector<int> counts = class_counts(cfg);
  int total = 0;
  std::vector<int> y;
  for (int c = 0; c < cfg.C; ++c) {
    total += counts[static_cast<std::size_t>(c)];
    y.insert(y.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]), c);
  }
  Labels labels(std::move(y), cfg.C);
  PointConfig features =
      sample_gaussian_sphere(total, cfg.d, Rng::derive(seed, kFeatureStream));
  ProxySet proxies = init_proxies(cfg.proxy_strategy, cfg.C, cfg.d,
                                  Rng::derive(seed, kProxyStream), &cfg.optim);

  LabeledState state(features, std::move(labels), effective_proxies(proxies));
  state.on_sphere = cfg.loss.variant != LossVariant::UnnormalizedHug;

  StrategyRun outcome = run_with_strategy(std::move(state), proxies, cfg);

  ExperimentResult result{std::move(outcome.final_state),
                          std::move(outcome.trajectory), GncReport{}, RunManifest{}};
  result.report = gnc_report(result.final_state.features_config(),
                             result.final_state.labels,
                             result.final_state.proxies_config());

  result.manifest.config_json = to_json(cfg);
  result.manifest.seed = seed;
  result.manifest.library_version = kLibraryVersion;
  result.manifest.started_at = iso_utc(started);
  result.manifest.final_report = result.report;

  std::vector<std::string> written;
  try {
    if (!cfg.outputs.trajectory_csv.empty()) {
      const std::string csv = trajectory_csv(result.trajectory);
      write_file(cfg.outputs.trajectory_csv, csv);
      written.push_back(cfg.outputs.trajectory_csv);
      result.manifest.file_digests.emplace_back("trajectory_csv", fnv1a_digest(csv));
    }
    if (!cfg.outputs.state_json.empty()) {
      save_state(result.final_state, cfg.outputs.state_json);
      written.push_back(cfg.outputs.state_json);
      std::ifstream in(cfg.outputs.state_json, std::ios::binary);
      std::string bytes((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
      result.manifest.file_digests.emplace_back("state_json", fnv1a_digest(bytes));
    }
    if (!cfg.outputs.report_json.empty()) {
      const std::string text = to_json(result.report, 2) + "\n";
      write_file(cfg.outputs.report_json, text);
      written.push_back(cfg.outputs.report_json);
      result.manifest.file_digests.emplace_back("report_json", fnv1a_digest(text));
    }
    result.manifest.finished_at = iso_utc(std::chrono::system_clock::now());
    if (!cfg.outputs.manifest_json.empty()) {
      write_file(cfg.outputs.manifest_json, to_json(result.manifest, 2) + "\n");
      written.push_back(cfg.outputs.manifest_json);
    }
  } catch (...) {
    for (const std::string& path : written) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
    throw;
  }
  return result;
}

void save_state(const LabeledState& state, const std::string& path) {
  json j{{"schema_version", kStateSchemaVersion},
         {"on_sphere", state.on_sphere},
         {"features",
          json{{"n", state.features.rows()},
               {"d", state.features.cols()},
               {"points", matrix_json(state.features)}}},
         {"labels",
          json{{"num_classes", state.labels.num_classes()}, {"y", state.labels.y()}}},
         {"proxies",
          json{{"n", state.proxies.rows()},
               {"d", state.proxies.cols()},
               {"points", matrix_json(state.proxies)}}}};
  write_file(path, j.dump(2) + "\n");
}

LabeledState load_state(const std::string& path) {
  const json j = parse_file(path, "LabeledState");
  if (!j.contains("schema_version")) {
    throw ParseError("LabeledState: missing schema_version in '" + path + "'");
  }
  const auto version = j["schema_version"].get<std::int64_t>();
  if (version != kStateSchemaVersion) {
    throw SchemaVersionError(version, kStateSchemaVersion);
  }
  for (const char* key : {"features", "labels", "proxies", "on_sphere"}) {
    if (!j.contains(key)) {
      throw ParseError(std::string("LabeledState: missing field '") + key + "'");
    }
  }
  Matrix features = matrix_parse(j["features"], "LabeledState.features");
  Matrix proxies = matrix_parse(j["proxies"], "LabeledState.proxies");
  const json& jl = j["labels"];
  if (!jl.contains("num_classes") || !jl.contains("y")) {
    throw ParseError("LabeledState.labels: missing num_classes or y");
  }
  Labels labels(jl["y"].get<std::vector<int>>(), jl["num_classes"].get<int>());
  if (j["on_sphere"].get<bool>()) {
    return LabeledState(PointConfig(std::move(features)), std::move(labels),
                        PointConfig(std::move(proxies)));
  }
  return LabeledState(std::move(features), std::move(labels), std::move(proxies));
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
  json optim{{"step_size", cfg.optim.step_size},
             {"momentum", cfg.optim.momentum},
             {"max_iters", cfg.optim.max_iters},
             {"grad_tol", cfg.optim.grad_tol},
             {"schedule", cfg.optim.schedule == StepSchedule::Constant
                              ? "constant"
                              : "step_decay"},
             {"decay_factor", cfg.optim.decay_factor},
             {"decay_every", cfg.optim.decay_every},
             {"seed", cfg.optim.seed},
             {"restarts", cfg.optim.restarts},
             {"record_every", cfg.optim.record_every}};
  json j{{"C", cfg.C},
         {"d", cfg.d},
         {"samples_per_class", cfg.samples_per_class},
         {"loss", json::parse(to_json(cfg.loss))},
         {"proxy_strategy", proxy_strategy_name(cfg.proxy_strategy)},
         {"optim", std::move(optim)},
         {"outputs",
          json{{"trajectory_csv", cfg.outputs.trajectory_csv},
               {"state_json", cfg.outputs.state_json},
               {"report_json", cfg.outputs.report_json},
               {"manifest_json", cfg.outputs.manifest_json}}},
         {"gnc_every", cfg.gnc_every}};
  if (cfg.imbalance_ratio) j["imbalance_ratio"] = *cfg.imbalance_ratio;
  return indent >= 0 ? j.dump(indent) : j.dump();
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError("ExperimentConfig: malformed JSON");
  ExperimentConfig cfg;
  const auto set_int = [&](const char* key, int& slot) {
    if (j.contains(key)) slot = j[key].get<int>();
  };
  set_int("C", cfg.C);
  set_int("d", cfg.d);
  set_int("samples_per_class", cfg.samples_per_class);
  set_int("gnc_every", cfg.gnc_every);
  if (j.contains("imbalance_ratio") && !j["imbalance_ratio"].is_null()) {
    cfg.imbalance_ratio = j["imbalance_ratio"].get<double>();
  }
  if (j.contains("loss")) cfg.loss = loss_spec_from_json(j["loss"].dump());
  if (j.contains("proxy_strategy")) {
    cfg.proxy_strategy = proxy_strategy_from_name(j["proxy_strategy"].get<std::string>());
  }
  if (j.contains("optim")) {
    const json& jo = j["optim"];
    OptimConfig& o = cfg.optim;
    if (jo.contains("step_size")) o.step_size = jo["step_size"].get<double>();
    if (jo.contains("momentum")) o.momentum = jo["momentum"].get<double>();
    if (jo.contains("max_iters")) o.max_iters = jo["max_iters"].get<int>();
    if (jo.contains("grad_tol")) o.grad_tol = jo["grad_tol"].get<double>();
    if (jo.contains("schedule")) {
      const std::string name = jo["schedule"].get<std::string>();
      if (name == "constant") {
        o.schedule = StepSchedule::Constant;
      } else if (name == "step_decay") {
        o.schedule = StepSchedule::StepDecay;
      } else {
        throw ParseError("unknown schedule '" + name + "'");
      }
    }
    if (jo.contains("decay_factor")) o.decay_factor = jo["decay_factor"].get<double>();
    if (jo.contains("decay_every")) o.decay_every = jo["decay_every"].get<int>();
    if (jo.contains("seed")) o.seed = jo["seed"].get<std::uint64_t>();
    if (jo.contains("restarts")) o.restarts = jo["restarts"].get<int>();
    if (jo.contains("record_every")) o.record_every = jo["record_every"].get<int>();
  }
  if (j.contains("outputs")) {
    const json& jo = j["outputs"];
    const auto set_path = [&](const char* key, std::string& slot) {
      if (jo.contains(key)) slot = jo[key].get<std::string>();
    };
    set_path("trajectory_csv", cfg.outputs.trajectory_csv);
    set_path("state_json", cfg.outputs.state_json);
    set_path("report_json", cfg.outputs.report_json);
    set_path("manifest_json", cfg.outputs.manifest_json);
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const RunManifest& manifest, int indent) {
  json digests = json::object();
  for (const auto& [role, digest] : manifest.file_digests) digests[role] = digest;
  json j{{"schema_version", kStateSchemaVersion},
         {"config", json::parse(manifest.config_json)},
         {"seed", manifest.seed},
         {"library_version", manifest.library_version},
         {"started_at", manifest.started_at},
         {"finished_at", manifest.finished_at},
         {"final_report", json::parse(to_json(manifest.final_report))},
         {"file_digests", std::move(digests)}};
  return indent >= 0 ? j.dump(indent) : j.dump();
}

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace hug
