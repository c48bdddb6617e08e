#include "hug/serialize.hpp"

#include <cinttypes>
#include <cstdio>

#include <json.hpp>

namespace hug {

using nlohmann::json;

namespace {

std::string dump(const json& j, int indent) {
  return indent >= 0 ? j.dump(indent) : j.dump();
}

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError(std::string(what) + ": malformed JSON");
  }
  return j;
}

const json& field(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string(what) + ": missing field '" + key + "'");
  }
  return *it;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, Eigen::Index n, Eigen::Index d,
                        const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
    throw ParseError(std::string(what) + ": point rows do not match n");
  }
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ParseError(std::string(what) + ": row " + std::to_string(i) +
                       " does not match d");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      const json& cell = row[static_cast<std::size_t>(j)];
      if (!cell.is_number()) {
        throw ParseError(std::string(what) + ": non-numeric entry at (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      m(i, j) = cell.get<double>();
    }
  }
  return m;
}

json point_config_json(const PointConfig& p) {
  return json{{"d", p.d()}, {"n", p.n()}, {"points", matrix_to_json(p.points())}};
}

PointConfig point_config_parse(const json& j, const char* what) {
  const Eigen::Index n = field(j, "n", what).get<Eigen::Index>();
  const Eigen::Index d = field(j, "d", what).get<Eigen::Index>();
  return PointConfig(matrix_from_json(field(j, "points", what), n, d, what));
}

}  // namespace

std::string to_json(const PointConfig& p, int indent) {
  return dump(point_config_json(p), indent);
}

PointConfig point_config_from_json(const std::string& text) {
  return point_config_parse(parse_or_throw(text, "PointConfig"), "PointConfig");
}

std::string loss_variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::MheHug: return "mhe_hug";
    case LossVariant::MheHugRelaxed: return "mhe_hug_relaxed";
    case LossVariant::MhsHug: return "mhs_hug";
    case LossVariant::MhsHugSurrogate: return "mhs_hug_surrogate";
    case LossVariant::MgdHug: return "mgd_hug";
    case LossVariant::PfHugRelaxed: return "pf_hug_relaxed";
    case LossVariant::PfHugFull: return "pf_hug_full";
    case LossVariant::CoupledHug: return "coupled_hug";
    case LossVariant::UnnormalizedHug: return "unnormalized_hug";
    case LossVariant::Ce: return "ce";
  }
  throw Error("unknown loss variant");
}

LossVariant loss_variant_from_name(const std::string& name) {
  if (name == "mhe_hug") return LossVariant::MheHug;
  if (name == "mhe_hug_relaxed") return LossVariant::MheHugRelaxed;
  if (name == "mhs_hug") return LossVariant::MhsHug;
  if (name == "mhs_hug_surrogate") return LossVariant::MhsHugSurrogate;
  if (name == "mgd_hug") return LossVariant::MgdHug;
  if (name == "pf_hug_relaxed") return LossVariant::PfHugRelaxed;
  if (name == "pf_hug_full") return LossVariant::PfHugFull;
  if (name == "coupled_hug") return LossVariant::CoupledHug;
  if (name == "unnormalized_hug") return LossVariant::UnnormalizedHug;
  if (name == "ce") return LossVariant::Ce;
  throw ParseError("unknown loss variant '" + name + "'");
}

std::string proxy_strategy_name(ProxyStrategy s) {
  switch (s) {
    case ProxyStrategy::Learnable: return "learnable";
    case ProxyStrategy::StaticRandom: return "static_random";
    case ProxyStrategy::StaticOptimized: return "static_optimized";
    case ProxyStrategy::PartiallyLearnable: return "partially_learnable";
  }
  throw Error("unknown proxy strategy");
}

ProxyStrategy proxy_strategy_from_name(const std::string& name) {
  if (name == "learnable") return ProxyStrategy::Learnable;
  if (name == "static_random") return ProxyStrategy::StaticRandom;
  if (name == "static_optimized") return ProxyStrategy::StaticOptimized;
  if (name == "partially_learnable") return ProxyStrategy::PartiallyLearnable;
  throw ParseError("unknown proxy strategy '" + name + "'");
}

std::string to_json(const LossSpec& spec, int indent) {
  json j{{"variant", loss_variant_name(spec.variant)},
         {"alpha", spec.alpha},
         {"beta", spec.beta},
         {"s_b", spec.s_b},
         {"s_w", spec.s_w},
         {"epsilon", spec.epsilon},
         {"tau", spec.tau},
         {"stop_gradient_proxies", spec.stop_gradient_proxies},
         {"lambda1", spec.lambda1},
         {"lambda2", spec.lambda2},
         {"s_target", spec.s_target}};
  if (spec.beta_prime) j["beta_prime"] = *spec.beta_prime;
  return dump(j, indent);
}

LossSpec loss_spec_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "LossSpec");
  LossSpec spec;
  spec.variant = loss_variant_from_name(field(j, "variant", "LossSpec").get<std::string>());
  const auto number = [&](const char* key, double fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
  };
  spec.alpha = number("alpha", spec.alpha);
  spec.beta = number("beta", spec.beta);
  if (j.contains("beta_prime") && !j["beta_prime"].is_null()) {
    spec.beta_prime = j["beta_prime"].get<double>();
  }
  spec.s_b = number("s_b", spec.s_b);
  spec.s_w = number("s_w", spec.s_w);
  spec.epsilon = number("epsilon", spec.epsilon);
  spec.tau = number("tau", spec.tau);
  if (j.contains("stop_gradient_proxies")) {
    spec.stop_gradient_proxies = j["stop_gradient_proxies"].get<bool>();
  }
  spec.lambda1 = number("lambda1", spec.lambda1);
  spec.lambda2 = number("lambda2", spec.lambda2);
  spec.s_target = number("s_target", spec.s_target);
  spec.validate();
  return spec;
}

std::string to_json(const ProxySet& ps, int indent) {
  json j{{"strategy", proxy_strategy_name(ps.strategy)},
         {"base", point_config_json(ps.base)},
         {"rotation_params", json::array()}};
  for (Eigen::Index k = 0; k < ps.rotation_params.size(); ++k) {
    j["rotation_params"].push_back(ps.rotation_params(k));
  }
  return dump(j, indent);
}

ProxySet proxy_set_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "ProxySet");
  ProxySet ps{point_config_parse(field(j, "base", "ProxySet"), "ProxySet.base"),
              proxy_strategy_from_name(field(j, "strategy", "ProxySet").get<std::string>()),
              Vector()};
  const json& params = field(j, "rotation_params", "ProxySet");
  ps.rotation_params.resize(static_cast<Eigen::Index>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ps.rotation_params(static_cast<Eigen::Index>(k)) = params[k].get<double>();
  }
  return ps;
}

std::string to_json(const GncReport& r, int indent) {
  json j{{"ace", r.ace},
         {"acme", r.acme},
         {"afre", r.afre},
         {"afmre", r.afmre},
         {"reverse_energy", r.reverse_energy},
         {"trace_sb", r.trace_sb},
         {"trace_sw", r.trace_sw},
         {"collapse_metric", r.collapse_metric},
         {"equinorm_cv", r.equinorm_cv},
         {"self_duality_gap", r.self_duality_gap},
         {"nearest_mean_agreement", r.nearest_mean_agreement},
         {"etf_deviation", r.etf_deviation},
         {"resultant_norm", r.resultant_norm},
         {"covariance_deviation", r.covariance_deviation}};
  if (r.cross_polytope_deviation) {
    j["cross_polytope_deviation"] = *r.cross_polytope_deviation;
  }
  return dump(j, indent);
}

GncReport gnc_report_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "GncReport");
  GncReport r;
  const auto get = [&](const char* key) {
    return field(j, key, "GncReport").get<double>();
  };
  r.ace = get("ace");
  r.acme = get("acme");
  r.afre = get("afre");
  r.afmre = get("afmre");
  r.reverse_energy = get("reverse_energy");
  r.trace_sb = get("trace_sb");
  r.trace_sw = get("trace_sw");
  r.collapse_metric = get("collapse_metric");
  r.equinorm_cv = get("equinorm_cv");
  r.self_duality_gap = get("self_duality_gap");
  r.nearest_mean_agreement = get("nearest_mean_agreement");
  r.etf_deviation = get("etf_deviation");
  r.resultant_norm = get("resultant_norm");
  r.covariance_deviation = get("covariance_deviation");
  if (j.contains("cross_polytope_deviation")) {
    r.cross_polytope_deviation = j["cross_polytope_deviation"].get<double>();
  }
  return r;
}

namespace {

void append_number(std::string& out, double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  out += buffer;
}

}  // namespace

std::string trajectory_csv(const Trajectory& t) {
  std::string out =
      "iteration,loss,inter_term,intra_term,grad_norm,ace,acme,afre,afmre,"
      "collapse_metric,equinorm_cv,self_duality_gap,nearest_mean_agreement\n";
  for (const TrajectoryPoint& p : t.points) {
    out += std::to_string(p.iteration);
    out += ',';
    append_number(out, p.loss);
    out += ',';
    append_number(out, p.inter_term);
    out += ',';
    append_number(out, p.intra_term);
    out += ',';
    append_number(out, p.grad_norm);
    if (p.gnc) {
      const GncReport& g = *p.gnc;
      const double columns[] = {g.ace,           g.acme,
                                g.afre,          g.afmre,
                                g.collapse_metric, g.equinorm_cv,
                                g.self_duality_gap, g.nearest_mean_agreement};
      for (double value : columns) {
        out += ',';
        append_number(out, value);
      }
    } else {
      out += ",,,,,,,,";
    }
    out += '\n';
  }
  return out;
}

}  // namespace hug
