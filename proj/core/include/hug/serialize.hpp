#pragma once

#include <string>

#include "hug/gnc.hpp"
#include "hug/losses.hpp"
#include "hug/optim.hpp"
#include "hug/proxies.hpp"

namespace hug {

// JSON wire formats. Doubles are emitted with full round-trip precision, so
// a load reproduces every derived diagnostic bit-identically.

std::string to_json(const PointConfig& p, int indent = -1);
PointConfig point_config_from_json(const std::string& text);

std::string to_json(const LossSpec& spec, int indent = -1);
LossSpec loss_spec_from_json(const std::string& text);

std::string to_json(const ProxySet& ps, int indent = -1);
ProxySet proxy_set_from_json(const std::string& text);

std::string to_json(const GncReport& report, int indent = -1);
GncReport gnc_report_from_json(const std::string& text);

std::string loss_variant_name(LossVariant v);
LossVariant loss_variant_from_name(const std::string& name);

std::string proxy_strategy_name(ProxyStrategy s);
ProxyStrategy proxy_strategy_from_name(const std::string& name);

/// Trajectory CSV with the fixed column set
/// iteration,loss,inter_term,intra_term,grad_norm,ace,acme,afre,afmre,
/// collapse_metric,equinorm_cv,self_duality_gap,nearest_mean_agreement.
/// GNC columns are empty on rows without a snapshot. Values use %.17g so
/// identical runs serialize byte-identically.
std::string trajectory_csv(const Trajectory& t);

}  // namespace hug
