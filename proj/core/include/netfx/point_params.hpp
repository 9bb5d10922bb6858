#pragma once

#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// The point parametrization: point effects of treatments (theta), point
/// effects of covariates (gamma) and the grand mean. Keys are the stratum
/// including the contrasted level, e.g. theta at "z1=1,x1=0,z2=1". Control
/// levels (code 0) are implicitly zero and never stored.
struct PointParams {
  std::map<StratumKey, double> theta;
  std::map<StratumKey, double> gamma;
  double grand_mean = 0.0;
  /// Contrasts whose control arm is unobserved.
  std::vector<StratumKey> non_estimable;
};

/// mu(..., z_t) - mu(..., z_t = 0) for a key ending with an active treatment.
double point_effect_treatment(const StratumTree& tree, const StratumKey& key);
/// mu(..., x_t) - mu(..., x_t = 0) for a key ending with a non-reference covariate.
double point_effect_covariate(const StratumTree& tree, const StratumKey& key);
/// Proportion-weighted average of the full-history means (= mean of y).
double grand_mean(const StratumTree& tree);

/// Every estimable point parameter of the table.
PointParams extract_point_params(const StratumTree& tree);

/// Rebuilds mu(history) from point parameters and the proportions of `tree`:
/// a left-to-right fold adding, per step, the stated parameter minus the
/// proportion-weighted average of all parameters at that stratum.
double reconstruct_standard_mean(const PointParams& params, const StratumTree& proportions, const StratumKey& history);

nlohmann::json to_json(const PointParams& params, const CovariateCodec& codec);

}  // namespace netfx
