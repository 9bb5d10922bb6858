#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netfx/constraints.hpp"
#include "netfx/dataset.hpp"
#include "netfx/pattern.hpp"
#include "netfx/strata_stats.hpp"
#include "netfx/stratum_tree.hpp"
#include "netfx/targets.hpp"

namespace netfx {

/// theta-hat = mean(active arm) - mean(control arm), var = sum of the arm mean
/// variances. Exact tables carry variance 0.
struct PointEffectEstimate {
  TargetKey key;
  double value = 0.0;
  double variance = 0.0;
  std::int64_t count_active = 0;
  std::int64_t count_control = 0;
};

struct PointEffectSet {
  std::vector<PointEffectEstimate> estimates;
  std::vector<DroppedTarget> skipped;
};

PointEffectSet estimate_point_effects(const StratumTree& tree, Scope scope, const VarianceMode& mode);
PointEffectSet estimate_point_effects(const Dataset& data, const VarianceMode& mode);

struct Residual {
  TargetKey target;
  double observed = 0.0;
  double fitted = 0.0;
  double standardized = 0.0;  // (observed - fitted) * sqrt(weight)
};

struct NetEffectFit {
  std::vector<std::string> names;
  Eigen::VectorXd phi_hat;
  Eigen::MatrixXd covariance;
  std::vector<Residual> residuals;
  int rank = 0;
  std::size_t rows_used = 0;
  std::vector<DroppedTarget> dropped;
};

/// Weighted least squares of the matched estimates on the rows with positive
/// weight. Throws IdentifiabilityError (with a null-space basis) when the
/// weighted design has rank < k, UsageError when a weighted row has no
/// estimate.
NetEffectFit wls_fit(const ConstraintSet& rows, const std::vector<PointEffectEstimate>& estimates);

struct FittedNetEffect {
  StratumKey key;
  double value = 0.0;
  double std_error = 0.0;
};

/// phi-hat(stratum) = feature(stratum) . varphi-hat for every observed active
/// stratum of `tree`, with its standard error.
std::vector<FittedNetEffect> fitted_net_effects(const NetEffectFit& fit, const PatternSpec& spec,
                                                const StratumTree& tree);

struct WaldTest {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Wald test of varphi_i = 0 for all i in `indices` (all parameters if empty).
WaldTest wald_test(const NetEffectFit& fit, const std::vector<int>& indices = {});

struct PipelineResult {
  PointEffectSet estimates;
  ConstraintSet constraints;
  NetEffectFit fit;
  std::vector<FittedNetEffect> fitted;
};

/// Stratum means -> point effects -> constraint rows -> WLS -> fitted net
/// effects.
PipelineResult run_pipeline(const StratumTree& tree, const PatternSpec& spec, Scope scope, const VarianceMode& mode);

}  // namespace netfx
