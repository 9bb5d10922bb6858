#pragma once

#include <string>
#include <vector>

#include "netfx/pattern.hpp"
#include "netfx/strata_stats.hpp"
#include "netfx/stratum_tree.hpp"
#include "netfx/targets.hpp"

namespace netfx {

/// theta(target) = coefficients . varphi, observed with weight 1 / var(theta-hat).
/// Weight 0 keeps the row visible but out of the fit.
struct ConstraintRow {
  TargetKey target;
  std::vector<double> coefficients;
  double weight = 0.0;
};

struct DroppedTarget {
  TargetKey target;
  std::string reason;
};

struct ConstraintSet {
  int k = 0;
  Scope scope = Scope::full;
  std::vector<ConstraintRow> rows;
  std::vector<DroppedTarget> dropped;
  std::vector<std::string> warnings;
  std::size_t candidates = 0;  // targets with an observed active arm
};

/// One row per target with both arms observed. Coefficients are the pattern
/// feature of the target's own net effect plus, for each later active
/// stratum, its feature times the difference of its proportion in the active
/// and the control arm.
///
/// In markov scope the own feature is averaged over pr(prefix | z_{t-1},
/// x_{t-1}) and the downstream proportions are conditional on the pooled arm
/// (z_{t-1}, x_{t-1}, z_t).
///
/// Weights: 1 / (var mean(active) + var mean(control)) under `mode`; rows of
/// exact tables get weight 1.
ConstraintSet build_constraints(const PatternSpec& spec, const StratumTree& tree, Scope scope,
                                const VarianceMode& mode);

struct RankReport {
  int rank = 0;
  int k = 0;
  std::size_t rows = 0;
  std::vector<std::vector<double>> null_space;  // orthonormal, empty when identified

  bool deficient() const noexcept { return rank < k; }
};

/// Rank of the stacked coefficient rows (those with positive weight when
/// `weighted_only`).
RankReport constraint_rank_check(const std::vector<ConstraintRow>& rows, int k, bool weighted_only = false);

}  // namespace netfx
