#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netfx/dataset.hpp"
#include "netfx/estimation.hpp"
#include "netfx/pattern.hpp"
#include "netfx/targets.hpp"

namespace netfx {

struct CovarianceCheck {
  TargetKey a;
  TargetKey b;
  double covariance = 0.0;
  double mc_se = 0.0;
  bool flagged = false;  // |covariance| > 4 mc_se
};

struct VarianceCheck {
  TargetKey key;
  double empirical = 0.0;
  double expected = 0.0;  // sigma^2 (1/n_active + 1/n_control)
  double mc_se = 0.0;
  bool flagged = false;  // |empirical - expected| > 3 mc_se
};

/// Flags of one family of checks against the count expected by chance when
/// every check is a normal deviate. `p_value` is pr(Binomial(checks, rate) >= flags).
struct FlagCount {
  std::size_t checks = 0;
  std::size_t flags = 0;
  double rate = 0.0;
  double expected = 0.0;
  double p_value = 1.0;
};

struct IndependenceReport {
  std::size_t reps = 0;
  double sigma2 = 1.0;
  std::vector<CovarianceCheck> covariances;  // every pair of distinct targets
  std::vector<VarianceCheck> variances;
  std::vector<std::string> warnings;

  /// Any single check outside its band.
  bool flagged() const;
  FlagCount covariance_flags() const;
  FlagCount variance_flags() const;
  /// More flags in either family than chance explains at `level`. With
  /// thousands of targets some single flags are expected even when the
  /// estimates are independent.
  bool excess_flags(double level = 1e-3) const;
};

/// Parametric Monte Carlo conditional on the observed design: each replication
/// redraws y_i = mean(leaf of i) + sigma * eps_i, recomputes every point-effect
/// estimate and accumulates their empirical covariances.
IndependenceReport independence_diagnostic(const Dataset& data, std::size_t reps, std::uint64_t seed,
                                           double sigma2 = 1.0, Scope scope = Scope::full, unsigned workers = 0);

struct PairwiseTest {
  std::size_t a = 0;
  std::size_t b = 0;
  double difference = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct PatternSuggestion {
  PatternSpec pattern;
  std::vector<std::vector<std::size_t>> clusters;  // indices into the saturated parameters
  std::vector<double> cluster_values;              // GLS common value of each cluster
  std::vector<PairwiseTest> initial_tests;         // all pairs of saturated parameters
  std::vector<PairwiseTest> merges;                // in merge order, indices are cluster ids at that step
  double alpha = 0.05;
};

/// Greedy agglomeration of the saturated parameters: repeatedly merge the pair
/// of clusters whose Wald z-test of equal common values has the smallest |z|
/// among the pairs not rejected at `alpha`. Throws EstimabilityError on a
/// singular covariance. The suggestion is advisory; nothing applies it.
PatternSuggestion pattern_discovery(const NetEffectFit& saturated, const PatternSpec& saturated_spec, double alpha);

}  // namespace netfx
