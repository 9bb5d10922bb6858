#pragma once

#include <cstdint>
#include <string>

#include "netfx/dataset.hpp"
#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// Outcome summary of one stratum: n(A), the mean, and the sum of squared
/// deviations about that mean.
struct StratumStats {
  std::int64_t count = 0;
  double weight = 0.0;
  double mean = 0.0;
  double sum_sq_dev = 0.0;
};

/// Pools two disjoint strata (Chan et al. pairwise update).
StratumStats merge(const StratumStats& a, const StratumStats& b);

/// Conditional proportion pr(A | B) kept as its numerator and denominator;
/// `value` is their ratio, rounded once.
struct Proportion {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// How var{mean} is obtained: sigma^2 / n with a known outcome variance, or the
/// unbiased sample estimate sum (y - mean)^2 / (n (n - 1)).
struct VarianceMode {
  enum class Kind { known, estimated };
  Kind kind = Kind::estimated;
  double sigma2 = 1.0;

  static VarianceMode known(double sigma2 = 1.0) { return {Kind::known, sigma2}; }
  static VarianceMode estimated() { return {Kind::estimated, 1.0}; }
  /// Accepts "estimated", "known" or "known:<sigma2>".
  static VarianceMode parse(const std::string& text);
  std::string str() const;
};

/// pr(a | b). `a` must refine `b`; an absent `a` gives 0, an empty `b` is an
/// estimability error.
Proportion proportion(const StratumTree& tree, const StratumKey& a, const StratumKey& b);
Proportion proportion(const Dataset& data, const StratumKey& a, const StratumKey& b);

/// Stratum statistics; throws EstimabilityError for an absent stratum.
StratumStats stratum_mean(const StratumTree& tree, const StratumKey& key);
StratumStats stratum_mean(const Dataset& data, const StratumKey& key);
StratumStats stats_of(const StratumNode& node);

/// var{mean} of a stratum under `mode`. Estimated mode needs count >= 2.
double stratum_mean_variance(const StratumStats& stats, const VarianceMode& mode);
double stratum_mean_variance(const StratumTree& tree, const StratumKey& key, const VarianceMode& mode);

/// Whether `stratum_mean_variance` is finite for these stats.
bool variance_available(const StratumStats& stats, const VarianceMode& mode);

}  // namespace netfx
