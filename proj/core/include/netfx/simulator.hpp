#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "netfx/dataset.hpp"
#include "netfx/dgp.hpp"
#include "netfx/estimation.hpp"
#include "netfx/pattern.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// random: units are drawn i.i.d. from the process.
/// fixed: history counts are n * pr(history) rounded by largest remainder and
/// only outcomes are random (inference conditional on the design).
enum class DesignMode { random, fixed };

DesignMode parse_design(const std::string& text);

Dataset simulate(const DgpSpec& dgp, std::size_t n, std::mt19937_64& rng, DesignMode design = DesignMode::random);
Dataset simulate(const DgpSpec& dgp, std::size_t n, std::uint64_t seed, DesignMode design = DesignMode::random);

/// Exact standard-parameter table of the process: every history with its
/// probability and mean (latent variable integrated out).
StratumTree population_table(const DgpSpec& dgp);

/// History counts of the fixed design.
std::map<StratumKey, std::size_t> fixed_design_counts(const DgpSpec& dgp, std::size_t n);

struct CausalOracleResult {
  /// Key: prefix (z_1..z_{t-1}, x_1..x_{t-1}) followed by z_t = 1.
  std::map<StratumKey, double> effects;
};

/// E{y(z_t = 1, 0..0) | prefix} - E{y(0, 0..0) | prefix} for every prefix,
/// by exact enumeration of the latent variable and of covariate paths under
/// the intervention.
CausalOracleResult g_oracle(const DgpSpec& dgp);

struct EquivalenceEntry {
  StratumKey key;
  double oracle = 0.0;
  double population = 0.0;  // net effect of the exact population table
  double mean_estimate = 0.0;
  double bias = 0.0;        // mean_estimate - oracle
  double mc_se = 0.0;
  std::size_t available = 0;
  bool flagged = false;  // |bias| > 4 mc_se
};

struct EquivalenceReport {
  std::size_t n = 0;
  std::size_t reps = 0;
  bool confounded = false;
  std::vector<EquivalenceEntry> entries;
  double max_population_gap = 0.0;  // max |population - oracle|
  double max_abs_bias_z = 0.0;

  bool flagged() const;
};

/// Per replication: simulate n units, compute net effects of the empirical
/// table and compare with the oracle.
EquivalenceReport equivalence_experiment(const DgpSpec& dgp, std::size_t n, std::size_t reps, std::uint64_t seed,
                                         unsigned workers = 0);

struct EqualityTest {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Deliberately wrong test of "no treatment effects": equality of all
/// standard parameters mu(history) that share the covariate path, with known
/// outcome variance.
EqualityTest standard_parameter_equality_test(const StratumTree& tree, double sigma2);

struct MotivationReport {
  std::size_t n = 0;
  std::size_t reps = 0;
  double alpha = 0.05;
  double wrong_rejection_rate = 0.0;
  double correct_rejection_rate = 0.0;
  double mc_se_nominal = 0.0;  // sqrt(alpha (1 - alpha) / reps)
  int wrong_df = 0;
  int correct_df = 0;
};

/// Rejection rates of the standard-parameter equality test and of the Wald
/// test varphi = 0 from `pattern` under the process `dgp` (which should have
/// null net effects).
MotivationReport motivation_experiment(const DgpSpec& dgp, const PatternSpec& pattern, std::size_t n, std::size_t reps,
                                       double alpha, std::uint64_t seed, DesignMode design = DesignMode::fixed,
                                       unsigned workers = 0);

/// The 160-record two-period fixture: leaf counts 30,20,20,10,10,20,10,40 and
/// means 100,120,110,130,130,150,136,116 over (z1,x1,z2) in lexicographic
/// order, outcomes alternating mean + 5 and mean - 5.
Dataset make_fixture_d0();

}  // namespace netfx
