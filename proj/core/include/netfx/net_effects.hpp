#pragma once

#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// Net effects phi (keys end with an active treatment) and the means nu under
/// no later active treatment (keys end with any treatment level).
struct NetEffectTable {
  std::map<StratumKey, double> phi;
  std::map<StratumKey, double> nu;
};

/// Result of the backward recursion when some terms may be unavailable.
struct PartialNetEffects {
  NetEffectTable table;
  /// Keys whose net effect could not be formed, with the missing arm or the
  /// downstream term that blocked it.
  std::vector<std::pair<StratumKey, std::string>> missing;
};

/// Backward recursion t = T..1 over the table. Stratum means mu(..., z_t) are
/// marginalized from the full-history means; nu subtracts the expected
/// downstream net effects; phi contrasts nu against the control arm.
///
/// Throws IncompletenessError listing every stratum whose control arm is
/// absent.
NetEffectTable exact_net_effects(const StratumTree& tree);

/// Same recursion, recording unavailable terms instead of throwing. Net
/// effects that depend on an unavailable term are left out.
PartialNetEffects partial_net_effects(const StratumTree& tree);

/// Point effect at `key` rebuilt from net effects: phi(key) plus the
/// proportion-weighted downstream net effects in the active arm minus those in
/// the control arm. Sums are taken by direct enumeration of descendant strata.
double decompose_point_effect(const NetEffectTable& net, const StratumTree& proportions, const StratumKey& key);

struct DecompositionEntry {
  StratumKey key;
  double point_effect = 0.0;   // stated mean contrast
  double decomposition = 0.0;  // rebuilt from net effects
  double deviation = 0.0;
};

struct DecompositionReport {
  std::vector<DecompositionEntry> entries;
  std::vector<StratumKey> skipped;
  double max_deviation = 0.0;
  double tolerance = 1e-10;

  bool flagged() const noexcept { return max_deviation > tolerance; }
};

/// Compares every estimable point effect with its decomposition. A table whose
/// stated stratum means disagree with its full-history means shows up as a
/// non-zero deviation.
DecompositionReport verify_decomposition(const StratumTree& tree, double tolerance = 1e-10);

nlohmann::json to_json(const NetEffectTable& table, const CovariateCodec& codec);
nlohmann::json to_json(const DecompositionReport& report, const CovariateCodec& codec);

}  // namespace netfx
