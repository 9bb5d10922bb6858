#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "netfx/strata_stats.hpp"
#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// full: contrasts on the complete prefix (z_1..z_{t-1}, x_1..x_{t-1}).
/// markov: contrasts on the collapsed prefix (z_{t-1}, x_{t-1}); identical to
/// full for t <= 2.
enum class Scope { full, markov };

/// A point-effect target: treatment level `treatment` versus 0 at time `time`
/// within `context`. In markov scope the context holds only the two steps
/// (z_{t-1}, x_{t-1}) (empty at t = 1).
struct TargetKey {
  int time = 0;
  Scope scope = Scope::full;
  StratumKey context;
  int treatment = 0;

  auto operator<=>(const TargetKey&) const = default;
};

std::string describe(const TargetKey& key, const CovariateCodec& codec);

/// A target resolved against a tree: the prefix nodes it pools and the
/// treatment-arm nodes on either side of the contrast.
struct Target {
  TargetKey key;
  std::vector<int> contexts;  // prefix nodes at depth 2t-2
  std::vector<int> active;    // children with symbol == treatment
  std::vector<int> control;   // children with symbol 0

  bool estimable() const noexcept { return !active.empty() && !control.empty(); }
};

/// Every (context, active level) pair with a non-empty active arm, ordered by
/// time, context and level. Targets whose control arm is empty are kept so
/// callers can log them.
std::vector<Target> enumerate_targets(const StratumTree& tree, Scope scope);

/// Pooled statistics of a set of disjoint strata.
StratumStats pooled_stats(const StratumTree& tree, std::span<const int> nodes);

const char* to_string(Scope scope);
Scope parse_scope(const std::string& text);

}  // namespace netfx
