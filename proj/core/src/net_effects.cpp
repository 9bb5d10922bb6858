#include "netfx/net_effects.hpp"

#include <cmath>

#include "netfx/errors.hpp"

namespace netfx {

PartialNetEffects partial_net_effects(const StratumTree& tree) {
  const int T = tree.horizon();
  const auto n = tree.size();
  std::vector<double> marginal(n, 0.0);
  std::vector<double> downstream(n, 0.0);
  std::vector<char> downstream_ok(n, 0);
  std::vector<double> phi(n, 0.0);
  std::vector<char> phi_ok(n, 0);

  // Means of every stratum marginalized from the full-history means.
  for (int d = tree.history_length(); d >= 0; --d) {
    for (int id : tree.nodes_at_depth(d)) {
      const auto& node = tree.node(id);
      if (d == tree.history_length()) {
        marginal[static_cast<std::size_t>(id)] = node.mean;
        continue;
      }
      double wm = 0.0;
      for (int c : node.children) wm += tree.node(c).weight * marginal[static_cast<std::size_t>(c)];
      marginal[static_cast<std::size_t>(id)] = wm / node.weight;
    }
  }

  PartialNetEffects out;
  for (int t = T; t >= 1; --t) {
    const int treat_depth = 2 * t - 1;
    // Expected sum of later net effects given the stratum ending with z_t.
    for (int q : tree.nodes_at_depth(treat_depth)) {
      const auto qi = static_cast<std::size_t>(q);
      if (t == T) {
        downstream_ok[qi] = 1;
        continue;
      }
      const double wq = tree.node(q).weight;
      double sum = 0.0;
      bool ok = true;
      for (int x : tree.node(q).children) {
        for (int z : tree.node(x).children) {
          const auto zi = static_cast<std::size_t>(z);
          if (!downstream_ok[zi] || (tree.node(z).symbol != 0 && !phi_ok[zi])) {
            ok = false;
            continue;
          }
          const double term = (tree.node(z).symbol != 0 ? phi[zi] : 0.0) + downstream[zi];
          sum += term * (tree.node(z).weight / wq);
        }
      }
      downstream[qi] = sum;
      downstream_ok[qi] = ok ? 1 : 0;
    }
    for (int p : tree.nodes_at_depth(treat_depth - 1)) {
      const auto control = tree.child(p, 0);
      for (int c : tree.node(p).children) {
        const auto ci = static_cast<std::size_t>(c);
        const StratumKey key = tree.key_of(c);
        if (downstream_ok[ci]) out.table.nu.emplace(key, marginal[ci] - downstream[ci]);
        if (tree.node(c).symbol == 0) continue;
        if (!control) {
          out.missing.emplace_back(key, "control arm " + tree.describe(key.parent().child(0)) + " absent");
          continue;
        }
        const auto k0 = static_cast<std::size_t>(*control);
        if (!downstream_ok[ci] || !downstream_ok[k0]) {
          out.missing.emplace_back(key, "depends on an unavailable later net effect");
          continue;
        }
        phi[ci] = (marginal[ci] - downstream[ci]) - (marginal[k0] - downstream[k0]);
        phi_ok[ci] = 1;
        out.table.phi.emplace(key, phi[ci]);
      }
    }
  }
  return out;
}

NetEffectTable exact_net_effects(const StratumTree& tree) {
  auto partial = partial_net_effects(tree);
  if (!partial.missing.empty()) {
    std::vector<std::string> listing;
    listing.reserve(partial.missing.size());
    for (const auto& [key, why] : partial.missing) listing.push_back(tree.describe(key) + ": " + why);
    const std::string first = listing.front();
    throw IncompletenessError("net effects incomplete; first missing term: " + first, std::move(listing));
  }
  return std::move(partial.table);
}

namespace {

// Sum over descendants D of `arm` ending with an active treatment of
// phi(D) * pr(D | arm).
double downstream_by_enumeration(const NetEffectTable& net, const StratumTree& tree, int arm) {
  const double w = tree.node(arm).weight;
  double sum = 0.0;
  std::vector<int> stack(tree.node(arm).children.begin(), tree.node(arm).children.end());
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& node = tree.node(id);
    if (node.depth % 2 == 1 && node.symbol != 0) {
      const StratumKey key = tree.key_of(id);
      auto it = net.phi.find(key);
      if (it == net.phi.end()) {
        throw IncompletenessError("missing net effect at " + tree.describe(key), {tree.describe(key)});
      }
      sum += it->second * (node.weight / w);
    }
    stack.insert(stack.end(), node.children.begin(), node.children.end());
  }
  return sum;
}

}  // namespace

double decompose_point_effect(const NetEffectTable& net, const StratumTree& proportions, const StratumKey& key) {
  if (key.empty() || !key.ends_with_treatment() || key.steps.back() == 0) {
    throw UsageError("decomposition key must end with an active treatment: " + proportions.describe(key));
  }
  const auto it = net.phi.find(key);
  if (it == net.phi.end()) {
    throw IncompletenessError("missing net effect at " + proportions.describe(key), {proportions.describe(key)});
  }
  if (key.time() == proportions.horizon()) return it->second;
  const StratumKey reference = key.parent().child(0);
  const auto active = proportions.find(key);
  const auto control = proportions.find(reference);
  if (!active || !control) {
    throw IncompletenessError("missing arm for " + proportions.describe(key),
                              {proportions.describe(active ? reference : key)});
  }
  return it->second + downstream_by_enumeration(net, proportions, *active) -
         downstream_by_enumeration(net, proportions, *control);
}

DecompositionReport verify_decomposition(const StratumTree& tree, double tolerance) {
  DecompositionReport report;
  report.tolerance = tolerance;
  const auto partial = partial_net_effects(tree);
  for (int d = 1; d <= tree.history_length(); d += 2) {
    for (int id : tree.nodes_at_depth(d)) {
      if (tree.node(id).symbol == 0) continue;
      const StratumKey key = tree.key_of(id);
      const auto control = tree.child(tree.node(id).parent, 0);
      if (!control) {
        report.skipped.push_back(key);
        continue;
      }
      DecompositionEntry e;
      e.key = key;
      e.point_effect = tree.node(id).mean - tree.node(*control).mean;
      try {
        e.decomposition = decompose_point_effect(partial.table, tree, key);
      } catch (const IncompletenessError&) {
        report.skipped.push_back(key);
        continue;
      }
      e.deviation = std::abs(e.point_effect - e.decomposition);
      report.max_deviation = std::max(report.max_deviation, e.deviation);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

nlohmann::json to_json(const NetEffectTable& table, const CovariateCodec& codec) {
  auto dump = [&](const std::map<StratumKey, double>& m) {
    auto arr = nlohmann::json::array();
    for (const auto& [k, v] : m) arr.push_back({{"key", format_key(k, codec)}, {"value", v}});
    return arr;
  };
  return {{"phi", dump(table.phi)}, {"nu", dump(table.nu)}};
}

nlohmann::json to_json(const DecompositionReport& report, const CovariateCodec& codec) {
  auto entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"key", format_key(e.key, codec)},
                       {"point_effect", e.point_effect},
                       {"decomposition", e.decomposition},
                       {"deviation", e.deviation}});
  }
  auto skipped = nlohmann::json::array();
  for (const auto& k : report.skipped) skipped.push_back(format_key(k, codec));
  return {{"entries", entries},
          {"skipped", skipped},
          {"max_deviation", report.max_deviation},
          {"tolerance", report.tolerance},
          {"flagged", report.flagged()}};
}

}  // namespace netfx
