#include "netfx/targets.hpp"

#include <map>
#include <utility>

#include "netfx/errors.hpp"

namespace netfx {

std::string describe(const TargetKey& key, const CovariateCodec& codec) {
  std::string out;
  if (key.scope == Scope::full || key.time <= 2) {
    out = key.context.empty() ? std::string("*") : format_key(key.context, codec);
  } else {
    const std::string s = std::to_string(key.time - 1);
    std::string x;
    if (codec.width() <= 1) {
      x = std::to_string(key.context.steps.at(1));
    } else {
      const auto comps = codec.decode(key.context.steps.at(1));
      x = "(";
      for (std::size_t i = 0; i < comps.size(); ++i) x += (i ? "," : "") + std::to_string(comps[i]);
      x += ")";
    }
    out = "z" + s + "=" + std::to_string(key.context.steps.at(0)) + ",x" + s + "=" + x;
  }
  return out + " | z" + std::to_string(key.time) + "=" + std::to_string(key.treatment);
}

std::vector<Target> enumerate_targets(const StratumTree& tree, Scope scope) {
  std::vector<Target> out;
  for (int t = 1; t <= tree.horizon(); ++t) {
    const int depth = 2 * t - 2;
    // context key -> prefix nodes, in key order
    std::map<StratumKey, std::vector<int>> groups;
    for (int id : tree.nodes_at_depth(depth)) {
      StratumKey ctx;
      if (scope == Scope::full || t <= 2) {
        ctx = tree.key_of(id);
      } else {
        const auto& n = tree.node(id);
        ctx.steps = {tree.node(n.parent).symbol, n.symbol};
      }
      groups[ctx].push_back(id);
    }
    for (auto& [ctx, nodes] : groups) {
      std::map<int, std::vector<int>> arms;
      for (int id : nodes) {
        for (int c : tree.node(id).children) arms[tree.node(c).symbol].push_back(c);
      }
      std::vector<int> control;
      if (auto it = arms.find(0); it != arms.end()) control = it->second;
      for (auto& [level, members] : arms) {
        if (level == 0) continue;
        Target target;
        target.key = TargetKey{t, scope, ctx, level};
        target.contexts = nodes;
        target.active = members;
        target.control = control;
        out.push_back(std::move(target));
      }
    }
  }
  return out;
}

StratumStats pooled_stats(const StratumTree& tree, std::span<const int> nodes) {
  StratumStats acc;
  for (int id : nodes) acc = merge(acc, stats_of(tree.node(id)));
  return acc;
}

const char* to_string(Scope scope) { return scope == Scope::full ? "full" : "markov"; }

Scope parse_scope(const std::string& text) {
  if (text == "full") return Scope::full;
  if (text == "markov") return Scope::markov;
  throw UsageError("unknown scope '" + text + "' (expected full or markov)");
}

}  // namespace netfx
