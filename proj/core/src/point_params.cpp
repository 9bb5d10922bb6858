#include "netfx/point_params.hpp"

#include "netfx/errors.hpp"

namespace netfx {
namespace {

double contrast(const StratumTree& tree, const StratumKey& key, bool treatment) {
  if (key.empty() || key.ends_with_treatment() != treatment) {
    throw UsageError(std::string("key ") + tree.describe(key) + " does not end with a " +
                     (treatment ? "treatment" : "covariate"));
  }
  if (key.steps.back() == 0) throw UsageError("contrast key " + tree.describe(key) + " names the reference level");
  const StratumKey reference = key.parent().child(0);
  const auto active = tree.find(key);
  const auto control = tree.find(reference);
  if (!active) throw EstimabilityError("arm " + tree.describe(key) + " is empty");
  if (!control) throw EstimabilityError("reference arm " + tree.describe(reference) + " is empty");
  return tree.node(*active).mean - tree.node(*control).mean;
}

}  // namespace

double point_effect_treatment(const StratumTree& tree, const StratumKey& key) { return contrast(tree, key, true); }

double point_effect_covariate(const StratumTree& tree, const StratumKey& key) { return contrast(tree, key, false); }

double grand_mean(const StratumTree& tree) {
  double wm = 0.0;
  double w = 0.0;
  for (int leaf : tree.nodes_at_depth(tree.history_length())) {
    wm += tree.node(leaf).weight * tree.node(leaf).mean;
    w += tree.node(leaf).weight;
  }
  return wm / w;
}

PointParams extract_point_params(const StratumTree& tree) {
  PointParams out;
  out.grand_mean = grand_mean(tree);
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(static_cast<int>(id));
    if (n.depth == tree.history_length()) continue;
    const auto control = tree.child(static_cast<int>(id), 0);
    const bool next_is_treatment = n.depth % 2 == 0;
    auto& target = next_is_treatment ? out.theta : out.gamma;
    for (int c : n.children) {
      const auto& child = tree.node(c);
      if (child.symbol == 0) continue;
      if (!control) {
        out.non_estimable.push_back(tree.key_of(c));
        continue;
      }
      target.emplace(tree.key_of(c), child.mean - tree.node(*control).mean);
    }
  }
  return out;
}

double reconstruct_standard_mean(const PointParams& params, const StratumTree& proportions, const StratumKey& history) {
  if (static_cast<int>(history.size()) != proportions.history_length()) {
    throw UsageError("history " + proportions.describe(history) + " is not a full history");
  }
  double value = params.grand_mean;
  int id = StratumTree::root();
  for (std::size_t j = 0; j < history.steps.size(); ++j) {
    const bool treatment_step = j % 2 == 0;
    const auto& table = treatment_step ? params.theta : params.gamma;
    const auto& node = proportions.node(id);
    const StratumKey prefix = proportions.key_of(id);
    double centered = 0.0;
    for (int c : node.children) {
      const int level = proportions.node(c).symbol;
      if (level == 0) continue;
      const StratumKey term = prefix.child(level);
      auto it = table.find(term);
      if (it == table.end()) {
        throw IncompletenessError(std::string("missing ") + (treatment_step ? "theta" : "gamma") + " at " +
                                      proportions.describe(term),
                                  {proportions.describe(term)});
      }
      centered -= it->second * (proportions.node(c).weight / node.weight);
    }
    const int level = history.steps[j];
    if (level != 0) {
      auto it = table.find(prefix.child(level));
      if (it == table.end()) {
        throw IncompletenessError("missing parameter at " + proportions.describe(prefix.child(level)),
                                  {proportions.describe(prefix.child(level))});
      }
      centered += it->second;
    }
    value += centered;
    const auto next = proportions.child(id, level);
    if (!next) {
      throw IncompletenessError("no proportion for " + proportions.describe(prefix.child(level)),
                                {proportions.describe(prefix.child(level))});
    }
    id = *next;
  }
  return value;
}

nlohmann::json to_json(const PointParams& params, const CovariateCodec& codec) {
  auto dump = [&](const std::map<StratumKey, double>& m) {
    auto arr = nlohmann::json::array();
    for (const auto& [k, v] : m) arr.push_back({{"key", format_key(k, codec)}, {"value", v}});
    return arr;
  };
  nlohmann::json j;
  j["theta"] = dump(params.theta);
  j["gamma"] = dump(params.gamma);
  j["grand_mean"] = params.grand_mean;
  auto ne = nlohmann::json::array();
  for (const auto& k : params.non_estimable) ne.push_back(format_key(k, codec));
  j["non_estimable"] = ne;
  return j;
}

}  // namespace netfx
