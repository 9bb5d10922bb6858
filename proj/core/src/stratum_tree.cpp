#include "netfx/stratum_tree.hpp"

#include <algorithm>
#include <cmath>

#include "netfx/errors.hpp"

namespace netfx {

StratumTree::StratumTree(int horizon, CovariateCodec codec, Source source)
    : horizon_(horizon), codec_(std::move(codec)), source_(source) {
  if (horizon < 1) throw UsageError("horizon must be at least 1");
  nodes_.emplace_back();
}

std::optional<int> StratumTree::child(int id, int symbol) const {
  const auto& kids = node(id).children;
  auto it = std::lower_bound(kids.begin(), kids.end(), symbol,
                             [this](int c, int s) { return nodes_[static_cast<std::size_t>(c)].symbol < s; });
  if (it != kids.end() && nodes_[static_cast<std::size_t>(*it)].symbol == symbol) return *it;
  return std::nullopt;
}

std::optional<int> StratumTree::find(const StratumKey& key) const {
  int id = root();
  for (int s : key.steps) {
    auto next = child(id, s);
    if (!next) return std::nullopt;
    id = *next;
  }
  return id;
}

StratumKey StratumTree::key_of(int id) const {
  StratumKey key;
  key.steps.resize(static_cast<std::size_t>(node(id).depth));
  for (int cur = id; cur != root(); cur = node(cur).parent) {
    key.steps[static_cast<std::size_t>(node(cur).depth - 1)] = node(cur).symbol;
  }
  return key;
}

const std::vector<int>& StratumTree::nodes_at_depth(int depth) const {
  static const std::vector<int> empty;
  if (depth < 0 || depth >= static_cast<int>(by_depth_.size())) return empty;
  return by_depth_[static_cast<std::size_t>(depth)];
}

int StratumTree::insert_path(std::span<const int> steps) {
  if (static_cast<int>(steps.size()) > history_length()) {
    throw UsageError("path longer than the history length");
  }
  int id = root();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 0) throw DomainError("negative step code in stratum path");
    if (auto next = child(id, steps[i])) {
      id = *next;
      continue;
    }
    StratumNode fresh;
    fresh.symbol = steps[i];
    fresh.parent = id;
    fresh.depth = static_cast<int>(i) + 1;
    const int fresh_id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(fresh));
    auto& kids = nodes_[static_cast<std::size_t>(id)].children;
    auto pos = std::lower_bound(kids.begin(), kids.end(), steps[i],
                                [this](int c, int s) { return nodes_[static_cast<std::size_t>(c)].symbol < s; });
    kids.insert(pos, fresh_id);
    id = fresh_id;
  }
  return id;
}

void StratumTree::finalize() {
  by_depth_.assign(static_cast<std::size_t>(history_length()) + 1, {});
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    by_depth_[static_cast<std::size_t>(nodes_[i].depth)].push_back(static_cast<int>(i));
  }
}

void StratumTree::set_mean(const StratumKey& key, double mean) {
  auto id = find(key);
  if (!id) throw UsageError("stratum " + describe(key) + " is not present in the table");
  nodes_[static_cast<std::size_t>(*id)].mean = mean;
}

StratumTree StratumTree::from_histories(int horizon, CovariateCodec codec, std::span<const HistoryEntry> entries) {
  StratumTree tree(horizon, std::move(codec), Source::exact);
  for (const auto& e : entries) {
    if (static_cast<int>(e.history.size()) != tree.history_length()) {
      throw UsageError("history " + tree.describe(e.history) + " does not have " +
                       std::to_string(tree.history_length()) + " steps");
    }
    if (!std::isfinite(e.weight) || !std::isfinite(e.mean)) {
      throw DomainError("non-finite weight or mean for history " + tree.describe(e.history));
    }
    if (e.weight <= 0.0) continue;
    const int leaf = tree.insert_path(e.history.steps);
    auto& n = tree.mutable_node(leaf);
    if (n.weight > 0.0) throw UsageError("duplicate history " + tree.describe(e.history));
    n.weight = e.weight;
    n.mean = e.mean;
  }
  if (tree.size() == 1) throw UsageError("exact table has no history with positive weight");
  tree.finalize();
  // Aggregate bottom-up: internal weight is the sum of child weights and the
  // stated mean is the weight-averaged child mean.
  for (int d = tree.history_length() - 1; d >= 0; --d) {
    for (int id : tree.nodes_at_depth(d)) {
      auto& n = tree.mutable_node(id);
      double w = 0.0;
      double wm = 0.0;
      for (int c : n.children) {
        w += tree.node(c).weight;
        wm += tree.node(c).weight * tree.node(c).mean;
      }
      n.weight = w;
      n.mean = wm / w;
    }
  }
  return tree;
}

}  // namespace netfx
