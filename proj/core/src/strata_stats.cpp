#include "netfx/strata_stats.hpp"

#include <cstdlib>

#include "netfx/errors.hpp"

namespace netfx {

StratumStats merge(const StratumStats& a, const StratumStats& b) {
  if (a.weight <= 0.0) return b;
  if (b.weight <= 0.0) return a;
  StratumStats out;
  out.count = a.count + b.count;
  out.weight = a.weight + b.weight;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * (b.weight / out.weight);
  out.sum_sq_dev = a.sum_sq_dev + b.sum_sq_dev + delta * delta * a.weight * b.weight / out.weight;
  return out;
}

VarianceMode VarianceMode::parse(const std::string& text) {
  if (text == "estimated") return estimated();
  if (text == "known") return known();
  if (text.rfind("known:", 0) == 0) {
    const std::string num = text.substr(6);
    char* end = nullptr;
    const double s2 = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || !(s2 > 0.0)) {
      throw UsageError("known variance must be a positive number, got '" + num + "'");
    }
    return known(s2);
  }
  throw UsageError("variance mode must be 'estimated' or 'known:<sigma2>', got '" + text + "'");
}

std::string VarianceMode::str() const {
  return kind == Kind::estimated ? "estimated" : "known:" + std::to_string(sigma2);
}

Proportion proportion(const StratumTree& tree, const StratumKey& a, const StratumKey& b) {
  if (!a.refines(b)) {
    throw UsageError("pr(" + tree.describe(a) + " | " + tree.describe(b) + "): numerator does not refine the condition");
  }
  const auto bid = tree.find(b);
  if (!bid || tree.node(*bid).weight <= 0.0) {
    throw EstimabilityError("pr(. | " + tree.describe(b) + "): conditioning stratum is empty");
  }
  const auto aid = tree.find(a);
  Proportion p;
  p.denominator = tree.node(*bid).weight;
  p.numerator = aid ? tree.node(*aid).weight : 0.0;
  p.value = p.numerator / p.denominator;
  return p;
}

Proportion proportion(const Dataset& data, const StratumKey& a, const StratumKey& b) {
  return proportion(data.tree(), a, b);
}

StratumStats stats_of(const StratumNode& node) {
  return StratumStats{node.count, node.weight, node.mean, node.sum_sq_dev};
}

StratumStats stratum_mean(const StratumTree& tree, const StratumKey& key) {
  const auto id = tree.find(key);
  if (!id || tree.node(*id).weight <= 0.0) {
    throw EstimabilityError("stratum " + tree.describe(key) + " is empty");
  }
  return stats_of(tree.node(*id));
}

StratumStats stratum_mean(const Dataset& data, const StratumKey& key) { return stratum_mean(data.tree(), key); }

bool variance_available(const StratumStats& stats, const VarianceMode& mode) {
  if (mode.kind == VarianceMode::Kind::known) return stats.count >= 1;
  return stats.count >= 2;
}

double stratum_mean_variance(const StratumStats& stats, const VarianceMode& mode) {
  const auto n = static_cast<double>(stats.count);
  if (mode.kind == VarianceMode::Kind::known) {
    if (stats.count < 1) throw EstimabilityError("variance of an empty stratum mean");
    return mode.sigma2 / n;
  }
  if (stats.count < 2) {
    throw EstimabilityError("estimated variance needs at least 2 records, stratum has " + std::to_string(stats.count));
  }
  return stats.sum_sq_dev / (n * (n - 1.0));
}

double stratum_mean_variance(const StratumTree& tree, const StratumKey& key, const VarianceMode& mode) {
  return stratum_mean_variance(stratum_mean(tree, key), mode);
}

}  // namespace netfx
