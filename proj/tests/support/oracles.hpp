#pragma once

// Brute-force reference computations used by the tests. They work on plain
// maps of full histories and share no code with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "netfx/stratum_tree.hpp"

namespace oracle {

using Path = std::vector<int>;  // interleaved z1, x1, z2, ...

struct Table {
  int horizon = 0;
  std::map<Path, std::pair<double, double>> leaves;  // history -> (weight, mean)
};

inline bool has_prefix(const Path& p, const Path& prefix) {
  if (prefix.size() > p.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (p[i] != prefix[i]) return false;
  }
  return true;
}

inline double weight(const Table& t, const Path& prefix) {
  double w = 0.0;
  for (const auto& [p, v] : t.leaves) {
    if (has_prefix(p, prefix)) w += v.first;
  }
  return w;
}

inline double mean(const Table& t, const Path& prefix) {
  double w = 0.0, s = 0.0;
  for (const auto& [p, v] : t.leaves) {
    if (has_prefix(p, prefix)) {
      w += v.first;
      s += v.first * v.second;
    }
  }
  return s / w;
}

/// All distinct prefixes of the given length present in the table.
inline std::vector<Path> prefixes(const Table& t, std::size_t len) {
  std::map<Path, int> seen;
  for (const auto& [p, v] : t.leaves) seen[Path(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(len))] = 1;
  std::vector<Path> out;
  for (const auto& [p, v] : seen) out.push_back(p);
  return out;
}

/// Net effects by direct recursion over the definition; keys end with z_t = 1.
/// Binary treatments only.
class NetEffects {
 public:
  explicit NetEffects(const Table& t) : t_(t) {}

  double phi(const Path& key) {  // key ends with z_t = 1
    if (auto it = phi_.find(key); it != phi_.end()) return it->second;
    Path control = key;
    control.back() = 0;
    const double v = nu(key) - nu(control);
    phi_[key] = v;
    return v;
  }

  double nu(const Path& key) {  // key ends with any z_t
    const int t = static_cast<int>(key.size() + 1) / 2;
    double v = mean(t_, key);
    const double w = weight(t_, key);
    for (int s = t + 1; s <= t_.horizon; ++s) {
      for (const auto& d : prefixes(t_, static_cast<std::size_t>(2 * s - 1))) {
        if (d.back() != 1 || !has_prefix(d, key)) continue;
        v -= phi(d) * weight(t_, d) / w;
      }
    }
    return v;
  }

 private:
  const Table& t_;
  std::map<Path, double> phi_;
};

inline Table random_table(int horizon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> m(-50.0, 50.0);
  Table t;
  t.horizon = horizon;
  const int len = 2 * horizon - 1;
  for (int code = 0; code < (1 << len); ++code) {
    Path p(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) p[static_cast<std::size_t>(i)] = (code >> (len - 1 - i)) & 1;
    t.leaves[p] = {w(rng), m(rng)};
  }
  return t;
}

inline netfx::StratumTree to_tree(const Table& t) {
  std::vector<netfx::HistoryEntry> entries;
  for (const auto& [p, v] : t.leaves) entries.push_back({netfx::StratumKey{p}, v.first, v.second});
  return netfx::StratumTree::from_histories(t.horizon, netfx::CovariateCodec({2}), entries);
}

}  // namespace oracle
