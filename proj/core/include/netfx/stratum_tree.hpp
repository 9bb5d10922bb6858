#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netfx/stratum_key.hpp"

namespace netfx {

struct StratumNode {
  int symbol = 0;
  int parent = -1;
  int depth = 0;
  std::vector<int> children;  // sorted by symbol
  double weight = 0.0;        // record count (empirical) or probability mass (exact)
  double mean = 0.0;          // stated outcome mean of the stratum
  double sum_sq_dev = 0.0;    // sum of squared deviations from `mean` (empirical only)
  std::int64_t count = 0;     // number of records (0 in exact tables)
};

/// One full history of an exact standard-parameter table.
struct HistoryEntry {
  StratumKey history;  // 2T-1 steps
  double weight = 0.0;
  double mean = 0.0;
};

/// Prefix trie over interleaved (z, x) steps. Only observed (or, for exact
/// tables, supplied) strata exist as nodes; absent strata are implicit.
///
/// The same structure backs empirical tables built from a Dataset and exact
/// standard-parameter tables, so every downstream computation runs one code
/// path over both.
class StratumTree {
 public:
  enum class Source { empirical, exact };

  StratumTree(int horizon, CovariateCodec codec, Source source);

  /// Exact table from full-history entries. Internal stratum means are the
  /// weight-averaged leaf means. Entries with non-positive weight are ignored;
  /// duplicate histories are an error.
  static StratumTree from_histories(int horizon, CovariateCodec codec, std::span<const HistoryEntry> entries);

  int horizon() const noexcept { return horizon_; }
  int history_length() const noexcept { return 2 * horizon_ - 1; }
  const CovariateCodec& codec() const noexcept { return codec_; }
  Source source() const noexcept { return source_; }

  std::size_t size() const noexcept { return nodes_.size(); }
  static constexpr int root() noexcept { return 0; }
  const StratumNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::optional<int> child(int id, int symbol) const;
  std::optional<int> find(const StratumKey& key) const;
  StratumKey key_of(int id) const;
  bool is_leaf(int id) const { return node(id).depth == history_length(); }
  const std::vector<int>& nodes_at_depth(int depth) const;

  std::string describe(const StratumKey& key) const { return format_key(key, codec_); }
  std::string describe(int id) const { return describe(key_of(id)); }

  /// Overrides the stated mean of one stratum, leaving all other strata
  /// untouched. Used to inject inconsistencies when exercising diagnostics.
  void set_mean(const StratumKey& key, double mean);

  // Construction interface used by Dataset.
  int insert_path(std::span<const int> steps);
  StratumNode& mutable_node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
  void finalize();

 private:
  int horizon_;
  CovariateCodec codec_;
  Source source_;
  std::vector<StratumNode> nodes_;
  std::vector<std::vector<int>> by_depth_;
};

}  // namespace netfx
