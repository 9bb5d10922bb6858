#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// One unit: treatments z_1..z_T, covariate vectors x_1..x_{T-1}, outcome y.
struct ObservationRecord {
  std::string unit_id;
  std::vector<int> treatments;
  std::vector<std::vector<int>> covariates;
  double outcome = 0.0;
};

/// Immutable longitudinal dataset for one stationary-covariate subpopulation,
/// indexed by a prefix trie of its (z, x) histories.
class Dataset {
 public:
  /// Validates every record against `horizon` and `covariate_width` and builds
  /// the stratum index. Record order is preserved.
  Dataset(std::vector<ObservationRecord> records, int horizon, int covariate_width);

  std::size_t size() const noexcept { return records_.size(); }
  int horizon() const noexcept { return horizon_; }
  int covariate_width() const noexcept { return width_; }
  const std::vector<ObservationRecord>& records() const noexcept { return records_; }
  const ObservationRecord& record(std::size_t i) const { return records_.at(i); }

  /// Observed treatment levels at time t (1-based).
  const std::set<int>& treatment_levels(int t) const { return treatment_levels_.at(static_cast<std::size_t>(t - 1)); }
  /// Observed covariate vectors at time t (1-based, t < T).
  const std::set<std::vector<int>>& covariate_levels(int t) const {
    return covariate_levels_.at(static_cast<std::size_t>(t - 1));
  }

  const StratumTree& tree() const noexcept { return tree_; }
  const CovariateCodec& codec() const noexcept { return tree_.codec(); }

  /// Step path of record i (2T-1 symbols).
  StratumKey history_of(std::size_t i) const;
  /// Leaf node of record i in `tree()`.
  int leaf_of(std::size_t i) const { return leaf_of_.at(i); }

  /// Record indices (ascending) whose history prefix matches `key`. Absent
  /// strata yield an empty set.
  std::vector<std::size_t> stratum_members(const StratumKey& key) const;

  /// Builds a key from explicit treatments and covariate vectors. If
  /// `treatments.size() == covariates.size() + 1` the key ends with a
  /// treatment, if they are equal it ends with a covariate.
  StratumKey make_key(const std::vector<int>& treatments, const std::vector<std::vector<int>>& covariates) const;

 private:
  std::vector<ObservationRecord> records_;
  int horizon_;
  int width_;
  std::vector<std::set<int>> treatment_levels_;
  std::vector<std::set<std::vector<int>>> covariate_levels_;
  StratumTree tree_;
  std::vector<int> leaf_of_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Parses the CSV layout `unit_id,z1..zT,x1_1..x{T-1}_w,y`. For width 1 the
/// covariate columns may also be named `x1..x{T-1}`.
Dataset load_dataset(std::istream& in, const std::string& origin = "<stream>");
Dataset load_dataset_file(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const Dataset& data);

}  // namespace netfx
