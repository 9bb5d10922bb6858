#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netfx/expr.hpp"
#include "netfx/stratum_key.hpp"
#include "netfx/stratum_tree.hpp"

namespace netfx {

/// A linear pattern of net effects: phi(stratum) = feature(stratum) . varphi.
///
/// Each `group` contributes an indicator feature (1 on the strata it claims),
/// each `term` a real-valued feature evaluated on every stratum. Features are
/// ordered as declared. See docs/pattern_grammar.md for the file format.
class PatternSpec {
 public:
  struct Feature {
    enum class Kind { group, term };
    Kind kind = Kind::group;
    std::string name;
    std::optional<Expr> expr;  // predicate (group) or value (term); empty for `otherwise`
    std::size_t line = 0;
  };

  static PatternSpec parse(std::istream& in, const std::string& origin = "<pattern>");
  static PatternSpec parse_text(std::string_view text, const std::string& origin = "<pattern>");
  static PatternSpec parse_file(const std::filesystem::path& path);

  /// Builds a spec programmatically; validated like a parsed file.
  PatternSpec(std::vector<Feature> features, bool first_match, std::string origin = "<pattern>");

  int dimension() const noexcept { return static_cast<int>(features_.size()); }
  const std::vector<Feature>& features() const noexcept { return features_; }
  std::vector<std::string> names() const;
  bool first_match() const noexcept { return first_match_; }
  const std::string& origin() const noexcept { return origin_; }

  /// Feature row of the stratum `key` (which must end with an active
  /// treatment z_t). Throws CoverageError when no group claims a stratum of a
  /// grouped pattern or a term cannot be evaluated, AmbiguityError when
  /// several groups claim it without `match first`.
  std::vector<double> feature_row(const StratumKey& key, int horizon, const CovariateCodec& codec) const;

  /// Canonical text form; parses back to an equivalent spec.
  std::string to_text() const;

 private:
  std::vector<Feature> features_;
  bool first_match_ = false;
  std::string origin_;
  bool has_groups_ = false;
};

/// Expression context for the stratum `key` ending with z_t.
struct StratumContext {
  std::vector<int> z;
  std::vector<std::vector<int>> x;
  ExprContext ctx;

  StratumContext(const StratumKey& key, int horizon, const CovariateCodec& codec);
  StratumContext(const StratumContext&) = delete;
  StratumContext& operator=(const StratumContext&) = delete;
};

/// Predicate text selecting exactly the stratum `key`.
std::string stratum_predicate(const StratumKey& key, const CovariateCodec& codec);

/// One group per active-treatment stratum present in `tree`, ordered by time
/// then stratum: the saturated pattern (every net effect its own parameter).
PatternSpec saturated_pattern(const StratumTree& tree);

}  // namespace netfx
