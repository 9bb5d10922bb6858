#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netfx/expr.hpp"

namespace netfx {

/// Data-generating process over binary treatments and binary scalar
/// covariates. See docs/dgp_grammar.md for the file format.
///
/// The outcome mean of a unit is
///   baseline + sum_t effect_t * z_t + sum_{t<T} kappa_t * (x_t - pr(x_t = 1 | past))
///            + extra + latent_delta * u,
/// so with `extra` absent the causal net effect of z_t = 1 equals effect_t.
class DgpSpec {
 public:
  struct Rule {
    std::optional<Expr> when;  // empty for `otherwise`
    double value = 0.0;
    std::size_t line = 0;
  };

  static DgpSpec parse(std::istream& in, const std::string& origin = "<dgp>");
  static DgpSpec parse_text(std::string_view text, const std::string& origin = "<dgp>");
  static DgpSpec parse_file(const std::filesystem::path& path);

  int horizon() const noexcept { return horizon_; }
  double sigma() const noexcept { return sigma_; }
  double baseline() const noexcept { return baseline_; }
  bool has_latent() const noexcept { return latent_p_.has_value(); }
  double latent_p() const noexcept { return latent_p_.value_or(0.0); }
  double latent_delta() const noexcept { return latent_delta_; }
  /// Whether treatment assignment may depend on the latent variable.
  bool confounded() const noexcept { return treat_uses_latent_; }
  const std::string& origin() const noexcept { return origin_; }

  void set_sigma(double sigma);

  /// pr(z_t = 1 | z_1..z_{t-1}, x_1..x_{t-1}, u). `z` and `x` may be longer
  /// than needed; only the visible prefix is read.
  double treat_prob(int t, std::span<const int> z, std::span<const std::vector<int>> x, int u) const;
  /// pr(x_t = 1 | z_1..z_t, x_1..x_{t-1}, u), t < T.
  double cover_prob(int t, std::span<const int> z, std::span<const std::vector<int>> x, int u) const;
  double effect(int t, std::span<const int> z, std::span<const std::vector<int>> x) const;
  double kappa(int t, std::span<const int> z, std::span<const std::vector<int>> x) const;
  /// Outcome mean of a complete history (z has T entries, x has T-1).
  double mean(std::span<const int> z, std::span<const std::vector<int>> x, int u) const;

 private:
  DgpSpec() = default;
  double lookup(const std::vector<Rule>& rules, const ExprContext& ctx, const char* what, bool required) const;

  int horizon_ = 0;
  double sigma_ = 1.0;
  double baseline_ = 0.0;
  std::optional<double> latent_p_;
  double latent_delta_ = 0.0;
  bool treat_uses_latent_ = false;
  std::vector<Rule> treat_, cover_, effect_, kappa_;
  std::optional<Expr> extra_;
  std::string origin_;
};

}  // namespace netfx
