#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netfx/errors.hpp"

namespace netfx {

/// Variables an expression can see: the stratum time `t`, the horizon `T`,
/// treatments z[1..z_limit], covariate vectors x[1..x_limit] and, in
/// data-generating specs, the latent confounder `u`.
///
/// Indices below 1 evaluate to 0 (empty ranges are omitted); indices beyond
/// the limits are an evaluation error.
struct ExprContext {
  int t = 0;
  int horizon = 0;
  std::span<const int> z;
  std::span<const std::vector<int>> x;
  int z_limit = 0;
  int x_limit = 0;
  std::optional<int> u;
};

class ExprSyntaxError : public UsageError {
 public:
  ExprSyntaxError(const std::string& what, std::size_t column) : UsageError(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class ExprEvalError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Arithmetic/boolean expression over t, T, z[s], x[s], x[s][i] and u.
/// Booleans are 0/1 reals.
class Expr {
 public:
  struct Options {
    bool allow_latent = false;
  };

  static Expr parse(std::string_view source, Options options);
  static Expr parse(std::string_view source) { return parse(source, Options{}); }

  double eval(const ExprContext& ctx) const;
  bool test(const ExprContext& ctx) const { return eval(ctx) != 0.0; }
  const std::string& text() const noexcept { return text_; }

 private:
  enum class Op {
    number, time, horizon, latent, treat, cov, cov_component,
    neg, lnot, add, sub, mul, div, eq, ne, lt, le, gt, ge, land, lor
  };
  struct Node {
    Op op;
    double value = 0.0;
    int a = -1;
    int b = -1;
    int c = -1;
  };
  friend class ExprParser;

  double eval_node(int id, const ExprContext& ctx) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;
};

}  // namespace netfx
