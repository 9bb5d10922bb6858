#include "netfx/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace netfx {

class ExprParser {
 public:
  ExprParser(std::string_view src, Expr::Options options, Expr& out) : src_(src), options_(options), out_(out) {}

  void run() {
    out_.root_ = parse_or();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
  }

 private:
  using Op = Expr::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprSyntaxError(msg + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(src_) + "'", pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) != tok) return false;
    // Keywords must not run into an identifier character.
    if (std::isalpha(static_cast<unsigned char>(tok.front()))) {
      const auto end = pos_ + tok.size();
      if (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) return false;
    }
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  int add(Op op, int a = -1, int b = -1, int c = -1, double value = 0.0) {
    out_.nodes_.push_back(Expr::Node{op, value, a, b, c});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_or() {
    int lhs = parse_and();
    while (eat("or")) lhs = add(Op::lor, lhs, parse_and());
    return lhs;
  }

  int parse_and() {
    int lhs = parse_not();
    while (eat("and")) lhs = add(Op::land, lhs, parse_not());
    return lhs;
  }

  int parse_not() {
    if (eat("not")) return add(Op::lnot, parse_not());
    return parse_cmp();
  }

  int parse_cmp() {
    int lhs = parse_sum();
    static constexpr std::pair<std::string_view, Op> ops[] = {
        {"==", Op::eq}, {"!=", Op::ne}, {"<=", Op::le}, {">=", Op::ge}, {"<", Op::lt}, {">", Op::gt}};
    for (const auto& [tok, op] : ops) {
      if (eat(tok)) return add(op, lhs, parse_sum());
    }
    return lhs;
  }

  int parse_sum() {
    int lhs = parse_prod();
    while (true) {
      if (eat("+")) {
        lhs = add(Op::add, lhs, parse_prod());
      } else if (eat("-")) {
        lhs = add(Op::sub, lhs, parse_prod());
      } else {
        return lhs;
      }
    }
  }

  int parse_prod() {
    int lhs = parse_unary();
    while (true) {
      if (eat("*")) {
        lhs = add(Op::mul, lhs, parse_unary());
      } else if (eat("/")) {
        lhs = add(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (eat("-")) return add(Op::neg, parse_unary());
    return parse_primary();
  }

  int parse_index() {
    expect("[");
    int id = parse_or();
    expect("]");
    return id;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char ch = src_[pos_];
    if (ch == '(') {
      ++pos_;
      int id = parse_or();
      expect(")");
      return id;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
      if (ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(ptr - src_.data());
      return add(Op::number, -1, -1, -1, v);
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      const auto start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const auto ident = src_.substr(start, pos_ - start);
      if (ident == "t") return add(Op::time);
      if (ident == "T") return add(Op::horizon);
      if (ident == "true") return add(Op::number, -1, -1, -1, 1.0);
      if (ident == "false") return add(Op::number, -1, -1, -1, 0.0);
      if (ident == "u") {
        if (!options_.allow_latent) {
          pos_ = start;
          fail("unknown identifier 'u'");
        }
        return add(Op::latent);
      }
      if (ident == "z") return add(Op::treat, parse_index());
      if (ident == "x") {
        const int s = parse_index();
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '[') return add(Op::cov_component, s, parse_index());
        return add(Op::cov, s);
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(ident) + "'");
    }
    fail("unexpected '" + std::string(1, ch) + "'");
  }

  std::string_view src_;
  Expr::Options options_;
  Expr& out_;
  std::size_t pos_ = 0;
};

Expr Expr::parse(std::string_view source, Options options) {
  Expr e;
  e.text_ = std::string(source);
  ExprParser(e.text_, options, e).run();
  return e;
}

double Expr::eval(const ExprContext& ctx) const { return eval_node(root_, ctx); }

namespace {

int as_index(double v, const char* what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) throw ExprEvalError(std::string(what) + " index must be an integer");
  return static_cast<int>(r);
}

}  // namespace

double Expr::eval_node(int id, const ExprContext& ctx) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  switch (n.op) {
    case Op::number:
      return n.value;
    case Op::time:
      return ctx.t;
    case Op::horizon:
      return ctx.horizon;
    case Op::latent:
      if (!ctx.u) throw ExprEvalError("latent u is not defined here");
      return *ctx.u;
    case Op::treat: {
      const int s = as_index(eval_node(n.a, ctx), "z");
      if (s < 1) return 0.0;
      if (s > ctx.z_limit) {
        throw ExprEvalError("z[" + std::to_string(s) + "] is not observed at t=" + std::to_string(ctx.t));
      }
      return ctx.z[static_cast<std::size_t>(s - 1)];
    }
    case Op::cov:
    case Op::cov_component: {
      const int s = as_index(eval_node(n.a, ctx), "x");
      if (s < 1) return 0.0;
      if (s > ctx.x_limit) {
        throw ExprEvalError("x[" + std::to_string(s) + "] is not observed at t=" + std::to_string(ctx.t));
      }
      const auto& vec = ctx.x[static_cast<std::size_t>(s - 1)];
      int comp = 1;
      if (n.op == Op::cov_component) {
        comp = as_index(eval_node(n.b, ctx), "covariate component");
      } else if (vec.size() != 1) {
        throw ExprEvalError("x[s] needs a component index when covariates have width " + std::to_string(vec.size()));
      }
      if (comp < 1 || comp > static_cast<int>(vec.size())) {
        throw ExprEvalError("covariate component " + std::to_string(comp) + " out of range");
      }
      return vec[static_cast<std::size_t>(comp - 1)];
    }
    case Op::neg:
      return -eval_node(n.a, ctx);
    case Op::lnot:
      return eval_node(n.a, ctx) == 0.0 ? 1.0 : 0.0;
    case Op::add:
      return eval_node(n.a, ctx) + eval_node(n.b, ctx);
    case Op::sub:
      return eval_node(n.a, ctx) - eval_node(n.b, ctx);
    case Op::mul:
      return eval_node(n.a, ctx) * eval_node(n.b, ctx);
    case Op::div: {
      const double d = eval_node(n.b, ctx);
      if (d == 0.0) throw ExprEvalError("division by zero in '" + text_ + "'");
      return eval_node(n.a, ctx) / d;
    }
    case Op::eq:
      return eval_node(n.a, ctx) == eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::ne:
      return eval_node(n.a, ctx) != eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::lt:
      return eval_node(n.a, ctx) < eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::le:
      return eval_node(n.a, ctx) <= eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::gt:
      return eval_node(n.a, ctx) > eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::ge:
      return eval_node(n.a, ctx) >= eval_node(n.b, ctx) ? 1.0 : 0.0;
    case Op::land:
      return (eval_node(n.a, ctx) != 0.0 && eval_node(n.b, ctx) != 0.0) ? 1.0 : 0.0;
    case Op::lor:
      return (eval_node(n.a, ctx) != 0.0 || eval_node(n.b, ctx) != 0.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace netfx
