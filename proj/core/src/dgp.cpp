#include "netfx/dgp.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "netfx/errors.hpp"

namespace netfx {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string fail(const std::string& origin, std::size_t line, const std::string& msg) {
  return origin + ":" + std::to_string(line) + ": " + msg;
}

double number(const std::string& token, const std::string& origin, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(v)) throw SpecError(fail(origin, line, "expected a number, got '" + token + "'"));
  return v;
}

struct Line {
  std::size_t no;
  std::string keyword;
  std::string rest;
};

}  // namespace

DgpSpec DgpSpec::parse(std::istream& in, const std::string& origin) {
  std::vector<Line> lines;
  std::string raw;
  std::size_t no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto sp = line.find_first_of(" \t");
    lines.push_back({no, line.substr(0, sp), sp == std::string::npos ? std::string() : trim(line.substr(sp))});
  }

  DgpSpec spec;
  spec.origin_ = origin;
  for (const auto& l : lines) {
    if (l.keyword == "latent") {
      std::istringstream ss(l.rest);
      std::string p, d, extra;
      ss >> p >> d;
      if (p.empty() || d.empty() || (ss >> extra)) throw SpecError(fail(origin, l.no, "usage: latent <p_u> <delta>"));
      const double pu = number(p, origin, l.no);
      if (!(pu > 0.0 && pu < 1.0)) throw SpecError(fail(origin, l.no, "latent probability must lie in (0,1)"));
      if (spec.latent_p_) throw SpecError(fail(origin, l.no, "latent declared twice"));
      spec.latent_p_ = pu;
      spec.latent_delta_ = number(d, origin, l.no);
    }
  }

  bool have_horizon = false;
  for (const auto& l : lines) {
    const auto& kw = l.keyword;
    if (kw == "latent") continue;
    if (kw == "horizon") {
      const double h = number(l.rest, origin, l.no);
      if (h < 1 || h != std::floor(h) || h > 30) throw SpecError(fail(origin, l.no, "horizon must be an integer in [1, 30]"));
      spec.horizon_ = static_cast<int>(h);
      have_horizon = true;
    } else if (kw == "sigma") {
      spec.sigma_ = number(l.rest, origin, l.no);
      if (spec.sigma_ < 0.0) throw SpecError(fail(origin, l.no, "sigma must be non-negative"));
    } else if (kw == "baseline") {
      spec.baseline_ = number(l.rest, origin, l.no);
    } else if (kw == "extra") {
      try {
        spec.extra_ = Expr::parse(l.rest);
      } catch (const ExprSyntaxError& e) {
        throw SpecError(fail(origin, l.no, e.what()));
      }
    } else if (kw == "treat" || kw == "cover" || kw == "effect" || kw == "kappa") {
      std::string value = l.rest;
      std::string body;
      if (const auto sp = l.rest.find_first_of(" \t"); sp != std::string::npos) {
        value = l.rest.substr(0, sp);
        body = trim(l.rest.substr(sp));
      }
      Rule rule;
      rule.line = l.no;
      rule.value = number(value, origin, l.no);
      const bool probability = kw == "treat" || kw == "cover";
      if (probability && !(rule.value > 0.0 && rule.value < 1.0)) {
        throw SpecError(fail(origin, l.no, kw + " probability must lie strictly between 0 and 1"));
      }
      if (body == "otherwise") {
        // catch-all
      } else if (body.rfind("when", 0) == 0 && (body.size() == 4 || std::isspace(static_cast<unsigned char>(body[4])))) {
        Expr::Options opt;
        opt.allow_latent = probability && spec.latent_p_.has_value();
        try {
          rule.when = Expr::parse(trim(std::string_view(body).substr(4)), opt);
        } catch (const ExprSyntaxError& e) {
          throw SpecError(fail(origin, l.no, e.what()));
        }
        if (kw == "treat" && opt.allow_latent) {
          try {
            (void)Expr::parse(rule.when->text());
          } catch (const ExprSyntaxError&) {
            spec.treat_uses_latent_ = true;  // only `u` separates the two parses
          }
        }
      } else {
        throw SpecError(fail(origin, l.no, kw + " needs 'when <predicate>' or 'otherwise'"));
      }
      auto& list = kw == "treat" ? spec.treat_ : kw == "cover" ? spec.cover_ : kw == "effect" ? spec.effect_ : spec.kappa_;
      list.push_back(std::move(rule));
    } else {
      throw SpecError(fail(origin, l.no, "unknown directive '" + kw + "'"));
    }
  }
  if (!have_horizon) throw SpecError(origin + ": missing 'horizon'");
  if (spec.treat_.empty()) throw SpecError(origin + ": no 'treat' rule");
  if (spec.horizon_ > 1 && spec.cover_.empty()) throw SpecError(origin + ": no 'cover' rule");
  return spec;
}

DgpSpec DgpSpec::parse_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  return parse(in, origin);
}

DgpSpec DgpSpec::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open DGP file");
  return parse(in, path.string());
}

void DgpSpec::set_sigma(double sigma) {
  if (!(sigma >= 0.0)) throw SpecError("sigma must be non-negative");
  sigma_ = sigma;
}

double DgpSpec::lookup(const std::vector<Rule>& rules, const ExprContext& ctx, const char* what, bool required) const {
  try {
    for (const auto& r : rules) {
      if (!r.when || r.when->test(ctx)) return r.value;
    }
  } catch (const ExprEvalError& e) {
    throw SpecError(origin_ + ": " + what + " rule at t=" + std::to_string(ctx.t) + ": " + e.what());
  }
  if (required) {
    std::string hist;
    for (int s = 1; s <= ctx.z_limit; ++s) hist += " z" + std::to_string(s) + "=" + std::to_string(ctx.z[static_cast<std::size_t>(s - 1)]);
    for (int s = 1; s <= ctx.x_limit; ++s) hist += " x" + std::to_string(s) + "=" + std::to_string(ctx.x[static_cast<std::size_t>(s - 1)].at(0));
    throw SpecError(origin_ + ": no " + what + " rule matches t=" + std::to_string(ctx.t) + hist);
  }
  return 0.0;
}

namespace {

ExprContext context(int t, int horizon, std::span<const int> z, std::span<const std::vector<int>> x, int z_limit,
                    int x_limit, std::optional<int> u) {
  ExprContext ctx;
  ctx.t = t;
  ctx.horizon = horizon;
  ctx.z = z;
  ctx.x = x;
  ctx.z_limit = z_limit;
  ctx.x_limit = x_limit;
  ctx.u = u;
  return ctx;
}

}  // namespace

double DgpSpec::treat_prob(int t, std::span<const int> z, std::span<const std::vector<int>> x, int u) const {
  const auto ctx = context(t, horizon_, z, x, t - 1, t - 1, has_latent() ? std::optional<int>(u) : std::nullopt);
  return lookup(treat_, ctx, "treat", true);
}

double DgpSpec::cover_prob(int t, std::span<const int> z, std::span<const std::vector<int>> x, int u) const {
  const auto ctx = context(t, horizon_, z, x, t, t - 1, has_latent() ? std::optional<int>(u) : std::nullopt);
  return lookup(cover_, ctx, "cover", true);
}

double DgpSpec::effect(int t, std::span<const int> z, std::span<const std::vector<int>> x) const {
  return lookup(effect_, context(t, horizon_, z, x, t, t - 1, std::nullopt), "effect", false);
}

double DgpSpec::kappa(int t, std::span<const int> z, std::span<const std::vector<int>> x) const {
  return lookup(kappa_, context(t, horizon_, z, x, t, t - 1, std::nullopt), "kappa", false);
}

double DgpSpec::mean(std::span<const int> z, std::span<const std::vector<int>> x, int u) const {
  double m = baseline_ + latent_delta_ * u;
  for (int t = 1; t <= horizon_; ++t) {
    if (z[static_cast<std::size_t>(t - 1)] != 0) m += effect(t, z, x);
    if (t < horizon_) {
      const double k = kappa(t, z, x);
      if (k != 0.0) m += k * (x[static_cast<std::size_t>(t - 1)].at(0) - cover_prob(t, z, x, u));
    }
  }
  if (extra_) {
    try {
      m += extra_->eval(context(horizon_, horizon_, z, x, horizon_, horizon_ - 1, std::nullopt));
    } catch (const ExprEvalError& e) {
      throw SpecError(origin_ + ": extra: " + e.what());
    }
  }
  return m;
}

}  // namespace netfx
