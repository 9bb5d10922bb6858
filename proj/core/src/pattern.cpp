#include "netfx/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace netfx {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.substr(0, word.size()) == word &&
         (s.size() == word.size() || std::isspace(static_cast<unsigned char>(s[word.size()])));
}

}  // namespace

StratumContext::StratumContext(const StratumKey& key, int horizon, const CovariateCodec& codec) {
  const int t = key.time();
  for (int s = 1; s <= t; ++s) z.push_back(key.treatment(s));
  const int xs = static_cast<int>(key.size()) / 2;
  for (int s = 1; s <= xs; ++s) x.push_back(codec.decode(key.covariate(s)));
  ctx.t = t;
  ctx.horizon = horizon;
  ctx.z = z;
  ctx.x = x;
  ctx.z_limit = static_cast<int>(z.size());
  ctx.x_limit = static_cast<int>(x.size());
}

PatternSpec::PatternSpec(std::vector<Feature> features, bool first_match, std::string origin)
    : features_(std::move(features)), first_match_(first_match), origin_(std::move(origin)) {
  if (features_.empty()) throw ParseError(origin_, 0, "pattern declares no parameters");
  std::set<std::string> seen;
  int otherwise = 0;
  for (const auto& f : features_) {
    if (f.name.empty()) throw ParseError(origin_, f.line, "parameter name is empty");
    if (!seen.insert(f.name).second) throw ParseError(origin_, f.line, "duplicate parameter name '" + f.name + "'");
    if (f.kind == Feature::Kind::group) {
      has_groups_ = true;
      if (!f.expr) ++otherwise;
    } else if (!f.expr) {
      throw ParseError(origin_, f.line, "term '" + f.name + "' has no expression");
    }
  }
  if (otherwise > 1) throw ParseError(origin_, 0, "more than one 'otherwise' group");
}

PatternSpec PatternSpec::parse(std::istream& in, const std::string& origin) {
  std::vector<Feature> features;
  bool first_match = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line == "match first") {
      first_match = true;
      continue;
    }
    Feature f;
    f.line = line_no;
    std::string rest;
    if (starts_with_word(line, "group")) {
      f.kind = Feature::Kind::group;
      rest = line.substr(5);
    } else if (starts_with_word(line, "term")) {
      f.kind = Feature::Kind::term;
      rest = line.substr(4);
    } else {
      throw ParseError(origin, line_no, "expected 'group', 'term' or 'match first'");
    }
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ParseError(origin, line_no, "missing ':' after parameter name");
    f.name = trim(std::string_view(rest).substr(0, colon));
    if (f.name.empty() || f.name.find_first_of(" \t") != std::string::npos) {
      throw ParseError(origin, line_no, "parameter name must be a single non-empty word");
    }
    std::string body = trim(std::string_view(rest).substr(colon + 1));
    try {
      if (f.kind == Feature::Kind::group) {
        if (body == "otherwise") {
          // catch-all
        } else if (starts_with_word(body, "when")) {
          f.expr = Expr::parse(trim(std::string_view(body).substr(4)));
        } else {
          throw ParseError(origin, line_no, "group body must be 'when <predicate>' or 'otherwise'");
        }
      } else {
        if (body.empty()) throw ParseError(origin, line_no, "term needs an expression");
        f.expr = Expr::parse(body);
      }
    } catch (const ExprSyntaxError& e) {
      throw ParseError(origin, line_no, e.what());
    }
    features.push_back(std::move(f));
  }
  return PatternSpec(std::move(features), first_match, origin);
}

PatternSpec PatternSpec::parse_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  return parse(in, origin);
}

PatternSpec PatternSpec::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open pattern file");
  return parse(in, path.string());
}

std::vector<std::string> PatternSpec::names() const {
  std::vector<std::string> out;
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

std::vector<double> PatternSpec::feature_row(const StratumKey& key, int horizon, const CovariateCodec& codec) const {
  if (key.empty() || !key.ends_with_treatment()) {
    throw UsageError("pattern features are defined on strata ending with a treatment");
  }
  const StratumContext sc(key, horizon, codec);
  std::vector<double> row(features_.size(), 0.0);
  int claimed = -1;
  int fallback = -1;
  try {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const auto& f = features_[i];
      if (f.kind == Feature::Kind::term) {
        row[i] = f.expr->eval(sc.ctx);
        if (!std::isfinite(row[i])) {
          throw CoverageError("term '" + f.name + "' is not finite on stratum " + format_key(key, codec));
        }
        continue;
      }
      if (!f.expr) {
        fallback = static_cast<int>(i);
        continue;
      }
      if (!f.expr->test(sc.ctx)) continue;
      if (claimed < 0) {
        claimed = static_cast<int>(i);
        row[i] = 1.0;
      } else if (!first_match_) {
        throw AmbiguityError("stratum " + format_key(key, codec) + " matches groups '" +
                             features_[static_cast<std::size_t>(claimed)].name + "' and '" + f.name +
                             "'; add 'match first' to resolve by order");
      }
    }
  } catch (const ExprEvalError& e) {
    throw CoverageError("pattern " + origin_ + " cannot be evaluated on stratum " + format_key(key, codec) + ": " +
                        e.what());
  }
  if (claimed < 0 && fallback >= 0) row[static_cast<std::size_t>(fallback)] = 1.0;
  if (has_groups_ && claimed < 0 && fallback < 0) {
    throw CoverageError("no group of pattern " + origin_ + " covers stratum " + format_key(key, codec));
  }
  return row;
}

std::string PatternSpec::to_text() const {
  std::string out;
  if (first_match_) out += "match first\n";
  for (const auto& f : features_) {
    if (f.kind == Feature::Kind::group) {
      out += "group " + f.name + ": " + (f.expr ? "when " + f.expr->text() : std::string("otherwise")) + "\n";
    } else {
      out += "term " + f.name + ": " + f.expr->text() + "\n";
    }
  }
  return out;
}

std::string stratum_predicate(const StratumKey& key, const CovariateCodec& codec) {
  std::string out = "t == " + std::to_string(key.time());
  for (std::size_t i = 0; i < key.steps.size(); ++i) {
    const int s = static_cast<int>(i / 2) + 1;
    if (i % 2 == 0) {
      out += " and z[" + std::to_string(s) + "] == " + std::to_string(key.steps[i]);
    } else if (codec.width() == 1) {
      out += " and x[" + std::to_string(s) + "] == " + std::to_string(key.steps[i]);
    } else {
      const auto comps = codec.decode(key.steps[i]);
      for (std::size_t c = 0; c < comps.size(); ++c) {
        out += " and x[" + std::to_string(s) + "][" + std::to_string(c + 1) + "] == " + std::to_string(comps[c]);
      }
    }
  }
  return out;
}

PatternSpec saturated_pattern(const StratumTree& tree) {
  std::vector<PatternSpec::Feature> features;
  for (int d = 1; d <= tree.history_length(); d += 2) {
    std::vector<StratumKey> keys;
    for (int id : tree.nodes_at_depth(d)) {
      if (tree.node(id).symbol != 0) keys.push_back(tree.key_of(id));
    }
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
      PatternSpec::Feature f;
      f.kind = PatternSpec::Feature::Kind::group;
      f.name = "phi[" + tree.describe(k) + "]";
      f.expr = Expr::parse(stratum_predicate(k, tree.codec()));
      features.push_back(std::move(f));
    }
  }
  return PatternSpec(std::move(features), false, "<saturated>");
}

}  // namespace netfx
