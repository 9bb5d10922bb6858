#include "netfx/report.hpp"

#include <cmath>

namespace netfx {
namespace {

using nlohmann::json;

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json target_json(const TargetKey& key, const CovariateCodec& codec) {
  return {{"label", describe(key, codec)}, {"time", key.time}, {"scope", to_string(key.scope)}};
}

json dropped_json(const std::vector<DroppedTarget>& dropped, const CovariateCodec& codec) {
  auto arr = json::array();
  for (const auto& d : dropped) {
    auto j = target_json(d.target, codec);
    j["reason"] = d.reason;
    arr.push_back(std::move(j));
  }
  return arr;
}

json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json make_report(const std::string& kind) { return {{"schema_version", kSchemaVersion}, {"kind", kind}}; }

json to_json(const PointEffectSet& set, const CovariateCodec& codec) {
  auto est = json::array();
  for (const auto& e : set.estimates) {
    auto j = target_json(e.key, codec);
    j["value"] = number(e.value);
    j["variance"] = number(e.variance);
    j["count_active"] = e.count_active;
    j["count_control"] = e.count_control;
    est.push_back(std::move(j));
  }
  return {{"estimates", est}, {"skipped", dropped_json(set.skipped, codec)}};
}

json to_json(const ConstraintSet& set, const CovariateCodec& codec) {
  auto rows = json::array();
  for (const auto& r : set.rows) {
    auto j = target_json(r.target, codec);
    j["coefficients"] = r.coefficients;
    j["weight"] = number(r.weight);
    rows.push_back(std::move(j));
  }
  return {{"k", set.k},
          {"scope", to_string(set.scope)},
          {"candidates", set.candidates},
          {"rows", rows},
          {"dropped", dropped_json(set.dropped, codec)},
          {"warnings", set.warnings}};
}

json to_json(const RankReport& report) {
  return {{"rank", report.rank}, {"k", report.k}, {"rows", report.rows}, {"deficient", report.deficient()},
          {"null_space", report.null_space}};
}

json fit_report(const PipelineResult& result, const CovariateCodec& codec) {
  const auto& fit = result.fit;
  auto phi = json::array();
  for (Eigen::Index i = 0; i < fit.phi_hat.size(); ++i) {
    phi.push_back({{"name", i < static_cast<Eigen::Index>(fit.names.size()) ? fit.names[static_cast<std::size_t>(i)] : std::to_string(i + 1)},
                   {"value", number(fit.phi_hat(i))},
                   {"variance", number(fit.covariance(i, i))},
                   {"std_error", number(std::sqrt(fit.covariance(i, i)))}});
  }
  auto fitted = json::array();
  for (const auto& f : result.fitted) {
    fitted.push_back({{"key", format_key(f.key, codec)}, {"value", number(f.value)}, {"std_error", number(f.std_error)}});
  }
  auto residuals = json::array();
  for (const auto& r : fit.residuals) {
    auto j = target_json(r.target, codec);
    j["observed"] = number(r.observed);
    j["fitted"] = number(r.fitted);
    j["standardized"] = number(r.standardized);
    residuals.push_back(std::move(j));
  }
  auto j = make_report("fit");
  j["phi_hat"] = phi;
  j["covariance"] = matrix_json(fit.covariance);
  j["fitted_net_effects"] = fitted;
  j["residuals"] = residuals;
  j["dropped_targets"] = dropped_json(fit.dropped, codec);
  j["skipped_estimates"] = dropped_json(result.estimates.skipped, codec);
  j["rank"] = fit.rank;
  j["rows_used"] = fit.rows_used;
  j["scope"] = to_string(result.constraints.scope);
  j["warnings"] = result.constraints.warnings;
  return j;
}

namespace {

json to_json(const FlagCount& f) {
  return {{"checks", f.checks}, {"flags", f.flags}, {"expected_by_chance", number(f.expected)},
          {"p_value", number(f.p_value)}};
}

// above this many pairs only the flagged ones are listed
constexpr std::size_t kMaxListedPairs = 10000;

}  // namespace

json to_json(const IndependenceReport& report, const CovariateCodec& codec) {
  auto cov = json::array();
  const bool all_pairs = report.covariances.size() <= kMaxListedPairs;
  for (const auto& c : report.covariances) {
    if (!all_pairs && !c.flagged) continue;
    cov.push_back({{"a", describe(c.a, codec)},
                   {"b", describe(c.b, codec)},
                   {"covariance", number(c.covariance)},
                   {"mc_se", number(c.mc_se)},
                   {"flagged", c.flagged}});
  }
  auto var = json::array();
  for (const auto& v : report.variances) {
    var.push_back({{"key", describe(v.key, codec)},
                   {"empirical", number(v.empirical)},
                   {"expected", number(v.expected)},
                   {"mc_se", number(v.mc_se)},
                   {"flagged", v.flagged}});
  }
  return {{"reps", report.reps},
          {"sigma2", report.sigma2},
          {"covariances", cov},
          {"covariances_listed", all_pairs ? "all" : "flagged"},
          {"covariance_flags", to_json(report.covariance_flags())},
          {"variances", var},
          {"variance_flags", to_json(report.variance_flags())},
          {"warnings", report.warnings},
          {"any_flag", report.flagged()},
          {"flagged", report.excess_flags()}};
}

json to_json(const PatternSuggestion& s, const std::vector<std::string>& saturated_names) {
  auto test_json = [](const PairwiseTest& t, const json& a, const json& b) {
    return json{{"a", a},
                {"b", b},
                {"difference", number(t.difference)},
                {"std_error", number(t.std_error)},
                {"z", number(t.z)},
                {"p_value", number(t.p_value)}};
  };
  auto initial = json::array();
  for (const auto& t : s.initial_tests) initial.push_back(test_json(t, saturated_names.at(t.a), saturated_names.at(t.b)));
  auto merges = json::array();
  for (const auto& t : s.merges) merges.push_back(test_json(t, t.a, t.b));
  auto groups = json::array();
  const auto names = s.pattern.names();
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    auto members = json::array();
    for (auto i : s.clusters[c]) members.push_back(saturated_names.at(i));
    groups.push_back({{"name", names.at(c)}, {"members", members}, {"value", number(s.cluster_values[c])}});
  }
  return {{"alpha", s.alpha},         {"pairwise_tests", initial},     {"merges", merges},
          {"groups", groups},         {"pattern", s.pattern.to_text()}, {"advisory", true}};
}

json to_json(const CausalOracleResult& oracle, const CovariateCodec& codec) {
  auto arr = json::array();
  for (const auto& [k, v] : oracle.effects) arr.push_back({{"key", format_key(k, codec)}, {"value", number(v)}});
  return arr;
}

json to_json(const EquivalenceReport& report, const CovariateCodec& codec) {
  auto entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"key", format_key(e.key, codec)},
                       {"oracle", number(e.oracle)},
                       {"population", number(e.population)},
                       {"mean_estimate", number(e.mean_estimate)},
                       {"bias", number(e.bias)},
                       {"mc_se", number(e.mc_se)},
                       {"available", e.available},
                       {"flagged", e.flagged}});
  }
  return {{"n", report.n},
          {"reps", report.reps},
          {"confounded", report.confounded},
          {"entries", entries},
          {"max_population_gap", number(report.max_population_gap)},
          {"max_abs_bias_z", number(report.max_abs_bias_z)},
          {"flagged", report.flagged()}};
}

json to_json(const MotivationReport& r) {
  return {{"n", r.n},
          {"reps", r.reps},
          {"alpha", r.alpha},
          {"standard_parameter_test", {{"rejection_rate", r.wrong_rejection_rate}, {"df", r.wrong_df}}},
          {"point_effect_test", {{"rejection_rate", r.correct_rejection_rate}, {"df", r.correct_df}}},
          {"mc_se_nominal", r.mc_se_nominal}};
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

}  // namespace netfx
