#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "netfx/constraints.hpp"
#include "netfx/diagnostics.hpp"
#include "netfx/estimation.hpp"
#include "netfx/simulator.hpp"

namespace netfx {

inline constexpr int kSchemaVersion = 1;

/// Top-level report object: {"schema_version", "kind", ...}.
nlohmann::json make_report(const std::string& kind);

nlohmann::json to_json(const PointEffectSet& set, const CovariateCodec& codec);
nlohmann::json to_json(const ConstraintSet& set, const CovariateCodec& codec);
nlohmann::json to_json(const RankReport& report);

/// {phi_hat, covariance, fitted_net_effects, residuals, dropped_targets, rank, ...}
nlohmann::json fit_report(const PipelineResult& result, const CovariateCodec& codec);

nlohmann::json to_json(const IndependenceReport& report, const CovariateCodec& codec);
nlohmann::json to_json(const PatternSuggestion& suggestion, const std::vector<std::string>& saturated_names);
nlohmann::json to_json(const CausalOracleResult& oracle, const CovariateCodec& codec);
nlohmann::json to_json(const EquivalenceReport& report, const CovariateCodec& codec);
nlohmann::json to_json(const MotivationReport& report);

/// Deterministic text form (2-space indent, trailing newline).
std::string dump_report(const nlohmann::json& j);

}  // namespace netfx
