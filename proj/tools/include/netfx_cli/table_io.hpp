#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "netfx/stratum_tree.hpp"

namespace netfx::cli {

/// Exact standard-parameter table from JSON:
///   {"horizon": T, "covariate_radices": [2],
///    "histories": [{"z": [..], "x": [[..], ..], "weight": w, "mean": m}, ..],
///    "overrides": [{"z": [..], "x": [[..]], "mean": m}, ..]}
/// Overrides replace the stated mean of one stratum without touching the
/// others.
StratumTree load_table(std::istream& in, const std::string& origin);
StratumTree load_table_file(const std::filesystem::path& path);

nlohmann::json table_to_json(const StratumTree& tree);

}  // namespace netfx::cli
