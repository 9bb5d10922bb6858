#include "netfx_cli/table_io.hpp"

#include <fstream>

#include "netfx/errors.hpp"

namespace netfx::cli {
namespace {

StratumKey key_from(const nlohmann::json& entry, const CovariateCodec& codec, const std::string& origin) {
  const auto z = entry.at("z").get<std::vector<int>>();
  std::vector<std::vector<int>> x;
  if (entry.contains("x")) {
    for (const auto& v : entry.at("x")) x.push_back(v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()});
  }
  if (!(x.size() == z.size() || x.size() + 1 == z.size())) {
    throw ParseError(origin, 0, "entry needs as many covariates as treatments, or one fewer");
  }
  StratumKey key;
  for (std::size_t t = 0; t < z.size(); ++t) {
    if (z[t] < 0) throw DomainError(origin + ": negative treatment code");
    key.steps.push_back(z[t]);
    if (t < x.size()) key.steps.push_back(codec.encode(x[t]));
  }
  return key;
}

}  // namespace

StratumTree load_table(std::istream& in, const std::string& origin) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin, 0, e.what());
  }
  try {
    const int horizon = j.at("horizon").get<int>();
    if (horizon < 1) throw DomainError(origin + ": horizon must be at least 1");
    std::vector<int> radices{2};
    if (j.contains("covariate_radices")) radices = j.at("covariate_radices").get<std::vector<int>>();
    const CovariateCodec codec(radices);
    std::vector<HistoryEntry> entries;
    for (const auto& e : j.at("histories")) {
      auto key = key_from(e, codec, origin);
      if (static_cast<int>(key.size()) != 2 * horizon - 1) throw ParseError(origin, 0, "history of wrong length");
      entries.push_back({std::move(key), e.at("weight").get<double>(), e.at("mean").get<double>()});
    }
    auto tree = StratumTree::from_histories(horizon, codec, entries);
    if (j.contains("overrides")) {
      for (const auto& o : j.at("overrides")) tree.set_mean(key_from(o, codec, origin), o.at("mean").get<double>());
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin, 0, e.what());
  }
}

StratumTree load_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open table file");
  return load_table(in, path.string());
}

nlohmann::json table_to_json(const StratumTree& tree) {
  auto histories = nlohmann::json::array();
  const auto& codec = tree.codec();
  for (int id : tree.nodes_at_depth(tree.history_length())) {
    const auto key = tree.key_of(id);
    std::vector<int> z;
    std::vector<std::vector<int>> x;
    for (std::size_t s = 0; s < key.steps.size(); ++s) {
      if (s % 2 == 0) z.push_back(key.steps[s]);
      else x.push_back(codec.decode(key.steps[s]));
    }
    histories.push_back({{"z", z}, {"x", x}, {"weight", tree.node(id).weight}, {"mean", tree.node(id).mean}});
  }
  return {{"horizon", tree.horizon()}, {"covariate_radices", codec.radices()}, {"histories", histories}};
}

}  // namespace netfx::cli
