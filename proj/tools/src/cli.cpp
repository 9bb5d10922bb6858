#include "netfx_cli/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "netfx/constraints.hpp"
#include "netfx/dataset.hpp"
#include "netfx/diagnostics.hpp"
#include "netfx/dgp.hpp"
#include "netfx/errors.hpp"
#include "netfx/estimation.hpp"
#include "netfx/net_effects.hpp"
#include "netfx/pattern.hpp"
#include "netfx/point_params.hpp"
#include "netfx/report.hpp"
#include "netfx/simulator.hpp"
#include "netfx_cli/table_io.hpp"

namespace netfx::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 20240611;

struct Config {
  std::string data;
  std::string table;
  std::string fixture;
  std::string dgp;
  std::string pattern;
  std::string variance_mode = "estimated";
  bool markov = false;
  std::uint64_t seed = kDefaultSeed;
  std::size_t reps = 1000;
  double alpha = 0.05;
  std::string out;
  std::size_t n = 1000;
  std::string design = "random";
  std::string truth;
  std::string emit_pattern;
  unsigned threads = 0;
};

struct Input {
  std::optional<Dataset> data;
  std::optional<StratumTree> table;

  const StratumTree& tree() const { return data ? data->tree() : *table; }
};

Input load_input(const Config& cfg, bool allow_table, bool allow_dgp) {
  const int given = !cfg.data.empty() + !cfg.table.empty() + !cfg.fixture.empty() + (allow_dgp && !cfg.dgp.empty());
  if (given != 1) {
    std::string what = "--data, --fixture";
    if (allow_table) what += ", --table";
    if (allow_dgp) what += ", --dgp";
    throw UsageError("exactly one of " + what + " is required");
  }
  Input in;
  if (!cfg.data.empty()) {
    in.data.emplace(load_dataset_file(cfg.data));
  } else if (!cfg.fixture.empty()) {
    if (cfg.fixture != "d0") throw UsageError("unknown fixture '" + cfg.fixture + "' (available: d0)");
    in.data.emplace(make_fixture_d0());
  } else if (!cfg.table.empty()) {
    if (!allow_table) throw UsageError("--table is not accepted by this command");
    in.table.emplace(load_table_file(cfg.table));
  } else {
    in.table.emplace(population_table(DgpSpec::parse_file(cfg.dgp)));
  }
  return in;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError(path, 0, "cannot open output file");
  f << text;
  if (!f) throw ParseError(path, 0, "write failed");
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::statistical:
      return 2;
    case Error::Category::io_parse:
    case Error::Category::usage:
      return 1;
  }
  return 1;
}

int cmd_estimate(const Config& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.pattern.empty()) throw UsageError("estimate: --pattern is required ('saturated' for one parameter per net effect)");
  const auto input = load_input(cfg, true, false);
  const auto& tree = input.tree();
  const auto spec = cfg.pattern == "saturated" ? saturated_pattern(tree) : PatternSpec::parse_file(cfg.pattern);
  const auto mode = VarianceMode::parse(cfg.variance_mode);
  const auto scope = cfg.markov ? Scope::markov : Scope::full;
  const auto result = run_pipeline(tree, spec, scope, mode);
  for (const auto& w : result.constraints.warnings) err << "warning: " << w << "\n";
  if (!result.constraints.dropped.empty()) {
    err << "note: " << result.constraints.dropped.size() << " of " << result.constraints.candidates
        << " targets dropped (empty control arm)\n";
  }
  auto j = fit_report(result, tree.codec());
  // exact only for normal outcomes with one variance; an approximation otherwise
  j["caveat"] = "covariance assumes independent point-effect estimates (exact for normal outcomes with common variance)";
  if (tree.source() == StratumTree::Source::empirical) err << "note: " << j["caveat"].get<std::string>() << "\n";
  j["pattern"] = spec.to_text();
  j["variance_mode"] = mode.str();
  j["rank_check"] = to_json(constraint_rank_check(result.constraints.rows, spec.dimension(), true));
  write_text(cfg.out, dump_report(j), out);
  return 0;
}

int cmd_oracle(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto input = load_input(cfg, true, true);
  const auto& tree = input.tree();
  const auto partial = partial_net_effects(tree);
  if (!partial.missing.empty()) {
    std::vector<std::string> missing;
    for (const auto& [k, why] : partial.missing) missing.push_back(tree.describe(k) + ": " + why);
    err << "error: net effects are incomplete; missing terms:\n";
    for (const auto& m : missing) err << "  " << m << "\n";
    auto j = make_report("oracle");
    j["complete"] = false;
    j["missing"] = missing;
    j["net_effects"] = to_json(partial.table, tree.codec());
    write_text(cfg.out, dump_report(j), out);
    return 2;
  }
  auto j = make_report("oracle");
  j["complete"] = true;
  j["source"] = tree.source() == StratumTree::Source::exact ? "exact" : "empirical";
  j["net_effects"] = to_json(partial.table, tree.codec());
  j["point_params"] = to_json(extract_point_params(tree), tree.codec());
  write_text(cfg.out, dump_report(j), out);
  return 0;
}

int cmd_simulate(const Config& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.dgp.empty()) throw UsageError("simulate: --dgp is required");
  const auto dgp = DgpSpec::parse_file(cfg.dgp);
  const auto design = parse_design(cfg.design);
  const auto data = simulate(dgp, cfg.n, cfg.seed, design);
  std::ostringstream csv;
  write_dataset(csv, data);
  write_text(cfg.out, csv.str(), out);

  const CovariateCodec codec({2});
  auto truth = make_report("truth");
  truth["dgp"] = dgp.origin();
  truth["n"] = cfg.n;
  truth["seed"] = cfg.seed;
  truth["design"] = cfg.design;
  truth["confounded"] = dgp.confounded();
  truth["causal_net_effects"] = to_json(g_oracle(dgp), codec);
  truth["population_net_effects"] = to_json(exact_net_effects(population_table(dgp)), codec)["phi"];
  std::string truth_path = cfg.truth;
  if (truth_path.empty() && !cfg.out.empty() && cfg.out != "-") truth_path = cfg.out + ".truth.json";
  if (truth_path.empty()) {
    err << dump_report(truth);
  } else {
    write_text(truth_path, dump_report(truth), out);
  }
  return 0;
}

double pooled_within_variance(const Dataset& data) {
  const auto& tree = data.tree();
  double ss = 0.0;
  std::size_t leaves = 0;
  for (int id : tree.nodes_at_depth(tree.history_length())) {
    ss += tree.node(id).sum_sq_dev;
    ++leaves;
  }
  const double dof = static_cast<double>(data.size()) - static_cast<double>(leaves);
  if (dof < 1.0) throw EstimabilityError("cannot estimate the outcome variance: every record is alone in its history");
  return ss / dof;
}

int cmd_diagnose(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto input = load_input(cfg, true, true);
  const auto& tree = input.tree();
  auto j = make_report("diagnose");
  bool flagged = false;

  const auto decomposition = verify_decomposition(tree);
  j["decomposition"] = to_json(decomposition, tree.codec());
  if (decomposition.flagged()) {
    flagged = true;
    err << "flag: point effects disagree with their net-effect decomposition (max deviation "
        << decomposition.max_deviation << ")\n";
  }

  if (input.data) {
    const auto mode = VarianceMode::parse(cfg.variance_mode);
    const double sigma2 = mode.kind == VarianceMode::Kind::known ? mode.sigma2 : pooled_within_variance(*input.data);
    const auto indep = independence_diagnostic(*input.data, cfg.reps, cfg.seed, sigma2, cfg.markov ? Scope::markov : Scope::full,
                                               cfg.threads);
    for (const auto& w : indep.warnings) err << "warning: " << w << "\n";
    j["independence"] = to_json(indep, tree.codec());
    j["seed"] = cfg.seed;
    const auto cf = indep.covariance_flags();
    const auto vf = indep.variance_flags();
    err << "note: " << cf.flags << " of " << cf.checks << " covariances beyond 4 MC-SE (" << cf.expected
        << " expected by chance), " << vf.flags << " of " << vf.checks << " variances beyond 3 MC-SE (" << vf.expected
        << " expected)\n";
    if (indep.excess_flags()) {
      flagged = true;
      err << "flag: more Monte Carlo covariances or variances outside their bands than chance explains\n";
    }
  } else {
    j["independence"] = nullptr;
    err << "note: the Monte Carlo check needs unit records; only the decomposition was checked\n";
  }
  j["flagged"] = flagged;
  write_text(cfg.out, dump_report(j), out);
  return flagged ? 2 : 0;
}

int cmd_suggest(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto input = load_input(cfg, false, false);
  const auto& tree = input.tree();
  const auto spec = saturated_pattern(tree);
  const auto mode = VarianceMode::parse(cfg.variance_mode);
  const auto result = run_pipeline(tree, spec, cfg.markov ? Scope::markov : Scope::full, mode);
  const auto suggestion = pattern_discovery(result.fit, spec, cfg.alpha);
  auto j = make_report("suggest-pattern");
  j["saturated_fit"] = fit_report(result, tree.codec());
  j["suggestion"] = to_json(suggestion, spec.names());
  if (!cfg.emit_pattern.empty()) write_text(cfg.emit_pattern, suggestion.pattern.to_text(), out);
  err << "note: the suggested pattern is advisory; review it before fitting\n";
  write_text(cfg.out, dump_report(j), out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Net effects of treatment sequences from point effects"};
  app.name("netfx");
  app.require_subcommand(1);

  auto input_opts = [&](CLI::App* sub, bool table, bool dgp) {
    sub->add_option("--data", cfg.data, "CSV dataset");
    sub->add_option("--fixture", cfg.fixture, "built-in dataset (d0)");
    if (table) sub->add_option("--table", cfg.table, "exact standard-parameter table (JSON)");
    if (dgp) sub->add_option("--dgp", cfg.dgp, "data-generating process; uses its exact population table");
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "output path ('-' or absent: stdout)");
    sub->add_option("--variance-mode", cfg.variance_mode, "estimated | known | known:<sigma2>");
    sub->add_flag("--markov", cfg.markov, "collapse strata to (z_{t-1}, x_{t-1})");
    sub->add_option("--seed", cfg.seed, "random seed");
  };

  auto* estimate = app.add_subcommand("estimate", "fit a pattern of net effects");
  input_opts(estimate, true, false);
  common(estimate);
  estimate->add_option("--pattern", cfg.pattern, "pattern file, or 'saturated'");

  auto* oracle = app.add_subcommand("oracle", "exact net effects of a table by backward recursion");
  input_opts(oracle, true, true);
  oracle->add_option("--out", cfg.out, "output path");

  auto* sim = app.add_subcommand("simulate", "draw a dataset from a data-generating process");
  sim->add_option("--dgp", cfg.dgp, "DGP file")->required();
  sim->add_option("--n", cfg.n, "number of units")->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "random seed");
  sim->add_option("--design", cfg.design, "random | fixed");
  sim->add_option("--out", cfg.out, "CSV output path");
  sim->add_option("--truth", cfg.truth, "truth JSON path (default <out>.truth.json)");

  auto* diagnose = app.add_subcommand("diagnose", "Monte Carlo independence check and decomposition check");
  input_opts(diagnose, true, true);
  common(diagnose);
  diagnose->add_option("--reps", cfg.reps, "Monte Carlo replications");
  diagnose->add_option("--threads", cfg.threads, "worker threads (0: all cores)");

  auto* suggest = app.add_subcommand("suggest-pattern", "merge saturated net effects that do not differ");
  input_opts(suggest, false, false);
  common(suggest);
  suggest->add_option("--alpha", cfg.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  suggest->add_option("--emit-pattern", cfg.emit_pattern, "write the suggested pattern file here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << app.help();
    return 1;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(cfg, out, err);
    if (oracle->parsed()) return cmd_oracle(cfg, out, err);
    if (sim->parsed()) return cmd_simulate(cfg, out, err);
    if (diagnose->parsed()) return cmd_diagnose(cfg, out, err);
    if (suggest->parsed()) return cmd_suggest(cfg, out, err);
  } catch (const IdentifiabilityError& e) {
    err << "error: " << e.what() << "\n";
    err << "unidentified directions (null space of the weighted constraint matrix):\n";
    for (const auto& v : e.null_space()) {
      err << "  [";
      for (std::size_t i = 0; i < v.size(); ++i) err << (i ? ", " : "") << v[i];
      err << "]\n";
    }
    return 2;
  } catch (const IncompletenessError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& m : e.missing()) err << "  missing: " << m << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace netfx::cli
