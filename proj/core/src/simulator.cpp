#include "netfx/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include <boost/math/distributions/chi_squared.hpp>

#include "netfx/errors.hpp"
#include "netfx/net_effects.hpp"
#include "netfx/replication.hpp"

namespace netfx {
namespace {

bool bernoulli(std::mt19937_64& rng, double p) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

double prob_of(double p1, int value) { return value ? p1 : 1.0 - p1; }

StratumKey history_key(const std::vector<int>& z, const std::vector<std::vector<int>>& x) {
  StratumKey k;
  for (std::size_t t = 0; t < z.size(); ++t) {
    k.steps.push_back(z[t]);
    if (t < x.size()) k.steps.push_back(x[t][0]);
  }
  return k;
}

/// Visits every (history, u) with its probability.
void enumerate_paths(const DgpSpec& dgp,
                     const std::function<void(const std::vector<int>&, const std::vector<std::vector<int>>&, int, double)>& visit) {
  const int T = dgp.horizon();
  std::vector<int> z(static_cast<std::size_t>(T), 0);
  std::vector<std::vector<int>> x(static_cast<std::size_t>(std::max(T - 1, 0)), std::vector<int>{0});
  std::function<void(int, int, double)> step = [&](int t, int u, double p) {
    if (t > T) {
      visit(z, x, u, p);
      return;
    }
    const double pz = dgp.treat_prob(t, z, x, u);
    for (int zt = 0; zt <= 1; ++zt) {
      z[static_cast<std::size_t>(t - 1)] = zt;
      const double q = p * prob_of(pz, zt);
      if (t == T) {
        step(t + 1, u, q);
        continue;
      }
      const double px = dgp.cover_prob(t, z, x, u);
      for (int xt = 0; xt <= 1; ++xt) {
        x[static_cast<std::size_t>(t - 1)][0] = xt;
        step(t + 1, u, q * prob_of(px, xt));
      }
      x[static_cast<std::size_t>(t - 1)][0] = 0;
    }
    z[static_cast<std::size_t>(t - 1)] = 0;
  };
  if (dgp.has_latent()) {
    step(1, 0, 1.0 - dgp.latent_p());
    step(1, 1, dgp.latent_p());
  } else {
    step(1, 0, 1.0);
  }
}

Dataset make_dataset(std::vector<ObservationRecord> records, int horizon) {
  return Dataset(std::move(records), horizon, 1);
}

std::string unit_name(std::size_t i) { return "u" + std::to_string(i + 1); }

}  // namespace

DesignMode parse_design(const std::string& text) {
  if (text == "random") return DesignMode::random;
  if (text == "fixed") return DesignMode::fixed;
  throw UsageError("design must be 'random' or 'fixed', got '" + text + "'");
}

std::map<StratumKey, std::size_t> fixed_design_counts(const DgpSpec& dgp, std::size_t n) {
  std::map<StratumKey, double> prob;
  enumerate_paths(dgp, [&](const auto& z, const auto& x, int, double p) { prob[history_key(z, x)] += p; });
  std::map<StratumKey, std::size_t> counts;
  std::vector<std::pair<double, StratumKey>> remainders;
  std::size_t assigned = 0;
  for (const auto& [k, p] : prob) {
    const double exact = static_cast<double>(n) * p;
    const auto base = static_cast<std::size_t>(std::floor(exact + 1e-9));
    counts[k] = base;
    assigned += base;
    remainders.emplace_back(exact - static_cast<double>(base), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i, ++assigned) ++counts[remainders[i].second];
  return counts;
}

Dataset simulate(const DgpSpec& dgp, std::size_t n, std::mt19937_64& rng, DesignMode design) {
  if (n == 0) throw UsageError("simulate: n must be at least 1");
  const int T = dgp.horizon();
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<ObservationRecord> records;
  records.reserve(n);

  if (design == DesignMode::random) {
    std::vector<int> z(static_cast<std::size_t>(T));
    std::vector<std::vector<int>> x(static_cast<std::size_t>(T - 1), std::vector<int>{0});
    for (std::size_t i = 0; i < n; ++i) {
      const int u = dgp.has_latent() && bernoulli(rng, dgp.latent_p()) ? 1 : 0;
      std::fill(z.begin(), z.end(), 0);
      for (auto& v : x) v[0] = 0;
      for (int t = 1; t <= T; ++t) {
        z[static_cast<std::size_t>(t - 1)] = bernoulli(rng, dgp.treat_prob(t, z, x, u)) ? 1 : 0;
        if (t < T) x[static_cast<std::size_t>(t - 1)][0] = bernoulli(rng, dgp.cover_prob(t, z, x, u)) ? 1 : 0;
      }
      const double y = dgp.mean(z, x, u) + dgp.sigma() * eps(rng);
      records.push_back({unit_name(i), z, x, y});
    }
    return make_dataset(std::move(records), T);
  }

  // fixed design: per history, u from its posterior, then the outcome
  std::map<StratumKey, std::pair<double, double>> joint;  // history -> (pr(h, u=0), pr(h, u=1))
  enumerate_paths(dgp, [&](const auto& z, const auto& x, int u, double p) {
    auto& slot = joint[history_key(z, x)];
    (u ? slot.second : slot.first) += p;
  });
  const auto counts = fixed_design_counts(dgp, n);
  for (const auto& [key, count] : counts) {
    std::vector<int> z;
    std::vector<std::vector<int>> x;
    for (std::size_t s = 0; s < key.steps.size(); ++s) {
      if (s % 2 == 0) z.push_back(key.steps[s]);
      else x.push_back({key.steps[s]});
    }
    const auto& [p0, p1] = joint.at(key);
    const double post1 = p1 / (p0 + p1);
    for (std::size_t j = 0; j < count; ++j) {
      const int u = dgp.has_latent() && bernoulli(rng, post1) ? 1 : 0;
      const double y = dgp.mean(z, x, u) + dgp.sigma() * eps(rng);
      records.push_back({unit_name(records.size()), z, x, y});
    }
  }
  return make_dataset(std::move(records), T);
}

Dataset simulate(const DgpSpec& dgp, std::size_t n, std::uint64_t seed, DesignMode design) {
  auto rng = replication_rng(seed, 0);
  return simulate(dgp, n, rng, design);
}

StratumTree population_table(const DgpSpec& dgp) {
  std::map<StratumKey, std::pair<double, double>> acc;  // weight, weight * mean
  enumerate_paths(dgp, [&](const auto& z, const auto& x, int u, double p) {
    auto& slot = acc[history_key(z, x)];
    slot.first += p;
    slot.second += p * dgp.mean(z, x, u);
  });
  std::vector<HistoryEntry> entries;
  entries.reserve(acc.size());
  for (const auto& [k, v] : acc) entries.push_back({k, v.first, v.second / v.first});
  return StratumTree::from_histories(dgp.horizon(), CovariateCodec({2}), entries);
}

CausalOracleResult g_oracle(const DgpSpec& dgp) {
  const int T = dgp.horizon();
  CausalOracleResult out;
  std::vector<int> z(static_cast<std::size_t>(T), 0);
  std::vector<std::vector<int>> x(static_cast<std::size_t>(std::max(T - 1, 0)), std::vector<int>{0});
  const std::vector<int> us = dgp.has_latent() ? std::vector<int>{0, 1} : std::vector<int>{0};

  // E{y | do(z_t..z_T), u} with z fixed from t on and covariates x_t.. drawn under the intervention
  std::function<double(int, int)> future = [&](int s, int u) -> double {
    if (s >= T) return dgp.mean(z, x, u);
    const double px = dgp.cover_prob(s, z, x, u);
    double acc = 0.0;
    for (int xs = 0; xs <= 1; ++xs) {
      x[static_cast<std::size_t>(s - 1)][0] = xs;
      acc += prob_of(px, xs) * future(s + 1, u);
    }
    x[static_cast<std::size_t>(s - 1)][0] = 0;
    return acc;
  };

  // walk prefixes (z_1..z_{t-1}, x_1..x_{t-1}) carrying pr(prefix, u) per u
  std::function<void(int, std::vector<double>)> walk = [&](int t, std::vector<double> joint) {
    double total = 0.0;
    for (double p : joint) total += p;
    if (total <= 0.0) return;
    double contrast = 0.0;
    for (std::size_t iu = 0; iu < us.size(); ++iu) {
      if (joint[iu] <= 0.0) continue;
      for (int s = t; s <= T; ++s) z[static_cast<std::size_t>(s - 1)] = 0;
      z[static_cast<std::size_t>(t - 1)] = 1;
      const double active = future(t, us[iu]);
      z[static_cast<std::size_t>(t - 1)] = 0;
      const double control = future(t, us[iu]);
      contrast += joint[iu] / total * (active - control);
    }
    StratumKey key;
    for (int s = 1; s < t; ++s) {
      key.steps.push_back(z[static_cast<std::size_t>(s - 1)]);
      key.steps.push_back(x[static_cast<std::size_t>(s - 1)][0]);
    }
    key.steps.push_back(1);
    out.effects[key] = contrast;
    if (t == T) return;
    for (int zt = 0; zt <= 1; ++zt) {
      for (int xt = 0; xt <= 1; ++xt) {
        std::vector<double> next(us.size());
        for (std::size_t iu = 0; iu < us.size(); ++iu) {
          for (int s = t; s <= T; ++s) z[static_cast<std::size_t>(s - 1)] = 0;
          const double pz = dgp.treat_prob(t, z, x, us[iu]);
          z[static_cast<std::size_t>(t - 1)] = zt;
          const double px = dgp.cover_prob(t, z, x, us[iu]);
          next[iu] = joint[iu] * prob_of(pz, zt) * prob_of(px, xt);
        }
        z[static_cast<std::size_t>(t - 1)] = zt;
        x[static_cast<std::size_t>(t - 1)][0] = xt;
        walk(t + 1, next);
        for (int s = t; s <= T; ++s) z[static_cast<std::size_t>(s - 1)] = 0;
        x[static_cast<std::size_t>(t - 1)][0] = 0;
      }
    }
  };
  std::vector<double> prior = dgp.has_latent() ? std::vector<double>{1.0 - dgp.latent_p(), dgp.latent_p()}
                                               : std::vector<double>{1.0};
  walk(1, prior);
  return out;
}

bool EquivalenceReport::flagged() const {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.flagged; });
}

EquivalenceReport equivalence_experiment(const DgpSpec& dgp, std::size_t n, std::size_t reps, std::uint64_t seed,
                                         unsigned workers) {
  EquivalenceReport report;
  report.n = n;
  report.reps = reps;
  report.confounded = dgp.confounded();
  const auto oracle = g_oracle(dgp);
  const auto population = partial_net_effects(population_table(dgp)).table.phi;

  std::vector<StratumKey> keys;
  for (const auto& [k, v] : oracle.effects) keys.push_back(k);
  std::vector<std::vector<double>> est(reps, std::vector<double>(keys.size(), std::nan("")));
  for_each_replication(reps, workers, [&](std::size_t rep) {
    auto rng = replication_rng(seed, rep);
    const auto data = simulate(dgp, n, rng, DesignMode::random);
    const auto phi = partial_net_effects(data.tree()).table.phi;
    for (std::size_t j = 0; j < keys.size(); ++j) {
      if (auto it = phi.find(keys[j]); it != phi.end()) est[rep][j] = it->second;
    }
  });

  for (std::size_t j = 0; j < keys.size(); ++j) {
    EquivalenceEntry e;
    e.key = keys[j];
    e.oracle = oracle.effects.at(keys[j]);
    if (auto it = population.find(keys[j]); it != population.end()) {
      e.population = it->second;
      report.max_population_gap = std::max(report.max_population_gap, std::abs(e.population - e.oracle));
    }
    std::vector<double> d;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!std::isnan(est[r][j])) d.push_back(est[r][j]);
    }
    e.available = d.size();
    if (d.size() >= 2) {
      double mean = 0.0;
      for (double v : d) mean += v;
      mean /= static_cast<double>(d.size());
      double ss = 0.0;
      for (double v : d) ss += (v - mean) * (v - mean);
      e.mean_estimate = mean;
      e.bias = mean - e.oracle;
      e.mc_se = std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
      if (e.mc_se > 0.0) {
        report.max_abs_bias_z = std::max(report.max_abs_bias_z, std::abs(e.bias) / e.mc_se);
        e.flagged = std::abs(e.bias) > 4.0 * e.mc_se;
      } else {
        e.flagged = std::abs(e.bias) > 1e-9;
      }
    }
    report.entries.push_back(e);
  }
  return report;
}

EqualityTest standard_parameter_equality_test(const StratumTree& tree, double sigma2) {
  if (tree.source() != StratumTree::Source::empirical) throw UsageError("the equality test needs record counts");
  // leaves grouped by their covariate path
  std::map<std::vector<int>, std::vector<int>> groups;
  for (int id : tree.nodes_at_depth(tree.history_length())) {
    const auto key = tree.key_of(id);
    std::vector<int> xs;
    for (std::size_t s = 1; s < key.steps.size(); s += 2) xs.push_back(key.steps[s]);
    groups[xs].push_back(id);
  }
  EqualityTest out;
  for (const auto& [xs, ids] : groups) {
    double sw = 0.0;
    double swm = 0.0;
    for (int id : ids) {
      const double w = static_cast<double>(tree.node(id).count) / sigma2;
      sw += w;
      swm += w * tree.node(id).mean;
    }
    const double center = swm / sw;
    for (int id : ids) {
      const double w = static_cast<double>(tree.node(id).count) / sigma2;
      out.statistic += w * (tree.node(id).mean - center) * (tree.node(id).mean - center);
    }
    out.df += static_cast<int>(ids.size()) - 1;
  }
  if (out.df > 0) {
    const boost::math::chi_squared dist(out.df);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  }
  return out;
}

MotivationReport motivation_experiment(const DgpSpec& dgp, const PatternSpec& pattern, std::size_t n,
                                       std::size_t reps, double alpha, std::uint64_t seed, DesignMode design,
                                       unsigned workers) {
  MotivationReport report;
  report.n = n;
  report.reps = reps;
  report.alpha = alpha;
  report.mc_se_nominal = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
  const double sigma2 = dgp.sigma() * dgp.sigma();
  const auto mode = VarianceMode::known(sigma2);
  std::vector<int> wrong(reps, 0), correct(reps, 0), wrong_df(reps, 0), correct_df(reps, 0);
  for_each_replication(reps, workers, [&](std::size_t rep) {
    auto rng = replication_rng(seed, rep);
    const auto data = simulate(dgp, n, rng, design);
    const auto eq = standard_parameter_equality_test(data.tree(), sigma2);
    wrong[rep] = eq.p_value < alpha;
    wrong_df[rep] = eq.df;
    const auto fit = run_pipeline(data.tree(), pattern, Scope::full, mode).fit;
    const auto w = wald_test(fit);
    correct[rep] = w.p_value < alpha;
    correct_df[rep] = w.df;
  });
  for (std::size_t r = 0; r < reps; ++r) {
    report.wrong_rejection_rate += wrong[r];
    report.correct_rejection_rate += correct[r];
  }
  report.wrong_rejection_rate /= static_cast<double>(reps);
  report.correct_rejection_rate /= static_cast<double>(reps);
  if (reps > 0) {
    report.wrong_df = wrong_df[0];
    report.correct_df = correct_df[0];
  }
  return report;
}

Dataset make_fixture_d0() {
  struct Leaf {
    int z1, x1, z2, count;
    double mean;
  };
  const Leaf leaves[] = {{0, 0, 0, 30, 100}, {0, 0, 1, 20, 120}, {0, 1, 0, 20, 110}, {0, 1, 1, 10, 130},
                         {1, 0, 0, 10, 130}, {1, 0, 1, 20, 150}, {1, 1, 0, 10, 136}, {1, 1, 1, 40, 116}};
  std::vector<ObservationRecord> records;
  for (const auto& leaf : leaves) {
    for (int j = 0; j < leaf.count; ++j) {
      char id[16];
      std::snprintf(id, sizeof id, "d0-%03zu", records.size() + 1);
      records.push_back({id, {leaf.z1, leaf.z2}, {{leaf.x1}}, leaf.mean + (j % 2 == 0 ? 5.0 : -5.0)});
    }
  }
  return Dataset(std::move(records), 2, 1);
}

}  // namespace netfx
