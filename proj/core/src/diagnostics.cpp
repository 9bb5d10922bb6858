#include "netfx/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "netfx/errors.hpp"
#include "netfx/replication.hpp"

namespace netfx {

bool IndependenceReport::flagged() const {
  return std::any_of(covariances.begin(), covariances.end(), [](const auto& c) { return c.flagged; }) ||
         std::any_of(variances.begin(), variances.end(), [](const auto& v) { return v.flagged; });
}

namespace {

FlagCount count_flags(std::size_t checks, std::size_t flags, double band) {
  FlagCount out;
  out.checks = checks;
  out.flags = flags;
  out.rate = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), band));
  out.expected = out.rate * static_cast<double>(checks);
  if (flags > 0) {
    const boost::math::binomial dist(static_cast<double>(checks), out.rate);
    out.p_value = boost::math::cdf(boost::math::complement(dist, static_cast<double>(flags - 1)));
  }
  return out;
}

}  // namespace

FlagCount IndependenceReport::covariance_flags() const {
  const auto n = std::count_if(covariances.begin(), covariances.end(), [](const auto& c) { return c.flagged; });
  return count_flags(covariances.size(), static_cast<std::size_t>(n), 4.0);
}

FlagCount IndependenceReport::variance_flags() const {
  const auto n = std::count_if(variances.begin(), variances.end(), [](const auto& v) { return v.flagged; });
  return count_flags(variances.size(), static_cast<std::size_t>(n), 3.0);
}

bool IndependenceReport::excess_flags(double level) const {
  return covariance_flags().p_value < level || variance_flags().p_value < level;
}

namespace {

double sd_of(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

IndependenceReport independence_diagnostic(const Dataset& data, std::size_t reps, std::uint64_t seed, double sigma2,
                                           Scope scope, unsigned workers) {
  IndependenceReport report;
  report.reps = reps;
  report.sigma2 = sigma2;
  if (reps < 100) report.warnings.push_back("fewer than 100 replications; Monte Carlo errors are large");
  if (reps < 2) return report;

  const auto& tree = data.tree();
  std::vector<Target> targets;
  for (auto& t : enumerate_targets(tree, scope)) {
    if (t.estimable()) targets.push_back(std::move(t));
  }
  const std::size_t m = targets.size();
  if (m == 0) {
    report.warnings.push_back("no estimable point effect");
    return report;
  }

  const double sigma = std::sqrt(sigma2);
  std::vector<std::vector<double>> draws(reps, std::vector<double>(m));
  for_each_replication(reps, workers, [&](std::size_t rep) {
    auto rng = replication_rng(seed, rep);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<double> sum(tree.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int leaf = data.leaf_of(i);
      sum[static_cast<std::size_t>(leaf)] += tree.node(leaf).mean + sigma * eps(rng);
    }
    for (std::size_t id = tree.size(); id-- > 1;) sum[static_cast<std::size_t>(tree.node(static_cast<int>(id)).parent)] += sum[id];
    auto arm_mean = [&](const std::vector<int>& nodes) {
      double s = 0.0;
      double n = 0.0;
      for (int id : nodes) {
        s += sum[static_cast<std::size_t>(id)];
        n += static_cast<double>(tree.node(id).count);
      }
      return s / n;
    };
    for (std::size_t j = 0; j < m; ++j) draws[rep][j] = arm_mean(targets[j].active) - arm_mean(targets[j].control);
  });

  const double r = static_cast<double>(reps);
  std::vector<double> mean(m, 0.0);
  for (const auto& d : draws) {
    for (std::size_t j = 0; j < m; ++j) mean[j] += d[j];
  }
  for (double& v : mean) v /= r;

  std::vector<double> prod(reps);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      for (std::size_t k = 0; k < reps; ++k) prod[k] = (draws[k][a] - mean[a]) * (draws[k][b] - mean[b]);
      double cov = 0.0;
      for (double p : prod) cov += p;
      cov /= r - 1.0;
      const double se = sd_of(prod) / std::sqrt(r);
      if (a == b) {
        const auto ca = pooled_stats(tree, targets[a].active).count;
        const auto cc = pooled_stats(tree, targets[a].control).count;
        VarianceCheck v;
        v.key = targets[a].key;
        v.empirical = cov;
        v.expected = sigma2 * (1.0 / static_cast<double>(ca) + 1.0 / static_cast<double>(cc));
        v.mc_se = se;
        v.flagged = std::abs(v.empirical - v.expected) > 3.0 * se;
        report.variances.push_back(v);
      } else {
        CovarianceCheck c;
        c.a = targets[a].key;
        c.b = targets[b].key;
        c.covariance = cov;
        c.mc_se = se;
        c.flagged = std::abs(cov) > 4.0 * se;
        report.covariances.push_back(c);
      }
    }
  }
  return report;
}

namespace {

struct Cluster {
  std::vector<std::size_t> members;
  Eigen::VectorXd weights;  // full-length linear functional giving the GLS common value
};

Cluster make_cluster(std::vector<std::size_t> members, const Eigen::MatrixXd& cov) {
  const auto n = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sub(i, j) = cov(static_cast<Eigen::Index>(members[static_cast<std::size_t>(i)]),
                      static_cast<Eigen::Index>(members[static_cast<std::size_t>(j)]));
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw EstimabilityError("pattern discovery: covariance of the saturated fit is singular");
  }
  const Eigen::VectorXd s = ldlt.solve(Eigen::VectorXd::Ones(n));
  const double total = s.sum();
  if (!(total > 0.0)) throw EstimabilityError("pattern discovery: covariance of the saturated fit is singular");
  Cluster c;
  c.weights = Eigen::VectorXd::Zero(cov.rows());
  for (Eigen::Index i = 0; i < n; ++i) c.weights(static_cast<Eigen::Index>(members[static_cast<std::size_t>(i)])) = s(i) / total;
  c.members = std::move(members);
  return c;
}

PairwiseTest compare(const Cluster& a, const Cluster& b, std::size_t ia, std::size_t ib, const Eigen::VectorXd& phi,
                     const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd diff = a.weights - b.weights;
  const double var = diff.dot(cov * diff);
  if (!(var > 0.0)) throw EstimabilityError("pattern discovery: zero variance for a pairwise difference");
  PairwiseTest t;
  t.a = ia;
  t.b = ib;
  t.difference = diff.dot(phi);
  t.std_error = std::sqrt(var);
  t.z = t.difference / t.std_error;
  const boost::math::normal norm;
  t.p_value = 2.0 * boost::math::cdf(boost::math::complement(norm, std::abs(t.z)));
  return t;
}

}  // namespace

PatternSuggestion pattern_discovery(const NetEffectFit& saturated, const PatternSpec& saturated_spec, double alpha) {
  const auto k = static_cast<std::size_t>(saturated.phi_hat.size());
  if (saturated_spec.dimension() != static_cast<int>(k)) {
    throw UsageError("pattern discovery: spec dimension does not match the fit");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  for (const auto& f : saturated_spec.features()) {
    if (f.kind != PatternSpec::Feature::Kind::group || !f.expr) {
      throw UsageError("pattern discovery needs an indicator pattern with explicit predicates");
    }
  }
  const auto& cov = saturated.covariance;
  const auto& phi = saturated.phi_hat;

  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < k; ++i) clusters.push_back(make_cluster({i}, cov));

  PatternSuggestion out{saturated_spec, {}, {}, {}, {}, alpha};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) out.initial_tests.push_back(compare(clusters[i], clusters[j], i, j, phi, cov));
  }

  for (;;) {
    std::optional<PairwiseTest> best;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const auto t = compare(clusters[i], clusters[j], i, j, phi, cov);
        if (t.p_value < alpha) continue;
        if (!best || std::abs(t.z) < std::abs(best->z)) best = t;
      }
    }
    if (!best) break;
    out.merges.push_back(*best);
    auto members = clusters[best->a].members;
    members.insert(members.end(), clusters[best->b].members.begin(), clusters[best->b].members.end());
    std::sort(members.begin(), members.end());
    clusters[best->a] = make_cluster(std::move(members), cov);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best->b));
  }

  std::sort(clusters.begin(), clusters.end(), [](const auto& x, const auto& y) { return x.members[0] < y.members[0]; });
  std::vector<PatternSpec::Feature> features;
  const auto& sat = saturated_spec.features();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::string pred;
    for (std::size_t i : clusters[c].members) {
      if (!pred.empty()) pred += " or ";
      pred += "(" + sat[i].expr->text() + ")";
    }
    PatternSpec::Feature f;
    f.kind = PatternSpec::Feature::Kind::group;
    f.name = "varphi" + std::to_string(c + 1);
    f.expr = Expr::parse(pred);
    features.push_back(std::move(f));
    out.clusters.push_back(clusters[c].members);
    out.cluster_values.push_back(clusters[c].weights.dot(phi));
  }
  out.pattern = PatternSpec(std::move(features), false, "<suggested>");
  return out;
}

}  // namespace netfx
