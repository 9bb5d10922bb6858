#include "netfx/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "netfx/errors.hpp"

namespace netfx {

PointEffectSet estimate_point_effects(const StratumTree& tree, Scope scope, const VarianceMode& mode) {
  PointEffectSet out;
  const bool exact = tree.source() == StratumTree::Source::exact;
  for (const auto& target : enumerate_targets(tree, scope)) {
    if (target.control.empty()) {
      out.skipped.push_back({target.key, "control arm z" + std::to_string(target.key.time) + "=0 is empty"});
      continue;
    }
    const auto a = pooled_stats(tree, target.active);
    const auto c = pooled_stats(tree, target.control);
    PointEffectEstimate e;
    e.key = target.key;
    e.value = a.mean - c.mean;
    e.count_active = a.count;
    e.count_control = c.count;
    if (!exact) {
      if (!variance_available(a, mode) || !variance_available(c, mode)) {
        out.skipped.push_back({target.key, "an arm has fewer than 2 records (variance not estimable)"});
        continue;
      }
      e.variance = stratum_mean_variance(a, mode) + stratum_mean_variance(c, mode);
    }
    out.estimates.push_back(std::move(e));
  }
  return out;
}

PointEffectSet estimate_point_effects(const Dataset& data, const VarianceMode& mode) {
  return estimate_point_effects(data.tree(), Scope::full, mode);
}

NetEffectFit wls_fit(const ConstraintSet& rows, const std::vector<PointEffectEstimate>& estimates) {
  std::map<TargetKey, const PointEffectEstimate*> by_key;
  for (const auto& e : estimates) by_key[e.key] = &e;

  std::vector<const ConstraintRow*> used;
  std::vector<double> observed;
  for (const auto& r : rows.rows) {
    if (!(r.weight > 0.0)) continue;
    if (r.coefficients.size() != static_cast<std::size_t>(rows.k)) {
      throw UsageError("constraint row has " + std::to_string(r.coefficients.size()) + " coefficients, expected " +
                       std::to_string(rows.k));
    }
    auto it = by_key.find(r.target);
    if (it == by_key.end()) {
      throw UsageError("constraint row for target at t=" + std::to_string(r.target.time) +
                       " has no matching point-effect estimate");
    }
    used.push_back(&r);
    observed.push_back(it->second->value);
  }

  const auto m = static_cast<Eigen::Index>(used.size());
  const Eigen::Index k = rows.k;
  Eigen::MatrixXd a(m, k);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = std::sqrt(used[static_cast<std::size_t>(i)]->weight);
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = s * used[static_cast<std::size_t>(i)]->coefficients[static_cast<std::size_t>(j)];
    b(i) = s * observed[static_cast<std::size_t>(i)];
  }

  NetEffectFit fit;
  fit.dropped = rows.dropped;
  fit.rows_used = used.size();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  fit.rank = m == 0 ? 0 : static_cast<int>(qr.rank());
  if (fit.rank < k) {
    std::vector<ConstraintRow> weighted;
    for (const auto* r : used) weighted.push_back(*r);
    auto report = constraint_rank_check(weighted, rows.k);
    throw IdentifiabilityError("net-effect vector is not identified: rank " + std::to_string(fit.rank) + " < k = " +
                                   std::to_string(k) + " from " + std::to_string(m) + " weighted rows",
                               fit.rank, std::move(report.null_space));
  }
  fit.phi_hat = qr.solve(b);

  // (A^T A)^{-1} = P R^{-1} R^{-T} P^T
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = rinv * rinv.transpose();
  const auto& perm = qr.colsPermutation();
  fit.covariance = perm * inner * perm.transpose();
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());

  for (Eigen::Index i = 0; i < m; ++i) {
    const auto* row = used[static_cast<std::size_t>(i)];
    Residual res;
    res.target = row->target;
    res.observed = observed[static_cast<std::size_t>(i)];
    res.fitted = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) res.fitted += row->coefficients[static_cast<std::size_t>(j)] * fit.phi_hat(j);
    res.standardized = (res.observed - res.fitted) * std::sqrt(row->weight);
    fit.residuals.push_back(res);
  }
  return fit;
}

std::vector<FittedNetEffect> fitted_net_effects(const NetEffectFit& fit, const PatternSpec& spec,
                                                const StratumTree& tree) {
  if (spec.dimension() != fit.phi_hat.size()) {
    throw UsageError("pattern dimension " + std::to_string(spec.dimension()) + " does not match the fit (" +
                     std::to_string(fit.phi_hat.size()) + ")");
  }
  std::vector<FittedNetEffect> out;
  for (int d = 1; d <= tree.history_length(); d += 2) {
    for (int id : tree.nodes_at_depth(d)) {
      if (tree.node(id).symbol == 0) continue;
      const auto key = tree.key_of(id);
      const auto row = spec.feature_row(key, tree.horizon(), tree.codec());
      const Eigen::Map<const Eigen::VectorXd> f(row.data(), static_cast<Eigen::Index>(row.size()));
      const double var = f.dot(fit.covariance * f);
      out.push_back({key, f.dot(fit.phi_hat), std::sqrt(std::max(var, 0.0))});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.key.size() != y.key.size() ? x.key.size() < y.key.size() : x.key < y.key;
  });
  return out;
}

WaldTest wald_test(const NetEffectFit& fit, const std::vector<int>& indices) {
  std::vector<int> idx = indices;
  if (idx.empty()) {
    for (int i = 0; i < fit.phi_hat.size(); ++i) idx.push_back(i);
  }
  const auto q = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd est(q);
  Eigen::MatrixXd cov(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    est(i) = fit.phi_hat(idx[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < q; ++j) cov(i, j) = fit.covariance(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
    throw EstimabilityError("Wald test: covariance of the tested parameters is singular");
  }
  WaldTest w;
  w.statistic = est.dot(ldlt.solve(est));
  w.df = static_cast<int>(q);
  const boost::math::chi_squared dist(w.df);
  w.p_value = boost::math::cdf(boost::math::complement(dist, std::max(w.statistic, 0.0)));
  return w;
}

PipelineResult run_pipeline(const StratumTree& tree, const PatternSpec& spec, Scope scope, const VarianceMode& mode) {
  PipelineResult out;
  out.estimates = estimate_point_effects(tree, scope, mode);
  out.constraints = build_constraints(spec, tree, scope, mode);
  out.fit = wls_fit(out.constraints, out.estimates.estimates);
  out.fit.names = spec.names();
  out.fitted = fitted_net_effects(out.fit, spec, tree);
  return out;
}

}  // namespace netfx
