#include "netfx/constraints.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "netfx/errors.hpp"

namespace netfx {
namespace {

using Row = std::vector<double>;

void axpy(Row& acc, double a, const Row& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * x[i];
}

}  // namespace

ConstraintSet build_constraints(const PatternSpec& spec, const StratumTree& tree, Scope scope,
                                const VarianceMode& mode) {
  const auto k = static_cast<std::size_t>(spec.dimension());
  ConstraintSet out;
  out.k = spec.dimension();
  out.scope = scope;
  if (scope == Scope::markov) {
    out.warnings.push_back("markov scope assumes z_t depends on the past only through (z_{t-1}, x_{t-1}); "
                           "this is not checked");
  }

  // feature rows of every observed active-treatment stratum
  std::vector<Row> feature(tree.size());
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto& n = tree.node(static_cast<int>(id));
    if (n.depth % 2 == 1 && n.symbol != 0) {
      feature[id] = spec.feature_row(tree.key_of(static_cast<int>(id)), tree.horizon(), tree.codec());
    }
  }
  // below[id] = sum over strict descendants D with an active treatment of f(D) w(D).
  // Children always carry larger ids than their parent.
  std::vector<Row> below(tree.size(), Row(k, 0.0));
  for (std::size_t id = tree.size(); id-- > 1;) {
    const auto& n = tree.node(static_cast<int>(id));
    Row& b = below[static_cast<std::size_t>(n.parent)];
    axpy(b, 1.0, below[id]);
    if (!feature[id].empty()) axpy(b, n.weight, feature[id]);
  }

  auto downstream = [&](const std::vector<int>& arm) {
    Row acc(k, 0.0);
    double w = 0.0;
    for (int id : arm) {
      axpy(acc, 1.0, below[static_cast<std::size_t>(id)]);
      w += tree.node(id).weight;
    }
    for (double& v : acc) v /= w;
    return acc;
  };

  for (const auto& target : enumerate_targets(tree, scope)) {
    ++out.candidates;
    if (target.control.empty()) {
      out.dropped.push_back({target.key, "control arm z" + std::to_string(target.key.time) + "=0 is empty"});
      continue;
    }
    ConstraintRow row;
    row.target = target.key;

    if (target.active.size() == 1 && target.contexts.size() == 1) {
      row.coefficients = feature[static_cast<std::size_t>(target.active.front())];
    } else {
      row.coefficients.assign(k, 0.0);
      double total = 0.0;
      for (int p : target.contexts) total += tree.node(p).weight;
      for (int p : target.contexts) {
        const auto c = tree.child(p, target.key.treatment);
        const Row f = c ? feature[static_cast<std::size_t>(*c)]
                        : spec.feature_row(tree.key_of(p).child(target.key.treatment), tree.horizon(), tree.codec());
        axpy(row.coefficients, tree.node(p).weight / total, f);
      }
    }
    axpy(row.coefficients, 1.0, downstream(target.active));
    axpy(row.coefficients, -1.0, downstream(target.control));

    if (tree.source() == StratumTree::Source::exact) {
      row.weight = 1.0;
    } else {
      const auto a = pooled_stats(tree, target.active);
      const auto c = pooled_stats(tree, target.control);
      if (variance_available(a, mode) && variance_available(c, mode)) {
        const double v = stratum_mean_variance(a, mode) + stratum_mean_variance(c, mode);
        row.weight = v > 0.0 ? 1.0 / v : 0.0;
        if (v <= 0.0) {
          out.warnings.push_back("theta[" + describe(target.key, tree.codec()) +
                                 "] has zero estimated variance; row kept with weight 0");
        }
      } else {
        out.warnings.push_back("theta[" + describe(target.key, tree.codec()) +
                               "] has an arm with fewer than 2 records; row kept with weight 0");
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

RankReport constraint_rank_check(const std::vector<ConstraintRow>& rows, int k, bool weighted_only) {
  RankReport report;
  report.k = k;
  std::vector<const ConstraintRow*> used;
  for (const auto& r : rows) {
    if (!weighted_only || r.weight > 0.0) used.push_back(&r);
  }
  report.rows = used.size();
  Eigen::MatrixXd c(static_cast<Eigen::Index>(used.size()), k);
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (int j = 0; j < k; ++j) c(static_cast<Eigen::Index>(i), j) = used[i]->coefficients.at(static_cast<std::size_t>(j));
  }
  if (used.empty()) {
    report.rank = 0;
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c);
    qr.setThreshold(1e-10);
    report.rank = static_cast<int>(qr.rank());
  }
  if (report.rank < k) {
    Eigen::MatrixXd basis;
    if (used.empty()) {
      basis = Eigen::MatrixXd::Identity(k, k);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
      basis = svd.matrixV().rightCols(k - report.rank);
    }
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      std::vector<double> v(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = std::abs(basis(i, j)) < 1e-14 ? 0.0 : basis(i, j);
      report.null_space.push_back(std::move(v));
    }
  }
  return report;
}

}  // namespace netfx
