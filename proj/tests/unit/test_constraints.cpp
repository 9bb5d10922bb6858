#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "netfx/constraints.hpp"
#include "netfx/estimation.hpp"
#include "netfx/net_effects.hpp"
#include "netfx/simulator.hpp"
#include "oracles.hpp"

using namespace netfx;

namespace {

PatternSpec pattern_file(const char* name) {
  return PatternSpec::parse_file(std::string(NETFX_DATA_DIR "/patterns/") + name + ".pattern");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

const char* kMarkovT4 =
    "horizon 4\nsigma 1\nbaseline 0\n"
    "treat 0.5 when t == 1\ntreat 0.7 when z[t-1] == 1 and x[t-1] == 1\ntreat 0.4 when z[t-1] == 1\n"
    "treat 0.3 otherwise\n"
    "cover 0.6 when z[t] == 1\ncover 0.3 otherwise\n"
    "effect 30 when t <= T - 2\neffect 20 when t == T - 1\neffect -20 when t == T\nkappa 5 otherwise\n";

}  // namespace

TEST_SUITE("constraints") {
  TEST_CASE("D0 three-group rows") {
    const auto d0 = make_fixture_d0();
    const auto set = build_constraints(pattern_file("three_group"), d0.tree(), Scope::full, VarianceMode::estimated());
    CHECK(set.k == 3);
    REQUIRE(set.rows.size() == 5);
    CHECK(set.dropped.empty());
    CHECK(set.candidates == 5);
    const auto& r1 = set.rows[0].coefficients;
    CHECK(r1[0] == doctest::Approx(1.0));
    CHECK(r1[1] == doctest::Approx(-0.125));
    CHECK(r1[2] == doctest::Approx(0.5));
    for (std::size_t i = 1; i < 4; ++i) CHECK(set.rows[i].coefficients == std::vector<double>{0, 1, 0});
    CHECK(set.rows[4].coefficients == std::vector<double>{0, 0, 1});
    CHECK(set.rows[1].target.context == StratumKey{{0, 0}});
    CHECK(set.rows[1].weight == doctest::Approx(1.0 / (25.0 / 19.0 + 25.0 / 29.0)));
    // t = 1 arms pool all z1 = 1 (or 0) records
    double ss1 = 0.0, ss0 = 0.0, m1 = 128.75, m0 = 111.25;
    for (const auto& r : d0.records()) (r.treatments[0] ? ss1 : ss0) += std::pow(r.outcome - (r.treatments[0] ? m1 : m0), 2);
    CHECK(set.rows[0].weight == doctest::Approx(1.0 / (ss1 / (80.0 * 79.0) + ss0 / (80.0 * 79.0))));
  }

  TEST_CASE("two period pattern on D0") {
    const auto d0 = make_fixture_d0();
    const auto set = build_constraints(pattern_file("two_period"), d0.tree(), Scope::full, VarianceMode::known(1.0));
    // pr(z2=1 | z1=1) - pr(z2=1 | z1=0) = 0.75 - 0.375
    CHECK(set.rows[0].coefficients[1] == doctest::Approx(0.375));
    CHECK(set.rows[0].weight == doctest::Approx(40.0));
  }

  TEST_CASE("balanced assignment leaves only the own feature") {
    const auto dgp = DgpSpec::parse_text(
        "horizon 3\ntreat 0.5 otherwise\ncover 0.5 otherwise\neffect 1 otherwise\nkappa 0 otherwise\n");
    const auto tree = population_table(dgp);
    const auto set = build_constraints(pattern_file("last_three"), tree, Scope::full, VarianceMode::estimated());
    CHECK(set.rows.size() == 1 + 4 + 16);
    for (const auto& r : set.rows) {
      std::vector<double> unit(3, 0.0);
      unit[static_cast<std::size_t>(r.target.time - 1)] = 1.0;
      for (std::size_t j = 0; j < 3; ++j) CHECK(r.coefficients[j] == doctest::Approx(unit[j]));
      CHECK(r.weight == 1.0);
    }
  }

  TEST_CASE("time-group coefficients are differences of later treatment rates") {
    std::mt19937_64 rng(2024);
    const auto spec = pattern_file("last_three");
    for (int rep = 0; rep < 5; ++rep) {
      const auto table = oracle::random_table(4, rng);
      const auto tree = oracle::to_tree(table);
      const auto set = build_constraints(spec, tree, Scope::full, VarianceMode::estimated());
      REQUIRE(set.rows.size() == 1 + 4 + 16 + 64);
      for (const auto& r : set.rows) {
        auto active = r.target.context.steps;
        active.push_back(1);
        auto control = r.target.context.steps;
        control.push_back(0);
        auto rate = [&](const oracle::Path& arm, int s) {
          double w = 0.0, on = 0.0;
          for (const auto& [p, v] : table.leaves) {
            if (!oracle::has_prefix(p, arm)) continue;
            w += v.first;
            if (p[static_cast<std::size_t>(2 * s - 2)] == 1) on += v.first;
          }
          return on / w;
        };
        auto group = [](int s) { return s <= 2 ? 0 : s - 2; };
        std::vector<double> expected(3, 0.0);
        expected[static_cast<std::size_t>(group(r.target.time))] += 1.0;
        for (int s = r.target.time + 1; s <= 4; ++s) {
          expected[static_cast<std::size_t>(group(s))] += rate(active, s) - rate(control, s);
        }
        for (std::size_t j = 0; j < 3; ++j) CHECK(r.coefficients[j] == doctest::Approx(expected[j]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("saturated rows reproduce the point effects") {
    std::mt19937_64 rng(17);
    for (int horizon = 1; horizon <= 3; ++horizon) {
      const auto table = oracle::random_table(horizon, rng);
      const auto tree = oracle::to_tree(table);
      const auto spec = saturated_pattern(tree);
      const auto net = exact_net_effects(tree);
      std::vector<double> phi(static_cast<std::size_t>(spec.dimension()), 0.0);
      for (const auto& [key, v] : net.phi) {
        const auto f = spec.feature_row(key, horizon, tree.codec());
        for (std::size_t j = 0; j < f.size(); ++j) phi[j] += f[j] * v;
      }
      const auto set = build_constraints(spec, tree, Scope::full, VarianceMode::estimated());
      const auto est = estimate_point_effects(tree, Scope::full, VarianceMode::estimated());
      REQUIRE(est.estimates.size() == set.rows.size());
      for (std::size_t i = 0; i < set.rows.size(); ++i) {
        CHECK(est.estimates[i].key == set.rows[i].target);
        CHECK(dot(set.rows[i].coefficients, phi) == doctest::Approx(est.estimates[i].value).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("markov rows hold exactly on a markov population") {
    const auto dgp = DgpSpec::parse_text(kMarkovT4);
    const auto tree = population_table(dgp);
    const std::vector<double> truth{30, 20, -20};
    const auto spec = pattern_file("last_three");
    for (Scope scope : {Scope::full, Scope::markov}) {
      const auto set = build_constraints(spec, tree, scope, VarianceMode::estimated());
      const auto est = estimate_point_effects(tree, scope, VarianceMode::estimated());
      REQUIRE(est.estimates.size() == set.rows.size());
      for (std::size_t i = 0; i < set.rows.size(); ++i) {
        CHECK(dot(set.rows[i].coefficients, truth) == doctest::Approx(est.estimates[i].value).epsilon(1e-10));
      }
      if (scope == Scope::markov) {
        CHECK(set.rows.size() == 1 + 4 + 4 + 4);
        CHECK_FALSE(set.warnings.empty());
      }
    }
  }

  TEST_CASE("empty control arms are dropped") {
    std::vector<HistoryEntry> e{{StratumKey{{0, 0, 0}}, 1, 1.0}, {StratumKey{{0, 0, 1}}, 1, 2.0},
                                {StratumKey{{1, 1, 1}}, 1, 4.0}, {StratumKey{{1, 0, 0}}, 1, 4.0}};
    const auto tree = StratumTree::from_histories(2, CovariateCodec({2}), e);
    const auto set = build_constraints(pattern_file("two_period"), tree, Scope::full, VarianceMode::estimated());
    CHECK(set.candidates == 3);
    CHECK(set.rows.size() == 2);
    REQUIRE(set.dropped.size() == 1);
    CHECK(set.dropped[0].target.context == StratumKey{{1, 1}});
  }

  TEST_CASE("rank check") {
    auto rows_of = [](std::vector<std::vector<double>> coefs, std::vector<double> w = {}) {
      std::vector<ConstraintRow> rows;
      for (std::size_t i = 0; i < coefs.size(); ++i) rows.push_back({TargetKey{}, coefs[i], w.empty() ? 1.0 : w[i]});
      return rows;
    };
    const auto full = constraint_rank_check(rows_of({{1, 0}, {0, 1}, {1, 1}}), 2);
    CHECK(full.rank == 2);
    CHECK_FALSE(full.deficient());
    CHECK(full.null_space.empty());

    const auto def = constraint_rank_check(rows_of({{1, 1}, {2, 2}}), 2);
    CHECK(def.rank == 1);
    CHECK(def.deficient());
    REQUIRE(def.null_space.size() == 1);
    CHECK(std::abs(def.null_space[0][0] + def.null_space[0][1]) < 1e-12);
    CHECK(std::abs(std::abs(def.null_space[0][0]) - std::sqrt(0.5)) < 1e-12);

    const auto weighted = constraint_rank_check(rows_of({{1, 0}, {0, 1}}, {1.0, 0.0}), 2, true);
    CHECK(weighted.rank == 1);
    CHECK(weighted.rows == 1);
    CHECK(constraint_rank_check(rows_of({}), 2).rank == 0);

    const auto d0 = make_fixture_d0();
    const auto set = build_constraints(pattern_file("rank_deficient"), d0.tree(), Scope::full, VarianceMode::estimated());
    CHECK(constraint_rank_check(set.rows, 2).rank == 1);
  }
}
