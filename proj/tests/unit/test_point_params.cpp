#include <doctest.h>

#include <random>

#include "netfx/errors.hpp"
#include "netfx/point_params.hpp"
#include "netfx/simulator.hpp"
#include "oracles.hpp"

using namespace netfx;

TEST_SUITE("point_params") {
  TEST_CASE("single period two by two") {
    std::vector<HistoryEntry> e{{StratumKey{{0}}, 0.4, 2.0}, {StratumKey{{1}}, 0.6, 5.0}};
    const auto tree = StratumTree::from_histories(1, CovariateCodec({2}), e);
    CHECK(point_effect_treatment(tree, StratumKey{{1}}) == doctest::Approx(3.0));
    CHECK(grand_mean(tree) == doctest::Approx(0.4 * 2.0 + 0.6 * 5.0));
    const auto p = extract_point_params(tree);
    CHECK(p.theta.size() == 1);
    CHECK(p.gamma.empty());
    CHECK(reconstruct_standard_mean(p, tree, StratumKey{{0}}) == doctest::Approx(2.0));
    CHECK(reconstruct_standard_mean(p, tree, StratumKey{{1}}) == doctest::Approx(5.0));
  }

  TEST_CASE("D0 parameters") {
    const auto d0 = make_fixture_d0();
    const auto& tree = d0.tree();
    CHECK(point_effect_treatment(tree, StratumKey{{1}}) == doctest::Approx(17.5));
    CHECK(grand_mean(tree) == doctest::Approx(120.0));
    CHECK(point_effect_covariate(tree, StratumKey{{0, 1}}) == doctest::Approx(350.0 / 3.0 - 108.0));
    CHECK(point_effect_treatment(tree, StratumKey{{0, 0, 1}}) == doctest::Approx(20.0));
    CHECK(point_effect_treatment(tree, StratumKey{{1, 1, 1}}) == doctest::Approx(-20.0));
    const auto p = extract_point_params(tree);
    CHECK(p.theta.size() == 5);
    CHECK(p.gamma.size() == 2);
    CHECK(p.non_estimable.empty());
    for (int id : tree.nodes_at_depth(3)) {
      CHECK(reconstruct_standard_mean(p, tree, tree.key_of(id)) == doctest::Approx(tree.node(id).mean).epsilon(1e-13));
    }
  }

  TEST_CASE("bad contrast keys") {
    const auto d0 = make_fixture_d0();
    CHECK_THROWS_AS(point_effect_treatment(d0.tree(), StratumKey{{0}}), UsageError);
    CHECK_THROWS_AS(point_effect_treatment(d0.tree(), StratumKey{{1, 0}}), UsageError);
    CHECK_THROWS_AS(point_effect_covariate(d0.tree(), StratumKey{{1}}), UsageError);
    CHECK_THROWS_AS(point_effect_treatment(d0.tree(), StratumKey{{2}}), EstimabilityError);
  }

  TEST_CASE("missing control arm is listed as non-estimable") {
    std::vector<HistoryEntry> e{{StratumKey{{0, 0, 0}}, 1, 1.0}, {StratumKey{{0, 1, 1}}, 1, 2.0},
                                {StratumKey{{0, 1, 0}}, 1, 3.0}, {StratumKey{{1, 0, 1}}, 1, 4.0}};
    const auto tree = StratumTree::from_histories(2, CovariateCodec({2}), e);
    const auto p = extract_point_params(tree);
    CHECK(p.non_estimable.size() == 1);
    CHECK(p.non_estimable.front() == StratumKey{{1, 0, 1}});
    CHECK_THROWS_AS(reconstruct_standard_mean(p, tree, StratumKey{{1, 0, 1}}), IncompletenessError);
  }

  TEST_CASE("point parametrization is a bijection on random tables") {
    std::mt19937_64 rng(42);
    for (int horizon = 1; horizon <= 4; ++horizon) {
      for (int rep = 0; rep < 10; ++rep) {
        const auto table = oracle::random_table(horizon, rng);
        const auto tree = oracle::to_tree(table);
        const auto p = extract_point_params(tree);
        CHECK(p.theta.size() + p.gamma.size() + 1 == table.leaves.size());
        CHECK(grand_mean(tree) == doctest::Approx(oracle::mean(table, {})).epsilon(1e-12));
        for (const auto& [path, v] : table.leaves) {
          CHECK(reconstruct_standard_mean(p, tree, StratumKey{path}) == doctest::Approx(v.second).epsilon(1e-11));
        }
        for (const auto& [key, th] : p.theta) {
          auto control = key.steps;
          control.back() = 0;
          CHECK(th == doctest::Approx(oracle::mean(table, key.steps) - oracle::mean(table, control)).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("shifting the grand mean shifts every reconstructed mean") {
    const auto d0 = make_fixture_d0();
    auto p = extract_point_params(d0.tree());
    p.grand_mean += 7.0;
    for (int id : d0.tree().nodes_at_depth(3)) {
      CHECK(reconstruct_standard_mean(p, d0.tree(), d0.tree().key_of(id)) ==
            doctest::Approx(d0.tree().node(id).mean + 7.0));
    }
  }
}
