#include <doctest.h>

#include <cmath>
#include <numeric>

#include "netfx/errors.hpp"
#include "netfx/net_effects.hpp"
#include "netfx/point_params.hpp"
#include "netfx/simulator.hpp"

using namespace netfx;

namespace {

DgpSpec dgp_file(const char* name) { return DgpSpec::parse_file(std::string(NETFX_DATA_DIR "/dgp/") + name + ".dgp"); }

bool spec_error(const std::string& text) {
  try {
    DgpSpec::parse_text(text, "t.dgp");
  } catch (const SpecError&) {
    return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("specification errors") {
    const std::string ok = "horizon 2\ntreat 0.5 otherwise\ncover 0.5 otherwise\n";
    CHECK_FALSE(spec_error(ok));
    CHECK(spec_error("treat 0.5 otherwise\ncover 0.5 otherwise\n"));
    CHECK(spec_error("horizon 2\ntreat 1.2 otherwise\ncover 0.5 otherwise\n"));
    CHECK(spec_error("horizon 2\ntreat 0 otherwise\ncover 0.5 otherwise\n"));
    CHECK(spec_error(ok + "bogus 1\n"));
    CHECK(spec_error(ok + "sigma -1\n"));
    CHECK(spec_error("horizon 2\ntreat 0.5 when u == 1\ntreat 0.5 otherwise\ncover 0.5 otherwise\n"));
    CHECK(spec_error("horizon 2\ntreat 0.5 otherwise\n"));
    CHECK(spec_error(ok + "effect 1 when t ==\n"));
    try {
      DgpSpec::parse_text(ok + "\nbogus 1\n", "t.dgp");
    } catch (const SpecError& e) {
      CHECK(std::string(e.what()).find("t.dgp:5") != std::string::npos);
    }
    // rules are required only where they are reached
    const auto gap = DgpSpec::parse_text("horizon 2\ntreat 0.5 when t == 1\ncover 0.5 otherwise\n");
    CHECK_THROWS_AS(population_table(gap), SpecError);
  }

  TEST_CASE("latent variable and confounding") {
    const auto conf = dgp_file("confounded_t2");
    CHECK(conf.has_latent());
    CHECK(conf.confounded());
    CHECK(conf.latent_p() == 0.5);
    const auto sita = dgp_file("sita_t2");
    CHECK_FALSE(sita.confounded());
  }

  TEST_CASE("noise-free draws sit on the process mean") {
    auto dgp = dgp_file("sita_t2");
    dgp.set_sigma(0.0);
    const auto data = simulate(dgp, 200, 3);
    for (const auto& r : data.records()) CHECK(r.outcome == doctest::Approx(dgp.mean(r.treatments, r.covariates, 0)));
  }

  TEST_CASE("same seed, same data") {
    const auto dgp = dgp_file("three_effects_t2");
    const auto a = simulate(dgp, 300, 77);
    const auto b = simulate(dgp, 300, 77);
    const auto c = simulate(dgp, 300, 78);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.record(i).outcome == b.record(i).outcome);
      CHECK(a.history_of(i) == b.history_of(i));
      differs = differs || a.record(i).outcome != c.record(i).outcome;
    }
    CHECK(differs);
    CHECK(a.record(0).unit_id == "u1");
    CHECK_THROWS_AS(simulate(dgp, 0, 1), UsageError);
  }

  TEST_CASE("causal oracle") {
    for (const auto& [e, v] : g_oracle(dgp_file("null_t2")).effects) CHECK(std::abs(v) < 1e-12);

    const auto one = DgpSpec::parse_text("horizon 1\ntreat 0.3 otherwise\neffect 2.5 otherwise\n");
    const auto o1 = g_oracle(one);
    REQUIRE(o1.effects.size() == 1);
    CHECK(o1.effects.begin()->second == doctest::Approx(2.5));

    const auto o6 = g_oracle(dgp_file("three_effects_t2"));
    CHECK(o6.effects.size() == 5);
    CHECK(o6.effects.at(StratumKey{{1}}) == doctest::Approx(30.0));
    CHECK(o6.effects.at(StratumKey{{1, 1, 1}}) == doctest::Approx(-20.0));
    CHECK(o6.effects.at(StratumKey{{0, 1, 1}}) == doctest::Approx(20.0));
  }

  TEST_CASE("population table") {
    const auto dgp = dgp_file("three_effects_t2");
    const auto tree = population_table(dgp);
    double total = 0.0;
    for (int id : tree.nodes_at_depth(3)) total += tree.node(id).weight;
    CHECK(total == doctest::Approx(1.0));
    CHECK(tree.node(*tree.find(StratumKey{{1}})).weight == doctest::Approx(0.5));
    CHECK(tree.node(*tree.find(StratumKey{{1, 1, 1}})).weight == doctest::Approx(0.5 * 0.6 * 0.75));
    const auto net = exact_net_effects(tree);
    const auto oracle = g_oracle(dgp);
    for (const auto& [k, v] : oracle.effects) CHECK(net.phi.at(k) == doctest::Approx(v).epsilon(1e-12));
  }

  TEST_CASE("fixed design counts") {
    const auto dgp = dgp_file("null_t2");
    const auto counts = fixed_design_counts(dgp, 640);
    const auto tree = population_table(dgp);
    std::size_t total = 0;
    for (const auto& [k, c] : counts) {
      total += c;
      CHECK(std::abs(static_cast<double>(c) - 640.0 * tree.node(*tree.find(k)).weight) < 1.0);
    }
    CHECK(total == 640);
    CHECK(counts.at(StratumKey{{1, 1, 1}}) == 640 * 0.5 * 0.75 * 0.75);
    const auto a = simulate(dgp, 640, 1, DesignMode::fixed);
    const auto b = simulate(dgp, 640, 2, DesignMode::fixed);
    for (const auto& [k, c] : counts) {
      CHECK(a.stratum_members(k).size() == c);
      CHECK(b.stratum_members(k).size() == c);
    }
    CHECK(parse_design("fixed") == DesignMode::fixed);
    CHECK_THROWS_AS(parse_design("grid"), UsageError);
  }

  TEST_CASE("without covariate effects and noise the sample net effects are exact") {
    const auto dgp = DgpSpec::parse_text(
        "horizon 3\nsigma 0\nbaseline 5\ntreat 0.5 when t == 1\ntreat 0.7 when x[t-1] == 1\ntreat 0.3 otherwise\n"
        "cover 0.6 when z[t] == 1\ncover 0.4 otherwise\neffect 3 when t == 1\neffect -1 otherwise\n");
    const auto data = simulate(dgp, 500, 21);
    const auto net = partial_net_effects(data.tree());
    const auto oracle = g_oracle(dgp);
    std::size_t checked = 0;
    for (const auto& [k, v] : net.table.phi) {
      CHECK(v == doctest::Approx(oracle.effects.at(k)).epsilon(1e-12));
      ++checked;
    }
    CHECK(checked > 10);
  }

  TEST_CASE("D0 fixture") {
    const auto d0 = make_fixture_d0();
    CHECK(grand_mean(d0.tree()) == doctest::Approx(120.0));
    CHECK(d0.record(0).unit_id == "d0-001");
    CHECK(d0.record(159).unit_id == "d0-160");
  }

  TEST_CASE("wrong equality test") {
    const auto d0 = make_fixture_d0();
    const auto t = standard_parameter_equality_test(d0.tree(), 25.0);
    CHECK(t.df == 6);
    CHECK(t.statistic > 0.0);
    CHECK(t.p_value < 1e-6);
    // equal means within every covariate path give a zero statistic
    std::vector<ObservationRecord> recs;
    for (int z1 : {0, 1})
      for (int x1 : {0, 1})
        for (int z2 : {0, 1})
          for (int k = 0; k < 3; ++k) recs.push_back({"r" + std::to_string(recs.size()), {z1, z2}, {{x1}}, 10.0 * x1 + k});
    const auto flat = standard_parameter_equality_test(Dataset(std::move(recs), 2, 1).tree(), 1.0);
    CHECK(flat.statistic == doctest::Approx(0.0));
    CHECK(flat.p_value == doctest::Approx(1.0));
    CHECK_THROWS_AS(standard_parameter_equality_test(population_table(dgp_file("null_t2")), 1.0), UsageError);
  }
}
