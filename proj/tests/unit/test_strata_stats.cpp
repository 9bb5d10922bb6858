#include <doctest.h>

#include <random>
#include <sstream>

#include "netfx/dataset.hpp"
#include "netfx/errors.hpp"
#include "netfx/simulator.hpp"
#include "netfx/strata_stats.hpp"

using namespace netfx;

namespace {

Dataset t1(const std::vector<std::pair<int, double>>& rows) {
  std::vector<ObservationRecord> recs;
  for (std::size_t i = 0; i < rows.size(); ++i) recs.push_back({"r" + std::to_string(i), {rows[i].first}, {}, rows[i].second});
  return Dataset(std::move(recs), 1, 0);
}

}  // namespace

TEST_SUITE("strata_stats") {
  TEST_CASE("proportions") {
    const auto d0 = make_fixture_d0();
    const StratumKey z1{{1}};
    CHECK(proportion(d0, z1, z1).value == 1.0);
    CHECK(proportion(d0, d0.make_key({1, 1}, {{0}}), z1).value == 0.25);
    // pr(z2 = 1 | z1 = 1) sums over x1
    const double pr = proportion(d0, StratumKey{{1, 0, 1}}, z1).value + proportion(d0, StratumKey{{1, 1, 1}}, z1).value;
    CHECK(pr == 0.75);
    CHECK(proportion(d0, StratumKey{{1, 2}}, z1).value == 0.0);
    CHECK(proportion(d0, StratumKey{{1, 0}}, z1).numerator == 30.0);
    CHECK(proportion(d0, StratumKey{{1, 0}}, z1).denominator == 80.0);
  }

  TEST_CASE("proportion errors") {
    const auto d0 = make_fixture_d0();
    CHECK_THROWS_AS(proportion(d0, StratumKey{{0}}, StratumKey{{1}}), UsageError);
    CHECK_THROWS_AS(proportion(d0, StratumKey{{2, 0}}, StratumKey{{2}}), EstimabilityError);
  }

  TEST_CASE("stratum means") {
    const auto single = t1({{1, 7.0}});
    const auto s = stratum_mean(single, StratumKey{{1}});
    CHECK(s.mean == 7.0);
    CHECK(s.count == 1);

    const auto d0 = make_fixture_d0();
    // (z1=1, x1=1, z2=0): ten records alternating 141 and 131
    double sum = 0.0;
    int n = 0;
    for (const auto& r : d0.records()) {
      if (r.treatments == std::vector<int>{1, 0} && r.covariates[0][0] == 1) {
        sum += r.outcome;
        ++n;
      }
    }
    CHECK(n == 10);
    CHECK(stratum_mean(d0, StratumKey{{1, 1, 0}}).mean == doctest::Approx(sum / n).epsilon(1e-15));
    CHECK(stratum_mean(d0, StratumKey{{1, 1, 0}}).mean == doctest::Approx(136.0));

    const auto flat = t1({{0, 4.0}, {1, 4.0}, {1, 4.0}});
    for (int id = 0; id < static_cast<int>(flat.tree().size()); ++id) CHECK(flat.tree().node(id).mean == 4.0);
    CHECK_THROWS_AS(stratum_mean(d0, StratumKey{{2}}), EstimabilityError);
  }

  TEST_CASE("mean variances") {
    StratumStats four{4, 4.0, 0.0, 0.0};
    CHECK(stratum_mean_variance(four, VarianceMode::known(1.0)) == 0.25);
    const auto same = t1({{1, 2.0}, {1, 2.0}, {1, 2.0}});
    CHECK(stratum_mean_variance(same.tree(), StratumKey{{1}}, VarianceMode::estimated()) == 0.0);
    const auto two = t1({{1, 0.0}, {1, 2.0}});
    CHECK(stratum_mean_variance(two.tree(), StratumKey{{1}}, VarianceMode::estimated()) == doctest::Approx(1.0));
    const auto one = t1({{1, 3.0}});
    CHECK_FALSE(variance_available(stratum_mean(one, StratumKey{{1}}), VarianceMode::estimated()));
    CHECK_THROWS_AS(stratum_mean_variance(one.tree(), StratumKey{{1}}, VarianceMode::estimated()), EstimabilityError);
  }

  TEST_CASE("variance mode parsing") {
    CHECK(VarianceMode::parse("estimated").kind == VarianceMode::Kind::estimated);
    CHECK(VarianceMode::parse("known").sigma2 == 1.0);
    CHECK(VarianceMode::parse("known:2.5").sigma2 == 2.5);
    CHECK_THROWS_AS(VarianceMode::parse("known:-1"), UsageError);
    CHECK_THROWS_AS(VarianceMode::parse("bogus"), UsageError);
  }

  TEST_CASE("merge matches a direct two-pass computation") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(3.0, 2.0);
    std::vector<double> a(13), b(29);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    auto stats = [](const std::vector<double>& v) {
      StratumStats s;
      s.count = static_cast<std::int64_t>(v.size());
      s.weight = static_cast<double>(v.size());
      for (double x : v) s.mean += x;
      s.mean /= s.weight;
      for (double x : v) s.sum_sq_dev += (x - s.mean) * (x - s.mean);
      return s;
    };
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto m = merge(stats(a), stats(b));
    const auto d = stats(all);
    CHECK(m.count == d.count);
    CHECK(m.mean == doctest::Approx(d.mean).epsilon(1e-13));
    CHECK(m.sum_sq_dev == doctest::Approx(d.sum_sq_dev).epsilon(1e-12));
  }

  TEST_CASE("total proportion, mean consistency and marginalization") {
    auto dgp = DgpSpec::parse_file(NETFX_DATA_DIR "/dgp/sita_t3.dgp");
    const auto data = simulate(dgp, 3000, 11);
    const auto& tree = data.tree();
    for (std::size_t id = 0; id < tree.size(); ++id) {
      const auto& n = tree.node(static_cast<int>(id));
      if (n.children.empty()) continue;
      const auto key = tree.key_of(static_cast<int>(id));
      double total = 0.0;
      double avg = 0.0;
      for (int c : n.children) {
        const auto p = proportion(tree, tree.key_of(c), key).value;
        total += p;
        avg += p * tree.node(c).mean;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(avg == doctest::Approx(n.mean).epsilon(1e-12));
    }
    // sum over x2 of pr(x2, z3 = 1 | z1, x1, z2) = pr(z3 = 1 | z1, x1, z2)
    for (int id : tree.nodes_at_depth(3)) {
      const auto b = tree.key_of(id);
      double lhs = 0.0;
      double direct_num = 0.0;
      for (int x : tree.node(id).children) {
        const auto k = tree.key_of(x).child(1);
        lhs += proportion(tree, k, b).value;
        if (auto f = tree.find(k)) direct_num += tree.node(*f).weight;
      }
      CHECK(lhs == doctest::Approx(direct_num / tree.node(id).weight).epsilon(1e-14));
    }
  }
}
