#include <doctest.h>

#include "netfx/errors.hpp"
#include "netfx/pattern.hpp"
#include "netfx/simulator.hpp"

using namespace netfx;

namespace {

const CovariateCodec kBinary({2});

std::vector<double> row(const PatternSpec& p, std::vector<int> steps, int horizon = 2) {
  return p.feature_row(StratumKey{std::move(steps)}, horizon, kBinary);
}

std::size_t error_line(const std::string& text) {
  try {
    PatternSpec::parse_text(text, "p");
  } catch (const ParseError& e) {
    return e.line();
  }
  return 999;
}

}  // namespace

TEST_SUITE("pattern") {
  TEST_CASE("three group file") {
    const auto p = PatternSpec::parse_file(NETFX_DATA_DIR "/patterns/three_group.pattern");
    CHECK(p.dimension() == 3);
    CHECK(p.names() == std::vector<std::string>{"varphi1", "varphi2", "varphi3"});
    CHECK(row(p, {1}) == std::vector<double>{1, 0, 0});
    CHECK(row(p, {0, 1, 1}) == std::vector<double>{0, 1, 0});
    CHECK(row(p, {1, 0, 1}) == std::vector<double>{0, 1, 0});
    CHECK(row(p, {1, 1, 1}) == std::vector<double>{0, 0, 1});
  }

  TEST_CASE("grammar errors carry the line") {
    CHECK(error_line("# c\nfoo: 1\n") == 2);
    CHECK(error_line("group a when t == 1\n") == 1);
    CHECK(error_line("group a: t == 1\n") == 1);
    CHECK(error_line("group a: when t ==\n") == 1);
    CHECK(error_line("group a b: when t == 1\n") == 1);
    CHECK(error_line("term a:\n") == 1);
    CHECK(error_line("\n\ngroup a: when y == 1\n") == 3);
    CHECK(error_line("group a: when t == 1\ngroup a: when t == 2\n") == 2);
    CHECK(error_line("group a: otherwise\ngroup b: otherwise\n") != 999);
    CHECK(error_line("# nothing\n") != 999);
    CHECK(error_line("group a: when t == 1 # trailing comment\n") == 999);
  }

  TEST_CASE("overlapping groups") {
    const std::string text = "group a: when t == 1\ngroup b: when z[1] == 1\n";
    const auto p = PatternSpec::parse_text(text);
    CHECK_THROWS_AS(row(p, {1}), AmbiguityError);
    CHECK(row(p, {1, 0, 1}) == std::vector<double>{0, 1});
    const auto first = PatternSpec::parse_text("match first\n" + text);
    CHECK(first.first_match());
    CHECK(row(first, {1}) == std::vector<double>{1, 0});
  }

  TEST_CASE("coverage and otherwise") {
    const auto p = PatternSpec::parse_text("group a: when t == 1\n");
    CHECK_THROWS_AS(row(p, {0, 0, 1}), CoverageError);
    const auto q = PatternSpec::parse_text("group rest: otherwise\ngroup a: when t == 1\n");
    CHECK(row(q, {1}) == std::vector<double>{0, 1});
    CHECK(row(q, {0, 0, 1}) == std::vector<double>{1, 0});
    CHECK_THROWS_AS(row(q, {1, 0}), UsageError);
  }

  TEST_CASE("terms") {
    const auto lin = PatternSpec::parse_file(NETFX_DATA_DIR "/patterns/linear.pattern");
    CHECK(row(lin, {1}) == std::vector<double>{1, 0, 0});
    CHECK(row(lin, {1, 1, 1}) == std::vector<double>{1, 1, 1});
    CHECK(row(lin, {0, 1, 1}) == std::vector<double>{1, 0, 1});
    const auto future = PatternSpec::parse_text("term ahead: z[t + 1]\n");
    CHECK_THROWS_AS(row(future, {1}), CoverageError);
    const auto mixed = PatternSpec::parse_text("group early: when t == 1\ngroup late: otherwise\nterm slope: 2 * t - 1\n");
    CHECK(row(mixed, {1}) == std::vector<double>{1, 0, 1});
    CHECK(row(mixed, {1, 0, 1}) == std::vector<double>{0, 1, 3});
    CHECK_THROWS_AS(row(PatternSpec::parse_text("group early: when t == 1\nterm slope: t\n"), {0, 0, 1}), CoverageError);
  }

  TEST_CASE("to_text round-trips") {
    const auto d0 = make_fixture_d0();
    for (const char* file : {"three_group", "linear", "last_three", "common"}) {
      const auto p = PatternSpec::parse_file(std::string(NETFX_DATA_DIR "/patterns/") + file + ".pattern");
      const auto back = PatternSpec::parse_text(p.to_text());
      CHECK(back.names() == p.names());
      for (std::size_t id = 0; id < d0.tree().size(); ++id) {
        const auto key = d0.tree().key_of(static_cast<int>(id));
        if (key.empty() || !key.ends_with_treatment() || key.steps.back() == 0) continue;
        CHECK(back.feature_row(key, 2, kBinary) == p.feature_row(key, 2, kBinary));
      }
    }
  }

  TEST_CASE("stratum predicates select one stratum") {
    const auto d0 = make_fixture_d0();
    const auto sat = saturated_pattern(d0.tree());
    CHECK(sat.dimension() == 5);
    CHECK(sat.names().front().rfind("phi[", 0) == 0);
    int k = 0;
    for (int depth : {1, 3}) {
      for (int id : d0.tree().nodes_at_depth(depth)) {
        const auto key = d0.tree().key_of(id);
        if (key.steps.back() == 0) continue;
        const auto r = sat.feature_row(key, 2, kBinary);
        std::vector<double> unit(5, 0.0);
        unit[static_cast<std::size_t>(k++)] = 1.0;
        CHECK(r == unit);
      }
    }
    CHECK(stratum_predicate(StratumKey{{1, 0, 1}}, kBinary) == "t == 2 and z[1] == 1 and x[1] == 0 and z[2] == 1");
    const CovariateCodec wide({2, 3});
    const auto pred = stratum_predicate(StratumKey{{0, wide.encode(std::vector<int>{1, 2}), 1}}, wide);
    CHECK(pred.find("x[1][2] == 2") != std::string::npos);
  }
}
