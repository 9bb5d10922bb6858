#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "netfx/pattern.hpp"
#include "netfx_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = netfx::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("netfx_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

json table(double m00, double m01, bool drop_control = false, const json& overrides = json::array()) {
  json h = json::array();
  for (int z1 : {0, 1})
    for (int x1 : {0, 1})
      for (int z2 : {0, 1}) {
        if (drop_control && z1 == 1 && x1 == 1 && z2 == 0) continue;
        h.push_back({{"z", {z1, z2}}, {"x", {{x1}}}, {"weight", 0.125 + 0.05 * z2}, {"mean", z2 ? m01 : m00}});
      }
  return {{"horizon", 2}, {"covariate_radices", {2}}, {"histories", h}, {"overrides", overrides}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("estimate on the built-in fixture") {
    const auto r = cli({"estimate", "--fixture", "d0", "--pattern", "saturated"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["kind"] == "fit");
    CHECK(j["phi_hat"][0]["value"].get<double>() == doctest::Approx(30.0));
    CHECK(j["phi_hat"].size() == 5);
    CHECK(j["rank"] == 5);

    const auto g = cli({"estimate", "--fixture", "d0", "--pattern", NETFX_DATA_DIR "/patterns/three_group.pattern",
                        "--variance-mode", "known:25"});
    REQUIRE(g.code == 0);
    CHECK(json::parse(g.out)["phi_hat"][2]["value"].get<double>() == doctest::Approx(-20.0));
  }

  TEST_CASE("usage and input errors exit with 1") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"estimate", "--fixture", "d0"}).code == 1);
    const auto r = cli({"estimate", "--fixture", "d0", "--pattern", "/nonexistent/x.pattern"});
    CHECK(r.code == 1);
    CHECK(r.err.find("x.pattern") != std::string::npos);
    CHECK(cli({"estimate", "--data", "/nonexistent.csv", "--pattern", "saturated"}).code == 1);
    CHECK(cli({"estimate", "--fixture", "d9", "--pattern", "saturated"}).code == 1);
    CHECK(cli({"simulate"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("unidentified pattern exits with 2 and shows the null space") {
    const auto r = cli({"estimate", "--fixture", "d0", "--pattern", NETFX_DATA_DIR "/patterns/rank_deficient.pattern"});
    CHECK(r.code == 2);
    CHECK(r.err.find("0.707107") != std::string::npos);
  }

  TEST_CASE("oracle on tables") {
    const auto dir = scratch();
    const auto flat = write(dir / "flat.json", table(7.0, 7.0).dump());
    const auto r = cli({"oracle", "--table", flat});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["complete"] == true);
    for (const auto& e : j["net_effects"]["phi"]) CHECK(std::abs(e["value"].get<double>()) < 1e-12);

    const auto holes = write(dir / "holes.json", table(1.0, 3.0, true).dump());
    const auto h = cli({"oracle", "--table", holes});
    CHECK(h.code == 2);
    CHECK(json::parse(h.out)["complete"] == false);
    CHECK(h.err.find("missing") != std::string::npos);

    const auto d = cli({"oracle", "--dgp", NETFX_DATA_DIR "/dgp/three_effects_t2.dgp"});
    CHECK(d.code == 0);
  }

  TEST_CASE("diagnose") {
    const auto dir = scratch();
    const auto good = write(dir / "good.json", table(1.0, 4.0).dump());
    CHECK(cli({"diagnose", "--table", good}).code == 0);
    json planted = json::array({{{"z", {1}}, {"x", json::array()}, {"mean", 50.0}}});
    const auto bad = write(dir / "bad.json", table(1.0, 4.0, false, planted).dump());
    const auto r = cli({"diagnose", "--table", bad});
    CHECK(r.code == 2);
    CHECK(json::parse(r.out)["flagged"] == true);
    const auto fx = cli({"diagnose", "--fixture", "d0", "--reps", "400", "--seed", "3"});
    CHECK(fx.code == 0);
    CHECK(json::parse(fx.out)["independence"]["reps"] == 400);
  }

  TEST_CASE("simulate then estimate") {
    const auto dir = scratch();
    const auto csv = (dir / "sim.csv").string();
    const auto s = cli({"simulate", "--dgp", NETFX_DATA_DIR "/dgp/three_effects_t2.dgp", "--n", "2000", "--seed", "4",
                        "--out", csv});
    REQUIRE(s.code == 0);
    CHECK(fs::exists(csv + ".truth.json"));
    std::ifstream tin(csv + ".truth.json");
    const auto truth = json::parse(tin);
    CHECK(truth["confounded"] == false);
    const auto e = cli({"estimate", "--data", csv, "--pattern", NETFX_DATA_DIR "/patterns/three_group.pattern"});
    REQUIRE(e.code == 0);
    const auto j = json::parse(e.out);
    CHECK(std::abs(j["phi_hat"][0]["value"].get<double>() - 30.0) < 5.0 * j["phi_hat"][0]["std_error"].get<double>());
    const auto again = cli({"simulate", "--dgp", NETFX_DATA_DIR "/dgp/three_effects_t2.dgp", "--n", "50", "--seed", "4"});
    const auto again2 = cli({"simulate", "--dgp", NETFX_DATA_DIR "/dgp/three_effects_t2.dgp", "--n", "50", "--seed", "4"});
    CHECK(again.out == again2.out);
  }

  TEST_CASE("suggest-pattern writes a usable pattern") {
    const auto dir = scratch();
    const auto path = (dir / "suggested.pattern").string();
    const auto r = cli({"suggest-pattern", "--fixture", "d0", "--emit-pattern", path});
    REQUIRE(r.code == 0);
    const auto p = netfx::PatternSpec::parse_file(path);
    CHECK(p.dimension() == 3);
    CHECK(cli({"estimate", "--fixture", "d0", "--pattern", path}).code == 0);
  }
}
