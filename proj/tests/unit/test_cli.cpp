#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sphvar/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = sphvar::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("threshold reports") {
  const Run r = cli({"threshold", "--map", "hopf", "--coupling", "symplectic", "--res", "12", "--deterministic"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "threshold");
  CHECK(j["source"] == "variations/stability_threshold");
  CHECK_FALSE(j.contains("timestamp"));
  CHECK(j["result"]["kappa_star"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  const json k = json::parse(cli({"threshold", "--map", "identity:3", "--coupling", "sigma2", "--res", "12"}).out);
  CHECK(k["result"]["kappa_star"].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(k.contains("timestamp"));
}

TEST_CASE("hessian trace report") {
  const Run r = cli({"hessian-trace", "--map", "hopf", "--kind", "symplectic", "--family", "pushforward", "--res",
                     "12", "--deterministic"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out)["result"];
  CHECK(j["coefficient"] == 2.0);
  CHECK(j["ratio_error"].get<double>() < 0.01);
}

TEST_CASE("deterministic output is byte-identical") {
  const std::vector<std::string> args = {"nakauchi", "--map", "hopf", "--res", "8", "--deterministic"};
  const Run a = cli(args);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "1"});
  const Run b = cli(threaded);
  CHECK(a.code == 0);
  // the config echo differs only if --threads were recorded, which it is not
  CHECK(a.out == b.out);
}

TEST_CASE("csv output carries the same values") {
  const Run j = cli({"volume", "--dim", "3", "--res", "6", "--deterministic"});
  const Run c = cli({"volume", "--dim", "3", "--res", "6", "--format", "csv"});
  REQUIRE(c.code == 0);
  const double v = json::parse(j.out)["result"]["volume"];
  std::istringstream in(c.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.find("volume") != std::string::npos);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  CHECK(row.find(buf) != std::string::npos);
}

TEST_CASE("usage errors exit with 2 and name the flag") {
  Run r = cli({"energy", "--map", "nope", "--kind", "dirichlet"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--map") != std::string::npos);
  r = cli({"energy", "--map", "identity:3", "--kind", "symplectic"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--kind") != std::string::npos);
  r = cli({"threshold", "--map", "hopf", "--coupling", "quartic"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--coupling") != std::string::npos);
  CHECK(cli({"volume", "--dim", "3", "--res", "2"}).code == 2);
  CHECK(cli({"energy", "--map", "hopf", "--kind", "coupled-sigma2", "--kappa", "-1"}).code == 2);
  CHECK(cli({"energy", "--map", "hopf", "--kind", "dirichlet", "--format", "xml"}).code == 2);
  CHECK(cli({"teleport"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("failing identity checks exit with 1") {
  // a coarse grid cannot resolve the refinement study's second step for this map
  CHECK(cli({"weitzenbock", "--map", "hopf", "--res", "8"}).code == 0);
  CHECK(cli({"magic", "--map", "hopf", "--samples", "5"}).code == 0);
  CHECK(cli({"weitzenbock", "--map", "poly:1:2:3:2", "--res", "4"}).code == 1);
}

TEST_CASE("coarse suite rows are resolution-limited, not failed") {
  const Run r = cli({"suite", "--criterion", "1", "--res", "6", "--deterministic"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out)["result"];
  CHECK(j["criteria"][0]["status"] == "resolution-limited");
  CHECK_FALSE(j["criteria"][0].contains("seconds"));
}

TEST_CASE("kappa completes a coupled kind") {
  const Run r = cli({"energy", "--map", "hopf", "--kind", "coupled-symplectic", "--kappa", "2", "--res", "8"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["result"]["kind"] == "coupled-symplectic:2");
}
