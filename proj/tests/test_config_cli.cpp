#include <sys/wait.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "twofirm/config.hpp"
#include "twofirm/csv.hpp"
#include "twofirm/grid.hpp"

using namespace twofirm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs{TWOFIRM_CONFIG_DIR};
const std::string kCli{TWOFIRM_CLI_PATH};

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("twofirm_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = kCli + " " + args + " > " + stdout_file.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

json minimal_config() {
  return json::parse(R"({
    "schema_version": 1,
    "model": {"horizon": 1.0, "ordered_defaults": false, "d0": 1.0,
              "states": {"00": {"mu": 0.05, "sigma": 0.2, "sigmaA": -0.4, "sigmaB": -0.3,
                                "lambdaA": 0.1, "lambdaB": 0.05},
                         "10": {"mu": 0.05, "sigma": 0.2, "sigmaB": -0.3, "lambdaB": 0.05},
                         "01": {"mu": 0.05, "sigma": 0.2, "sigmaA": -0.4, "lambdaA": 0.1},
                         "11": {"mu": 0.05, "sigma": 0.2}}},
    "mc": {"n_paths": 10, "seed": 3, "n_steps": 20}
  })");
}

}  // namespace

TEST_CASE("shipped configs round-trip through JSON") {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const RunConfig cfg = load_config(entry.path());
    const RunConfig back = parse_config(json::parse(to_json(cfg).dump()));
    CHECK(back == cfg);
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("time-dependent coefficients round-trip") {
  json j = minimal_config();
  j["model"]["states"]["00"]["lambdaA"] = {0.1, 0.05, 0.001};
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.model[DefaultState{0, 0}].lambdaA.coeffs().size() == 3);
  CHECK(parse_config(to_json(cfg)) == cfg);
}

TEST_CASE("schema version is mandatory") {
  json j = minimal_config();
  j.erase("schema_version");
  CHECK_THROWS_AS(parse_config(j), ValidationError);
  j["schema_version"] = 99;
  CHECK_THROWS_AS(parse_config(j), ValidationError);
}

TEST_CASE("commands require their blocks") {
  const json j = minimal_config();
  CHECK_NOTHROW(require_blocks(j, "simulate"));
  CHECK_THROWS_AS(require_blocks(j, "price-indifference"), ValidationError);
  CHECK_THROWS_AS(require_blocks(j, "hedge-mvh"), ValidationError);
}

TEST_CASE("model invariants surface through config parsing") {
  json j = minimal_config();
  j["model"]["states"]["00"]["sigmaA"] = -1.2;
  try {
    parse_config(j);
    FAIL("accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string{e.what()}.find("bond positivity violated") != std::string::npos);
  }
}

TEST_CASE("doubles print in shortest round-trip form") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678, 0.0}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("tridiagonal solve") {
  const std::vector<double> lo{0, -1, -1, -1}, di{2, 2, 2, 2}, up{-1, -1, -1, 0};
  std::vector<double> x{1, 0, 0, 1};
  solve_tridiagonal(lo, di, up, x);
  for (double v : x) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("linear interpolation extrapolates from the end cells") {
  const UniformGrid g = UniformGrid::span(0.0, 2.0, 3);
  const std::vector<double> v{0.0, 1.0, 4.0};
  CHECK(interp_linear(v, g, 0.5) == doctest::Approx(0.5));
  CHECK(interp_linear(v, g, 1.5) == doctest::Approx(2.5));
  CHECK(interp_linear(v, g, 3.0) == doctest::Approx(7.0));
  CHECK(interp_linear(v, g, -1.0) == doctest::Approx(-1.0));
}

TEST_CASE("cli simulate writes one block per path") {
  const fs::path d = scratch("sim");
  std::ofstream(d / "cfg.json") << minimal_config().dump();
  CHECK(run_cli("simulate --config " + (d / "cfg.json").string() + " --out " + (d / "a").string(),
                d / "stdout.txt") == 0);
  std::ifstream csv(d / "a" / "paths.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "path_id,step,t,dW,bond,hA,hB");
  std::set<std::string> ids;
  while (std::getline(csv, line)) ids.insert(line.substr(0, line.find(',')));
  CHECK(ids.size() == 10);
  const json report = json::parse(slurp(d / "a" / "report.json"));
  CHECK(report["status"] == "ok");
}

TEST_CASE("cli simulate is byte-identical for a fixed seed") {
  const fs::path d = scratch("det");
  std::ofstream(d / "cfg.json") << minimal_config().dump();
  const std::string cfg = " --config " + (d / "cfg.json").string();
  REQUIRE(run_cli("simulate" + cfg + " --seed 5 --out " + (d / "a").string(), d / "o1") == 0);
  REQUIRE(run_cli("simulate" + cfg + " --seed 5 --out " + (d / "b").string(), d / "o2") == 0);
  REQUIRE(run_cli("simulate" + cfg + " --seed 6 --out " + (d / "c").string(), d / "o3") == 0);
  CHECK(slurp(d / "a" / "paths.csv") == slurp(d / "b" / "paths.csv"));
  CHECK(slurp(d / "a" / "paths.csv") != slurp(d / "c" / "paths.csv"));
}

TEST_CASE("cli reports validation failures with exit 2") {
  const fs::path d = scratch("bad");
  json j = minimal_config();
  j["model"]["states"]["00"]["sigmaA"] = -1.2;
  std::ofstream(d / "cfg.json") << j.dump();
  CHECK(run_cli("simulate --config " + (d / "cfg.json").string(), d / "out.json") == 2);
  const json report = json::parse(slurp(d / "out.json"));
  CHECK(report["status"] == "validation failure");
  CHECK(report["message"].get<std::string>().find("bond positivity violated") != std::string::npos);
}

TEST_CASE("cli hedge-mvh on the trivial config") {
  const fs::path d = scratch("hedge");
  CHECK(run_cli("hedge-mvh --config " + (kConfigs / "trivial.json").string() + " --paths 200 --out " +
                    (d / "o").string(),
                d / "stdout.txt") == 0);
  const json r = json::parse(slurp(d / "o" / "report.json"))["report"];
  CHECK(r["theta0"].get<double>() == doctest::Approx(1.0));
  CHECK(r["y0"].get<double>() == 0.0);
  CHECK(r["xi0"].get<double>() == 0.0);
  CHECK(r["value"].get<double>() == doctest::Approx(1.0));
  CHECK(r["n_paths"] == 200);
  CHECK(fs::exists(d / "o" / "mvh_surface.csv"));
}

TEST_CASE("cli price-indifference on the trivial config prices zero") {
  const fs::path d = scratch("price");
  CHECK(run_cli("price-indifference --config " + (kConfigs / "trivial.json").string() + " --paths 1 --out " +
                    (d / "o").string(),
                d / "stdout.txt") == 0);
  const json r = json::parse(slurp(d / "o" / "report.json"))["report"];
  CHECK(r["price"].get<double>() == 0.0);
  CHECK(fs::exists(d / "o" / "value_surface.csv"));
}

TEST_CASE("cli verify passes on the trivial config") {
  const fs::path d = scratch("verify");
  CHECK(run_cli("verify --config " + (kConfigs / "trivial.json").string(), d / "out.json") == 0);
  const json r = json::parse(slurp(d / "out.json"));
  CHECK(r["status"] == "ok");
}
