#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "nadev/commands.hpp"

using namespace nadev;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "nadev");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("nadev_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch() {
  static const ScratchDir dir;
  return dir.path;
}

std::string write_config(const std::string& name, const std::string& body) {
  const auto p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* kRademacher = R"("distributions": [{"kind": "bounded_discrete", "support": [[-1, 0.5], [1, 0.5]], "count": 50}])";

std::string population_config(const std::string& bounds, const std::string& extra = "") {
  return std::string(R"({"model": {"kind": "without_replacement", "name": "pop", "population": {"balanced": 200}, "n_draw": 50},
    "bounds": [)") + bounds + "]," + extra + R"("run": {"x_grid": [5, 10, 15], "reps": 20000, "seed": 3}})";
}

}  // namespace

TEST_CASE("usage and configuration errors exit with 2", "[cli]") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"eval", "--config", "/nonexistent/x.json", "--bound", "b", "--x", "1"}).code == 2);
  const auto bad = write_config("bad.json", "{ not json");
  CHECK(run({"sweep", "--config", bad}).code == 2);
  const auto unknown = write_config("unknown.json", std::string("{") + kRademacher +
                                                         R"(, "bounds": [{"name": "no_such_bound"}], "run": {"x_grid": [1]}})");
  const auto r = run({"sweep", "--config", unknown});
  CHECK(r.code == 2);
  CHECK(r.err.find("no_such_bound") != std::string::npos);
  const auto unsorted = write_config("unsorted.json", std::string("{") + kRademacher +
                                                          R"(, "bounds": [{"name": "hoeffding_azuma"}], "run": {"x_grid": [2, 1]}})");
  CHECK(run({"sweep", "--config", unsorted}).code == 2);
  const auto typo = write_config("typo.json", std::string("{") + kRademacher +
                                                  R"(, "bounds": [{"name": "rio", "alhpa": 0.5}], "run": {"x_grid": [1]}})");
  CHECK(run({"sweep", "--config", typo}).code == 2);
  // the eval target must exist
  const auto ok = write_config("ok.json", std::string("{") + kRademacher +
                                              R"(, "bounds": [{"id": "ha", "name": "hoeffding_azuma"}], "run": {"x_grid": [1]}})");
  CHECK(run({"eval", "--config", ok, "--bound", "missing", "--x", "1"}).code == 2);
  // validation needs enough replicates
  const auto few = write_config("few.json", population_config(R"({"name": "hoeffding_azuma"})"));
  CHECK(run({"validate", "--config", few, "--reps", "999"}).code == 2);
}

TEST_CASE("eval prints the chosen parameters and values", "[cli]") {
  const auto cfg = write_config("eval.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "rio_closed", "name": "rio", "form": "closed", "alpha": 0.5},
      {"id": "fuk_half", "name": "fuk", "p": 3, "alpha": 0.5, "B_n": 50, "V_n": 50},
      {"id": "semi_bad", "name": "semi_exponential", "p": 0.5, "K_n": 0.5, "alpha": 0.5}],
      "run": {"x_grid": [1]}})");
  auto r = run({"eval", "--config", cfg, "--bound", "rio_closed", "--x", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("raw_value      1\n") != std::string::npos);
  CHECK(r.out.find("family         Rio\n") != std::string::npos);
  CHECK(r.out.find("alpha          0.5\n") != std::string::npos);

  // alpha = 1/2: 2 (1 + 2/p)^p 2^p V_n / x^p + 2 exp{-x^2 / ((p + 2)^2 e^p B_n)}
  r = run({"eval", "--config", cfg, "--bound", "fuk_half", "--x", "20"});
  REQUIRE(r.code == 0);
  const double p = 3.0, x = 20.0;
  const double expected = 2.0 * std::pow(1.0 + 2.0 / p, p) * std::pow(2.0, p) * 50.0 / std::pow(x, p) +
                          2.0 * std::exp(-x * x / ((p + 2.0) * (p + 2.0) * std::exp(p) * 50.0));
  const auto pos = r.out.find("raw_value");
  REQUIRE(pos != std::string::npos);
  CHECK_THAT(std::stod(r.out.substr(pos + 15)), Catch::Matchers::WithinRel(expected, 1e-12));

  r = run({"eval", "--config", cfg, "--bound", "semi_bad", "--x", "3"});
  CHECK(r.code == 3);
  CHECK(r.err.find("K_n must be >= 1") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("sweep CSV shape and determinism", "[cli]") {
  const auto single = write_config("single.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "ha", "name": "hoeffding_azuma"}], "run": {"x_grid": [3]}})");
  auto r = run({"sweep", "--config", single});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "x,bound,alpha,y,raw_value,clipped_value");
  CHECK(ls[1] == "3,ha,,," + fmt17(std::exp(-2.0 * 9.0 / 200.0)) + "," + fmt17(std::exp(-2.0 * 9.0 / 200.0)));

  const auto grid = write_config("grid.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "H_n", "name": "fuk_nagaev_h", "v": 1.0, "alpha": 0.5},
      {"id": "bennett", "name": "bennett", "v": 1.0, "alpha": 0.5},
      {"id": "bern_sharp", "name": "bernstein_condition", "form": "sharp", "alpha": "auto"},
      {"id": "rio_young", "name": "rio", "form": "young", "alpha": "auto"},
      {"id": "fn", "name": "fuk_nagaev", "form": "bernstein", "alpha": 0.5, "y": "default"}],
      "run": {"x_grid": {"from": 0.5, "to": 40, "num": 100}}})");
  const auto out_path = (scratch() / "grid.csv").string();
  r = run({"sweep", "--config", grid, "--out", out_path});
  REQUIRE(r.code == 0);
  const auto first = slurp(out_path);
  ls = lines(first);
  CHECK(ls.size() == 501);
  // H_n <= Bennett row by row
  for (std::size_t i = 1; i < ls.size(); i += 5) {
    const auto h = split(ls[i]);
    const auto b = split(ls[i + 1]);
    REQUIRE(h[1] == "H_n");
    REQUIRE(b[1] == "bennett");
    CHECK(std::stod(h[4]) <= std::stod(b[4]) * (1.0 + 1e-12));
  }
  r = run({"sweep", "--config", grid, "--out", out_path, "--threads", "8"});
  REQUIRE(r.code == 0);
  CHECK(slurp(out_path) == first);
}

TEST_CASE("a failing sweep leaves no output file", "[cli]") {
  const auto cfg = write_config("fail.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "rio_closed", "name": "rio", "form": "closed", "alpha": 0.5}],
      "run": {"x_grid": [10, 50, 150]}})");
  const auto out_path = scratch() / "fail.csv";
  fs::remove(out_path);
  const auto r = run({"sweep", "--config", cfg, "--out", out_path.string()});
  CHECK(r.code == 3);
  CHECK_FALSE(fs::exists(out_path));
  CHECK_FALSE(fs::exists(out_path.string() + ".partial"));
}

TEST_CASE("validate exit status", "[cli]") {
  const auto easy = write_config(
      "easy.json", population_config(R"({"id": "loose", "name": "bernstein_condition", "form": "simple", "alpha": 0.9})"));
  auto r = run({"validate", "--config", easy});
  CHECK(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0] == "check,model,x,bound,p_hat,ci_high,bound_raw,dominated,margin");
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(split(ls[i])[7] == "true");

  const auto corrupt = write_config(
      "corrupt.json", population_config(R"({"id": "bern_sharp", "name": "bernstein_condition", "form": "sharp", "alpha": "auto"},
        {"id": "shrunk", "name": "bernstein_condition", "form": "sharp", "alpha": "auto", "scale": 1e-6})"));
  r = run({"validate", "--config", corrupt});
  CHECK(r.code == 1);
  CHECK(r.err.find("finding: bound 'shrunk'") != std::string::npos);
  CHECK(r.err.find("finding: bound 'bern_sharp'") == std::string::npos);
}

TEST_CASE("validate output does not depend on threads", "[cli]") {
  const auto cfg = write_config(
      "det.json",
      population_config(R"({"id": "ha", "name": "hoeffding_azuma"}, {"id": "rio", "name": "rio", "alpha": "auto"})",
                        R"("convex_tests": [{"kind": "shifted_square", "a": 1}],
                           "supermartingale": {"t": 0.5, "sigma": 1, "n": 20, "alpha": 0.5, "reps": 5000},)"));
  const auto a = (scratch() / "det1.csv").string();
  const auto b = (scratch() / "det8.csv").string();
  REQUIRE(run({"validate", "--config", cfg, "--out", a, "--threads", "1"}).code == 0);
  REQUIRE(run({"validate", "--config", cfg, "--out", b, "--threads", "8"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(lines(slurp(a)).size() == 1 + 6 + 2 + 1);
  // a different seed changes the estimates
  REQUIRE(run({"validate", "--config", cfg, "--out", b, "--seed", "4"}).code == 0);
  CHECK(slurp(a) != slurp(b));
}

TEST_CASE("compare ranks bounds and reports ties", "[cli]") {
  const auto twice = write_config("twice.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "a", "name": "hoeffding_azuma"}, {"id": "b", "name": "hoeffding_azuma"}],
      "run": {"x_grid": [4]}})");
  auto r = run({"compare", "--config", twice});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == "x,rank,bound,family,raw_value,tightest,tie");
  CHECK(split(ls[1])[6] == "true");
  CHECK(split(ls[2])[6] == "true");

  const auto bern = write_config("bern.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "simple", "name": "bernstein_condition", "form": "simple", "alpha": 0.5, "M": 1},
      {"id": "sharp", "name": "bernstein_condition", "form": "sharp", "alpha": 0.5, "M": 1}],
      "run": {"x_grid": {"from": 1, "to": 60, "num": 30}}})");
  r = run({"compare", "--config", bern});
  REQUIRE(r.code == 0);
  ls = lines(r.out);
  REQUIRE(ls.size() == 61);
  for (std::size_t i = 1; i < ls.size(); i += 2) {
    const auto row = split(ls[i]);
    CHECK(row[2] == "sharp");
    CHECK(row[5] == "true");
  }

  const auto one = write_config("one.json", std::string("{") + kRademacher + R"(, "bounds": [
      {"id": "a", "name": "hoeffding_azuma"}], "run": {"x_grid": [4]}})");
  CHECK(run({"compare", "--config", one}).code == 2);
}
