#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corpus.hpp"
#include "engdiv/cli.hpp"
#include "engdiv/instances.hpp"
#include "engdiv/policies.hpp"

using namespace engdiv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "engdiv_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen tight then frontier meets the bound") {
  const fs::path dir = fresh("tight");
  const std::string d = dir.string();
  REQUIRE(invoke({"gen", "tight", "--n", "10", "--T", "4", "--alpha", "0.5", "--beta", "0.8", "--out", d}).code == 0);
  const Run r = invoke({"frontier", "--instance", d + "/instance.json", "--scales", "1", "--out", d});
  CHECK(r.code == 0);
  std::istringstream csv(slurp(dir / "frontier.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<double> v;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::atof(cell.c_str()));
    CHECK(std::fabs(v[3] - v[4]) <= 1e-7);
    ++rows;
  }
  CHECK(rows == 10);
  const auto m = json_file(dir / "manifest.json");
  CHECK(m["command"] == "frontier");
  CHECK(m["instances"][0]["hash"].get<std::string>().size() == 16);
  CHECK(m["version"] == cli::kVersion);
  CHECK_FALSE(m.contains("timestamp"));
  CHECK(fs::exists(dir / "frontier.svg"));
}

TEST_CASE("solve at delta 0 reports the closed form") {
  const fs::path dir = fresh("solve");
  const std::string d = dir.string();
  REQUIRE(invoke({"gen", "random", "--n", "12", "--T", "3", "--seed", "5", "--edge-prob", "0.2", "--out", d}).code == 0);
  const Run r = invoke({"solve", "--instance", d + "/instance.json", "--delta", "0", "--mps", "lp.mps", "--out", d});
  CHECK(r.code == 0);
  const auto rep = json_file(dir / "solve.json");
  const double closed = optimal_policy(instances::read_instance(dir / "instance.json")).value;
  CHECK(rep["opt_eng"].get<double>() == doctest::Approx(closed).epsilon(1e-12));
  CHECK(rep["opt_delta"].get<double>() == doctest::Approx(closed).epsilon(1e-9));
  CHECK(rep["passed"] == true);
  CHECK(fs::exists(dir / "lp.mps"));
  CHECK(fs::exists(dir / "policy_lp.json"));
}

TEST_CASE("simulate with a stored policy") {
  const fs::path dir = fresh("simulate");
  const std::string d = dir.string();
  REQUIRE(invoke({"gen", "--n", "6", "--T", "2", "--seed", "1", "--out", d}).code == 0);
  REQUIRE(invoke({"solve", "--instance", d + "/instance.json", "--delta", "0.2", "--out", d}).code == 0);
  const Run r = invoke({"simulate", "--instance", d + "/instance.json", "--policy", d + "/policy_lp.json",
                     "--steps", "30", "--out", d});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "trajectory.csv").rfind("step,type,user,exposure\n", 0) == 0);
  CHECK(json_file(dir / "simulate.json")["method"] == "file");
  CHECK(invoke({"simulate", "--instance", d + "/instance.json", "--method", "exact", "--out", d}).code ==
        cli::kConfigError);
}

TEST_CASE("ingest then frontier across sources and scales") {
  const fs::path dir = fresh("ingest");
  const std::string d = dir.string();
  const auto planted = corpus::planted(2);
  std::ofstream(dir / "edges.tsv") << planted.edges_tsv;
  std::ofstream(dir / "tweets.jsonl") << planted.tweets_jsonl;
  const Run r = invoke({"ingest", "--edges", d + "/edges.tsv", "--tweets", d + "/tweets.jsonl", "--seed", "3", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "mode.json"));
  CHECK(fs::exists(dir / "beta_sample_2.json"));
  CHECK(fs::exists(dir / "types.csv"));
  CHECK(json_file(dir / "manifest.json")["communities"] == 2);

  const Run f = invoke({"frontier", "--instance", d + "/mode.json", "--instance", d + "/beta_sample_1.json",
                     "--scales", "1,3,10,30", "--cap", "0.99", "--threads", "2", "--out", d});
  CHECK(f.code == 0);
  const std::string csv = slurp(dir / "frontier.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4 * 10);
  const std::string svg = slurp(dir / "frontier.svg");
  CHECK(svg.find("beta_sample_1 x30") != std::string::npos);
  CHECK(svg.find("main bound") != std::string::npos);
}

TEST_CASE("frontier output does not depend on the thread count") {
  const fs::path dir = fresh("threads");
  const std::string d = dir.string();
  REQUIRE(invoke({"gen", "--n", "15", "--T", "3", "--seed", "8", "--edge-prob", "0.2", "--out", d}).code == 0);
  REQUIRE(invoke({"frontier", "--instance", d + "/instance.json", "--threads", "1", "--out", d + "/a"}).code == 0);
  REQUIRE(invoke({"frontier", "--instance", d + "/instance.json", "--threads", "3", "--out", d + "/b"}).code == 0);
  CHECK(slurp(dir / "a/frontier.csv") == slurp(dir / "b/frontier.csv"));
  CHECK(slurp(dir / "a/frontier.svg") == slurp(dir / "b/frontier.svg"));
}

TEST_CASE("verify on 100 random instances") {
  const fs::path dir = fresh("verify");
  const Run r = invoke({"verify", "--random", "100", "--seed", "21", "--steps", "40", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rep = json_file(dir / "verify.json");
  CHECK(rep["failed"] == 0);
  CHECK(rep["instances"].size() == 100);
  std::size_t bound_checks = 0;
  for (const auto& inst : rep["instances"]) {
    for (const auto& c : inst["theorem2"]) {
      if (c["name"] == "cost_within_main_bound" || c["name"] == "cost_within_worst_case_bound") {
        ++bound_checks;
        CHECK(c["passed"] == true);
      }
    }
  }
  CHECK(bound_checks >= 100 * 11);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh("codes");
  const std::string d = dir.string();
  CHECK(invoke({}).code == cli::kConfigError);
  CHECK(invoke({"frobnicate"}).code == cli::kConfigError);
  CHECK(invoke({"--help"}).code == cli::kOk);
  CHECK(invoke({"solve", "--instance", d + "/missing.json"}).code == cli::kIoError);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(invoke({"solve", "--instance", d + "/broken.json"}).code == cli::kIoError);
  REQUIRE(invoke({"gen", "--n", "4", "--T", "2", "--out", d}).code == 0);
  CHECK(invoke({"solve", "--instance", d + "/instance.json", "--delta", "0.6"}).code == cli::kConfigError);
  CHECK(invoke({"gen", "tight", "--T", "1", "--out", d}).code == cli::kConfigError);
  CHECK(invoke({"frontier", "--instance", d + "/instance.json", "--cap", "1.5", "--out", d}).code ==
        cli::kConfigError);
  CHECK(invoke({"verify", "--out", d}).code == cli::kConfigError);
}

}  // TEST_SUITE
