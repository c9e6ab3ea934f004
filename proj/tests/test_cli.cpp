#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "vilab/commands.hpp"
#include "vilab/rng.hpp"

using namespace vilab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    path_ = fs::temp_directory_path() / ("vilab_cli_test_" + std::to_string(derive_seed({++counter, 0xd1})));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const TempDir& dir, const std::string& name, const json& j) {
  const fs::path p = dir.path() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json operator_problem(double noise) {
  return {{"kind", "operator"},
          {"seed", 3},
          {"mu_target", 0.5},
          {"L_target", 1.0},
          {"domain", {{"type", "box"}, {"lower", {-1, -1, -1}}, {"upper", {1, 1, 1}}}},
          {"noise", {{"kind", "offset"}, {"magnitude", noise}}}};
}

json game_problem(double noise) {
  return {{"kind", "game"},
          {"seed", 4},
          {"k", 3},
          {"dims", {2, 2, 2}},
          {"mu_target", 0.5},
          {"coupling_strength", 0.5},
          {"domain", {{"type", "box"}, {"lower", {-1, -1}}, {"upper", {1, 1}}}},
          {"noise", {{"kind", "offset"}, {"magnitude", noise}}}};
}

}  // namespace

TEST_CASE("solve writes a gap report") {
  TempDir dir;
  json cfg = {{"seed", 1}, {"problem", operator_problem(0.0)}, {"solver", {{"eta", 0.5}, {"T", 3000}}}};
  const fs::path path = write_config(dir, "solve_config.json", cfg);
  const CliRun r = cli({"solve", "--config", path.string(), "--out-dir", dir.path().string(), "--workers", "1"});
  CHECK(r.code == 0);
  const json summary = json::parse(slurp(dir.path() / "solve.json"));
  CHECK(summary["results"]["gaps"]["gap_true"].get<double>() <= 1e-8);
  for (const char* key : {"config", "constants", "results", "bounds", "manifest"}) CHECK(summary.contains(key));
  CHECK(fs::exists(dir.path() / "solve_manifest.json"));
  const json manifest = json::parse(slurp(dir.path() / "solve_manifest.json"));
  CHECK(manifest.contains("started_at"));
  CHECK(manifest["version"] == kVersion);

  const std::string first = slurp(dir.path() / "solve.json");
  const CliRun again = cli({"solve", "--config", path.string(), "--out-dir", dir.path().string()});
  INFO(again.err);
  CHECK(again.code == 0);
  CHECK(slurp(dir.path() / "solve.json") == first);
}

TEST_CASE("solve rejects a step size outside the GD range") {
  TempDir dir;
  json cfg = {{"problem", operator_problem(0.1)}, {"solver", {{"eta", 5.0}}}};
  const fs::path path = write_config(dir, "bad.json", cfg);
  const CliRun r = cli({"solve", "--config", path.string(), "--out-dir", dir.path().string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("eta exceeds 2*mu/L^2") != std::string::npos);
}

TEST_CASE("config and usage errors exit with code 2") {
  TempDir dir;
  CHECK(cli({}).code == kExitConfig);
  CHECK(cli({"launch", "--config", "x.json"}).code == kExitConfig);
  CHECK(cli({"solve"}).code == kExitConfig);
  CHECK(cli({"solve", "--config", (dir.path() / "missing.json").string()}).code == kExitConfig);
  json cfg = {{"problem", operator_problem(0.1)}, {"solver", {{"eta", 0.5}, {"warmup", 3}}}};
  const CliRun r = cli({"solve", "--config", write_config(dir, "unknown.json", cfg).string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("solver.warmup") != std::string::npos);
  std::ofstream(dir.path() / "broken.json") << "{ not json";
  CHECK(cli({"solve", "--config", (dir.path() / "broken.json").string()}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("numerical failures exit with code 3") {
  TempDir dir;
  json cfg = {{"problem", operator_problem(0.1)}, {"solver", {{"method", "eg"}, {"eta", 3.0}, {"T", 200}}}};
  const CliRun r = cli({"solve", "--config", write_config(dir, "diverge.json", cfg).string(), "--out-dir",
                        dir.path().string()});
  CHECK(r.code == kExitNumerical);
}

TEST_CASE("contraction command") {
  TempDir dir;
  json problem = operator_problem(0.0);
  problem["mu_target"] = 1.0;
  json cfg = {{"problem", problem},
              {"solver", {{"method", "gd"}}},
              {"experiment", {{"eta_grid", {0.25, 1.0}}, {"pairs", 200}}}};
  const CliRun r = cli({"contraction", "--config", write_config(dir, "c.json", cfg).string(), "--out-dir",
                        dir.path().string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(dir.path() / "contraction.csv");
  CHECK(csv.rfind("eta,method,measured_max_ratio,theoretical_bound,pairs\n", 0) == 0);
  const json summary = json::parse(slurp(dir.path() / "contraction.json"));
  const json& row = summary["results"]["rows"][1];
  CHECK(row["eta"] == 1.0);
  CHECK(row["theoretical_bound"] == 0.0);
  CHECK(row["measured_max_ratio"].get<double>() <= 1e-9);

  json weak = {{"problem", operator_problem(0.0)}, {"solver", {{"method", "eg"}}}, {"experiment", {{"pairs", 50}}}};
  weak["problem"]["mu_target"] = 0.4;
  CHECK(cli({"contraction", "--config", write_config(dir, "w.json", weak).string(), "--out-dir", dir.path().string()})
            .code == 0);
  CHECK(json::parse(slurp(dir.path() / "contraction.json"))["results"]["admissible_empty"] == true);
}

TEST_CASE("stability command") {
  TempDir dir;
  json cfg = {{"problem", operator_problem(0.0)},
              {"solver", {{"eta", "auto"}, {"T", 500}}},
              {"experiment", {{"n_grid", {16, 64}}, {"trials", 5}}}};
  CHECK(cli({"stability", "--config", write_config(dir, "s.json", cfg).string(), "--out-dir", dir.path().string()})
            .code == 0);
  std::istringstream csv(slurp(dir.path() / "stability.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,trial,divergence");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 10);

  cfg["solver"] = {{"method", "eg"}, {"eta", 0.3}, {"T", 300}};
  cfg["problem"]["noise"]["magnitude"] = 0.3;
  CHECK(cli({"stability", "--config", write_config(dir, "e.json", cfg).string(), "--out-dir", dir.path().string()})
            .code == 0);
  const json summary = json::parse(slurp(dir.path() / "stability.json"));
  CHECK(summary["results"]["per_n"][0]["bound"] == "informational");
}

TEST_CASE("sweep command") {
  TempDir dir;
  json cfg = {{"problem", game_problem(0.5)},
              {"solver", {{"eta", "auto"}, {"projected", true}}},
              {"experiment", {{"n_grid", {16, 32, 64}}, {"trials", 10}, {"kind", "weak_gap"}}},
              {"output", {{"csv_path", "rates.csv"}, {"svg_path", "rates.svg"}}}};
  CHECK(cli({"sweep", "--config", write_config(dir, "sw.json", cfg).string(), "--out-dir", dir.path().string()})
            .code == 0);
  const std::string csv = slurp(dir.path() / "rates.csv");
  CHECK(csv.rfind("n,trial,value,kind\n", 0) == 0);
  CHECK(csv.find(",weak_gap\n") != std::string::npos);
  CHECK(slurp(dir.path() / "rates.svg").find("<svg") != std::string::npos);
  const json summary = json::parse(slurp(dir.path() / "sweep.json"));
  CHECK(summary["results"].contains("slope"));
  CHECK(summary["results"]["per_n"][0].contains("bounds_eta_to_zero"));
  CHECK(summary["results"]["per_n"][0].contains("bounds_configured_eta"));
  CHECK(summary["bounds"]["game_bound"].get<double>() > 0.0);
}

TEST_CASE("bernstein command") {
  TempDir dir;
  json cfg = {{"problem", game_problem(0.3)}, {"experiment", {{"z_samples", 5}, {"mc_samples", 500}}}};
  CHECK(cli({"bernstein", "--config", write_config(dir, "b.json", cfg).string(), "--out-dir", dir.path().string()})
            .code == 0);
  std::istringstream csv(slurp(dir.path() / "bernstein.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "sample_index,lhs,rhs,B");
  std::getline(csv, line);
  CHECK(line.rfind("0,0,0,", 0) == 0);
  const json summary = json::parse(slurp(dir.path() / "bernstein.json"));
  CHECK(summary["results"]["violations"] == 0);

  json op = {{"problem", operator_problem(0.3)}};
  CHECK(cli({"bernstein", "--config", write_config(dir, "o.json", op).string(), "--out-dir", dir.path().string()})
            .code == kExitConfig);
}

TEST_CASE("seed override and worker count do not change determinism") {
  TempDir a;
  TempDir b;
  json cfg = {{"seed", 5},
              {"problem", operator_problem(0.4)},
              {"solver", {{"eta", "auto"}, {"T", 300}}},
              {"experiment", {{"n_grid", {16, 32}}, {"trials", 6}}}};
  const fs::path path = write_config(a, "s.json", cfg);
  CHECK(cli({"stability", "--config", path.string(), "--out-dir", a.path().string(), "--workers", "1"}).code == 0);
  CHECK(cli({"stability", "--config", path.string(), "--out-dir", b.path().string(), "--workers", "4"}).code == 0);
  CHECK(slurp(a.path() / "stability.csv") == slurp(b.path() / "stability.csv"));
  CHECK(slurp(a.path() / "stability.json") == slurp(b.path() / "stability.json"));
  CHECK(cli({"stability", "--config", path.string(), "--out-dir", b.path().string(), "--seed", "6"}).code == 0);
  CHECK(slurp(a.path() / "stability.csv") != slurp(b.path() / "stability.csv"));
}
