#include "doctest.h"
#include "files.hpp"

#include "json.hpp"

#include <cstdlib>
#include <map>
#include <sys/wait.h>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(ORDMIX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string without_times(const fs::path& manifest) {
  Json m = Json::parse(testing::read_text(manifest));
  for (const char* k : {"started_at", "finished_at", "wall_seconds"}) m.erase(k);
  return m.dump();
}

// Every artifact byte-for-byte, the manifest without its clock fields.
void expect_identical_rerun(const fs::path& dir, const std::string& args) {
  REQUIRE(cli(args) == 0);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) first[e.path().filename().string()] = testing::read_text(e.path());
  const std::string manifest = without_times(dir / "manifest.json");
  REQUIRE(cli(args) == 0);
  for (const auto& [name, text] : first) {
    if (name == "manifest.json") continue;
    INFO(name);
    CHECK(testing::read_text(dir / name) == text);
  }
  CHECK(without_times(dir / "manifest.json") == manifest);
}

}  // namespace

TEST_CASE("command line runs are reproducible") {
  const auto dir = testing::scratch_dir("cli");
  const auto gen = dir / "gen";
  expect_identical_rerun(gen, "generate --seed 3 --tiers easy --replications 1 --n 600 -o " + gen.string());
  const auto input = (gen / "easy_r1.csv").string();
  const auto schema = (gen / "easy_r1.json").string();

  const auto sel = dir / "select";
  expect_identical_rerun(sel, "select -i " + input + " --schema " + schema +
                                  " -s 7 --k-grid 2,3 --folds 2 --restarts 1 -j 2 -o " + sel.string());
  for (const char* f : {"selection.json", "model.json", "model_comparison.csv", "k_curve.csv", "assignments.csv"})
    CHECK(fs::exists(sel / f));
  CHECK(testing::read_text(sel / "k_curve.csv").rfind("k,mse,mse_sd,selected\n", 0) == 0);
  CHECK(testing::read_text(sel / "model_comparison.csv").rfind("model,mse,delta_vs_baseline\n", 0) == 0);

  const auto boot = dir / "boot";
  expect_identical_rerun(boot, "bootstrap -i " + input + " -s 7 --k-grid 2,3 --folds 2 --restarts 1 -B 2 -j 2 -o " +
                                   boot.string());
  CHECK(fs::exists(boot / "bootstrap.csv"));

  const auto bench = dir / "bench";
  expect_identical_rerun(bench, "benchmark -s 5 --tiers stress --replications 1 --n 500 --no-select-k --restarts 1 -o " +
                                    bench.string());
  CHECK(testing::read_text(bench / "benchmark.csv").rfind("tier,replicate,model,metric,value\n", 0) == 0);

  const auto sens = dir / "sens";
  expect_identical_rerun(sens, "sensitivity -i " + input + " -s 7 --k-grid 2,3 --folds 2 --restarts 1 --axes alpha,weights "
                                   "--alphas 1,2 --replicates 1 -o " + sens.string());
  CHECK(fs::exists(sens / "sensitivity.csv"));
}

TEST_CASE("command line errors and configuration files") {
  const auto dir = testing::scratch_dir("cli_err");
  CHECK(cli("fit -o " + (dir / "a").string()) == 2);
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(cli("fit -s 1 -i " + (dir / "missing.csv").string() + " -o " + (dir / "b").string()) == 2);
  const auto bad = testing::write_text(dir / "bad.csv", "a,b\n1,2\n2,zz\n");
  CHECK(cli("fit -s 1 -i " + bad + " -o " + (dir / "c").string()) == 3);
  CHECK(cli("nonsense") == 2);
  CHECK(cli("--version") == 0);

  const auto cfg = testing::write_text(dir / "cfg.json", R"({"seed": 11, "benchmark": {"replications": 1, "n": 300}})");
  REQUIRE(cli("generate -s 1 --tiers hard -c " + cfg + " -o " + (dir / "d").string()) == 0);
  const Json m = Json::parse(testing::read_text(dir / "d" / "manifest.json"));
  CHECK(m["config"]["seed"] == 11);
  CHECK(m["outputs"].size() == 2);
  CHECK(cli("generate -c " + testing::write_text(dir / "broken.json", "{") + " -o " + (dir / "e").string()) == 2);
}
