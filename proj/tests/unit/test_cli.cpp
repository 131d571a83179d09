#include <doctest.h>

#include <fstream>
#include <sstream>

#include "perturbopt/harness/config.hpp"
#include "perturbopt_cli/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using perturbopt::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "perturbopt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Bundled two-moons config shortened to a couple of epochs.
fs::path short_config(const fs::path& dir) {
  auto j = perturbopt::harness::read_json_file(fs::path(PERTURBOPT_CONFIG_DIR) / "two_moons.json");
  j["epochs"] = 2;
  j["analysis"]["landscape"]["n1"] = 5;
  j["analysis"]["landscape"]["n2"] = 4;
  j["analysis"]["radius"]["n_samples"] = 10;
  j["analysis"]["radius"]["n_radii"] = 3;
  const auto path = dir / "cfg.json";
  std::ofstream(path) << j.dump();
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("unknown subcommand and missing files exit 1") {
  auto r = cli({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("frobnicate") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = cli({});
  CHECK(r.code == 1);
  r = cli({"train", "/no/such/config.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("/no/such/config.json") != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("train then analyse a checkpoint") {
  const auto dir = testsupport::scratch_dir("cli");
  const auto cfg = short_config(dir).string();
  const auto out = (dir / "out").string();
  auto r = cli({"--out", out, "train", cfg});
  REQUIRE(r.code == 0);
  for (const char* f : {"run.csv", "epochs.csv", "final.pvec", "summary.json"}) CHECK(fs::exists(dir / "out" / f));
  const auto ckpt = (dir / "out" / "final.pvec").string();
  CHECK(cli({"landscape", ckpt, cfg, "--out", out}).code == 0);
  CHECK(fs::exists(dir / "out" / "landscape.csv"));
  CHECK(cli({"spectrum", ckpt, cfg, "--out", out}).code == 0);
  CHECK(fs::exists(dir / "out" / "spectrum.json"));
  CHECK(cli({"radius", ckpt, cfg, "--out", out}).code == 0);
  CHECK(fs::exists(dir / "out" / "radius.csv"));
  // Checkpoint that does not fit the model.
  std::ofstream(dir / "junk.pvec") << "junk";
  CHECK(cli({"landscape", (dir / "junk.pvec").string(), cfg, "--out", out}).code == 1);
}

TEST_CASE("bounds prints the evaluated bound") {
  const auto dir = testsupport::scratch_dir("cli_bounds");
  const auto r = cli({"bounds", (fs::path(PERTURBOPT_CONFIG_DIR) / "constants.json").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("rwp_bound 2.204605") != std::string::npos);
  CHECK(fs::exists(dir / "bounds.json"));
}

TEST_CASE("divergence exits 2") {
  const auto dir = testsupport::scratch_dir("cli_diverge");
  auto j = perturbopt::harness::read_json_file(fs::path(PERTURBOPT_CONFIG_DIR) / "quadratic_rwp.json");
  j["epochs"] = 1000;
  j["optimizer"]["gamma0"] = 100.0;
  j["optimizer"]["lr_schedule"] = "constant";
  std::ofstream(dir / "cfg.json") << j.dump();
  const auto r = cli({"train", (dir / "cfg.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("last finite step") != std::string::npos);
}

}  // TEST_SUITE
