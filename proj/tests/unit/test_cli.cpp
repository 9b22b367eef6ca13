#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusion_track/cli.hpp"

namespace fs = std::filesystem;
using namespace fusion_track;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fusion_track_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("run writes per-epoch, summary, requirement and metadata files") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, R"({"track_length_m": 500, "seed": 3})");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* f : {"epochs.csv", "summary.csv", "requirements.csv", "metadata.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / "out" / f));
  }
  const std::string epochs = slurp(dir / "out" / "epochs.csv");
  CHECK(epochs.rfind("isd_m,n_bs,mode,seed,epoch,t_s,truth_x,truth_y,est_x,est_y,error_m\n", 0) == 0);
  CHECK(count_lines(epochs) == 1 + 138);  // floor(500 / 3.6111...) epochs
  CHECK(count_lines(slurp(dir / "out" / "requirements.csv")) == 1 + 13);
  const auto meta = nlohmann::json::parse(slurp(dir / "out" / "metadata.json"));
  CHECK(meta["base_seed"] == 3);
  CHECK(meta["config"]["track_length_m"] == 500.0);
  CHECK(meta.contains("warning"));
  fs::remove_all(dir);
}

TEST_CASE("--seed overrides the document") {
  const fs::path dir = scratch("seed");
  const fs::path cfg = write_config(dir, R"({"track_length_m": 500, "seed": 3})");
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "9"}).code == 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "a" / "metadata.json"));
  CHECK(meta["base_seed"] == 9);
  fs::remove_all(dir);
}

TEST_CASE("validate reports config errors without writing output") {
  const fs::path dir = scratch("validate");
  const fs::path bad = write_config(dir, R"({"isd_m": -10})");
  const auto r = invoke({"validate", "--config", bad.string()});
  CHECK(r.code == cli::kExitConfigError);
  CHECK(r.err.find("isd_m") != std::string::npos);
  CHECK(fs::directory_iterator(dir) != fs::directory_iterator());
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);  // only the config

  const auto run_bad = invoke({"run", "--config", bad.string(), "--out", (dir / "out").string()});
  CHECK(run_bad.code == cli::kExitConfigError);
  CHECK_FALSE(fs::exists(dir / "out"));

  const auto ok = invoke({"validate", "--config", (fs::path(FUSION_TRACK_EX_DIR) / "fig5.json").string()});
  CHECK(ok.code == cli::kExitOk);
  CHECK(ok.out.find("51 base stations, 2769 epochs") != std::string::npos);

  CHECK(invoke({"validate", "--config", (dir / "missing.json").string()}).code == cli::kExitConfigError);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == cli::kExitConfigError);
  CHECK(invoke({"frobnicate"}).code == cli::kExitConfigError);
  CHECK(invoke({"run", "--config", "/nonexistent.json", "--out", "/tmp/x"}).code == cli::kExitConfigError);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("profiles prints one line per requirement") {
  const auto r = invoke({"profiles"});
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 13);
  CHECK(r.out.find("High-definition sensor sharing, 0.1 m, 3σ, 250 km/h, 12000 /km²\n") != std::string::npos);
  CHECK(r.out.find("Driverless train, 0.25 m, σ unspecified, 150 km/h, N/A\n") != std::string::npos);
}

TEST_CASE("sweep output does not depend on --jobs") {
  const fs::path dir = scratch("jobs");
  const fs::path cfg = write_config(dir, R"({"track_length_m": 400,
    "sweep": {"isd_m": [100, 200], "n_fused_bs": [1, 2], "modes": ["5g_only", "fused"], "seeds": 3}})");
  REQUIRE(invoke({"sweep", "--config", cfg.string(), "--out", (dir / "j1").string(), "--jobs", "1"}).code == 0);
  REQUIRE(invoke({"sweep", "--config", cfg.string(), "--out", (dir / "j3").string(), "--jobs", "3"}).code == 0);
  for (const char* f : {"epochs.csv", "summary.csv", "requirements.csv", "metadata.json"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "j1" / f) == slurp(dir / "j3" / f));
  }
  CHECK(count_lines(slurp(dir / "j1" / "summary.csv")) == 1 + 8);
  fs::remove_all(dir);
}

TEST_CASE("fogsim writes both event logs and a latency summary") {
  const fs::path dir = scratch("fog");
  const fs::path cfg = write_config(dir, R"({"track_length_m": 2000, "isd_m": 200, "fog": {"n_instances": 2}})");
  const auto r = invoke({"fogsim", "--config", cfg.string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "out" / "events_legacy.csv"));
  CHECK(fs::exists(dir / "out" / "events_fog.csv"));
  const std::string summary = slurp(dir / "out" / "latency_summary.csv");
  CHECK(summary.find("\nlegacy,3,15,") != std::string::npos);
  CHECK(summary.find("\nfog,2,9,") != std::string::npos);
  CHECK(slurp(dir / "out" / "events_fog.csv").find("ContextTransfer,FOG1>LMF>FOG2") != std::string::npos);
  fs::remove_all(dir);
}
