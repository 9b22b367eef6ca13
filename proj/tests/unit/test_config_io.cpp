#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fusion_track/config_io.hpp"
#include "fusion_track/errors.hpp"

using namespace fusion_track;
using nlohmann::json;

namespace {

std::string error_field(const json& doc) {
  try {
    parse_experiment(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("empty document yields the defaults") {
  const auto d = parse_experiment(json::object());
  CHECK(d.scenario.isd_m == 200);
  CHECK(d.scenario.n_fused_bs == 3);
  CHECK(d.scenario.mode == FusionMode::Fused);
  CHECK(d.sweep.isd_values == std::vector<double>{200});
  CHECK(d.sweep.n_values == std::vector<std::size_t>{3});
  CHECK(d.sweep.modes == std::vector<FusionMode>{FusionMode::Fused});
  CHECK(d.fog.architectures.size() == 2);
}

TEST_CASE("units: degrees and km/h in, radians and m/s inside") {
  const auto d = parse_experiment(json::parse(R"({"speed_kmh": 72, "noise": {"sigma_aoa_deg": 2}})"));
  CHECK(d.scenario.speed_mps == doctest::Approx(20.0));
  CHECK(d.scenario.noise.sigma_aoa_rad == doctest::Approx(2 * kPi / 180));
  const json back = to_json(d.scenario);
  CHECK(back["noise"]["sigma_aoa_deg"].get<double>() == doctest::Approx(2.0));
  CHECK(back["speed_mps"].get<double>() == doctest::Approx(20.0));
}

TEST_CASE("to_json round-trips through parse_experiment") {
  ScenarioConfig c;
  c.isd_m = 150;
  c.seed = 12345;
  c.mode = FusionMode::FiveGOnly;
  c.noise.beam_grid.reset();
  c.filter.gate_chi2 = 9.0;
  const auto d = parse_experiment(to_json(c));
  CHECK(d.scenario.isd_m == 150);
  CHECK(d.scenario.seed == 12345);
  CHECK(d.scenario.mode == FusionMode::FiveGOnly);
  CHECK_FALSE(d.scenario.noise.beam_grid.has_value());
  CHECK(d.scenario.filter.gate_chi2 == 9.0);
  CHECK(to_json(d.scenario) == to_json(c));
}

TEST_CASE("unknown keys and bad values name the field") {
  CHECK(error_field(json::parse(R"({"isd": 200})")) == "isd");
  CHECK(error_field(json::parse(R"({"noise": {"foo": 1}})")) == "noise.foo");
  CHECK(error_field(json::parse(R"({"isd_m": -5})")) == "isd_m");
  CHECK(error_field(json::parse(R"({"isd_m": "wide"})")) == "isd_m");
  CHECK(error_field(json::parse(R"({"mode": "gnss"})")) == "mode");
  CHECK(error_field(json::parse(R"({"speed_mps": 10, "speed_kmh": 36})")) == "speed_kmh");
  CHECK(error_field(json::parse(R"({"noise": {"sigma_range_m": -1}})")) == "noise.sigma_range_m");
  CHECK(error_field(json::parse(R"({"sweep": {"seeds": 0}})")) == "sweep.seeds");
  CHECK(error_field(json::parse(R"({"sweep": {"n_fused_bs": [1, 99]}})")) == "sweep.n_fused_bs");
  CHECK(error_field(json::parse(R"({"fog": {"links": {"UE-XX": {"fixed_ms": 1}}}})")) == "fog.links.UE-XX");
  CHECK(error_field(json::parse(R"({"fog": {"architectures": ["cloud"]}})")) == "fog.architectures");
  CHECK(error_field(json::parse("[1, 2]")) == "<document>");
}

TEST_CASE("sweep block") {
  const auto d = parse_experiment(json::parse(
      R"({"sweep": {"isd_m": [100, 200], "n_fused_bs": [1, 2, 3], "modes": ["imu_only", "5g_only", "fused"], "seeds": 4}})"));
  CHECK(d.sweep.isd_values == std::vector<double>{100, 200});
  CHECK(d.sweep.n_values == std::vector<std::size_t>{1, 2, 3});
  CHECK(d.sweep.modes.size() == 3);
  CHECK(d.sweep.seeds == 4);
}

TEST_CASE("fog block with explicit ownership") {
  const auto d = parse_experiment(json::parse(R"({
    "track_length_m": 400, "isd_m": 200,
    "fog": {"instances": [{"id": 5, "bs_ids": [0, 1]}, {"id": 9, "bs_ids": [2]}],
            "links": {"BS-FOG": {"fixed_ms": 2, "jitter_ms": 0.5}},
            "architectures": ["fog"]}})"));
  const auto topo = make_topology(d.fog, d.scenario);
  CHECK(topo.owner_of(1).id == 5);
  CHECK(topo.owner_of(2).id == 9);
  CHECK(topo.link(fog::NodeKind::Fog, fog::NodeKind::Bs).fixed_ms == 2.0);
  CHECK(topo.link(fog::NodeKind::Ue, fog::NodeKind::Bs).fixed_ms == 5.0);
  CHECK(d.fog.architectures == std::vector<fog::Architecture>{fog::Architecture::Fog});
  CHECK_NOTHROW(topo.validate(build_scenario(d.scenario).sites));
}

TEST_CASE("shipped example configs parse") {
  for (const char* name : {"fig4.json", "fig5.json", "fogsim.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_experiment(std::filesystem::path(FUSION_TRACK_EX_DIR) / name));
  }
  const auto fig5 = load_experiment(std::filesystem::path(FUSION_TRACK_EX_DIR) / "fig5.json");
  CHECK(fig5.sweep.isd_values == std::vector<double>{100, 200});
  CHECK(fig5.sweep.seeds == 20);
}

TEST_CASE("unreadable or malformed files are config errors") {
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), ConfigError);
  const auto tmp = std::filesystem::temp_directory_path() / "fusion_track_bad.json";
  std::ofstream(tmp) << "{ not json";
  CHECK_THROWS_AS(load_experiment(tmp), ConfigError);
  std::filesystem::remove(tmp);
}
