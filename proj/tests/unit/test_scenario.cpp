#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fusion_track/errors.hpp"
#include "fusion_track/scenario.hpp"

using namespace fusion_track;

namespace {

std::vector<int> ids(const std::vector<BsSite>& sites) {
  std::vector<int> out;
  for (const auto& s : sites) out.push_back(s.id);
  return out;
}

// Brute force: full sort of (distance, id) pairs.
std::vector<int> brute_nearest(const Vec2& p, const std::vector<BsSite>& sites, std::size_t n) {
  std::vector<std::pair<double, int>> all;
  for (const auto& s : sites) all.emplace_back(std::hypot(s.position.x() - p.x(), s.position.y() - p.y()), s.id);
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(all[i].second);
  return out;
}

}  // namespace

TEST_CASE("build_scenario deploys equally spaced sites 30 m off the road") {
  ScenarioConfig c;
  c.isd_m = 200;
  auto sc = build_scenario(c);
  REQUIRE(sc.sites.size() == 51);
  for (std::size_t k = 0; k < sc.sites.size(); ++k) {
    CHECK(sc.sites[k].id == static_cast<int>(k));
    CHECK(sc.sites[k].position.x() == doctest::Approx(200.0 * k));
    CHECK(sc.sites[k].position.y() == 30.0);
  }
  CHECK(sc.sites.back().position.x() == 10000.0);

  c.isd_m = 100;
  CHECK(build_scenario(c).sites.size() == 101);
}

TEST_CASE("epoch count follows floor(track / (speed * dt))") {
  ScenarioConfig c;
  c.speed_mps = 36.111;
  // 10000 / 3.6111 = 2769.24...; computed here in long double as an independent check.
  const long double ratio = 10000.0L / (36.111L * 0.1L);
  CHECK(static_cast<std::size_t>(std::floor(ratio)) == 2769);
  CHECK(epoch_count(c) == 2769);

  c.speed_mps = kmh_to_mps(130.0);
  CHECK(epoch_count(c) == 2769);

  c.speed_mps = 10.0;  // step 1 m: exact ratio must not lose an epoch to roundoff
  CHECK(epoch_count(c) == 10000);
}

TEST_CASE("trajectory is straight at constant speed") {
  ScenarioConfig c;
  auto sc = build_scenario(c);
  const double step = c.speed_mps * c.epoch_dt_s;
  const auto first = sc.trajectory.sample(0);
  CHECK(first.position == Vec2(0, 0));
  for (std::int64_t k : {0, 1, 17, 1000, 2767}) {
    auto a = sc.trajectory.sample(k);
    auto b = sc.trajectory.sample(k + 1);
    CHECK((b.position - a.position).norm() == doctest::Approx(step).epsilon(1e-12));
    CHECK(a.t_s == doctest::Approx(k * 0.1));
    CHECK(a.velocity == Vec2(c.speed_mps, 0));
    CHECK(a.acceleration == Vec2::Zero());
  }
}

TEST_CASE("invalid configs name the offending field") {
  auto field_of = [](ScenarioConfig c) -> std::string {
    try {
      validate(c);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  ScenarioConfig c;
  CHECK(field_of(c).empty());
  {
    auto b = c;
    b.isd_m = -1;
    CHECK(field_of(b) == "isd_m");
  }
  {
    auto b = c;
    b.track_length_m = 0;
    CHECK(field_of(b) == "track_length_m");
  }
  {
    auto b = c;
    b.epoch_dt_s = 0;
    CHECK(field_of(b) == "epoch_dt_s");
  }
  {
    auto b = c;
    b.speed_mps = -3;
    CHECK(field_of(b) == "speed_mps");
  }
  {
    auto b = c;
    b.n_fused_bs = 0;
    CHECK(field_of(b) == "n_fused_bs");
  }
  {
    auto b = c;
    b.n_fused_bs = 52;
    CHECK(field_of(b) == "n_fused_bs");
  }
  {
    auto b = c;
    b.noise.range_ref_m = 0;
    CHECK(field_of(b) == "noise.range_ref_m");
  }
  {
    auto b = c;
    b.noise.sigma_accel_mps2 = -0.1;
    CHECK(field_of(b) == "noise.sigma_accel_mps2");
  }
  CHECK_THROWS_AS(build_scenario([] {
                    ScenarioConfig b;
                    b.isd_m = 0;
                    return b;
                  }()),
                  ConfigError);
}

TEST_CASE("stationary vehicle yields one snapshot epoch") {
  ScenarioConfig c;
  c.speed_mps = 0;
  CHECK_NOTHROW(validate(c));
  CHECK(epoch_count(c) == 1);
}

TEST_CASE("nearest_bs examples") {
  ScenarioConfig c;
  auto sites = build_scenario(c).sites;
  CHECK(ids(nearest_bs({100, 0}, sites, 2)) == std::vector<int>{0, 1});
  CHECK(ids(nearest_bs({0, 0}, sites, 1)) == std::vector<int>{0});
  CHECK(ids(nearest_bs({250, 0}, sites, 3)) == brute_nearest({250, 0}, sites, 3));
  CHECK(ids(nearest_bs({250, 0}, sites, 3)) == std::vector<int>{1, 2, 0});
  CHECK_THROWS_AS(nearest_bs({0, 0}, sites, sites.size() + 1), ArgumentError);
}

TEST_CASE("nearest_bs property: matches brute force and is stable") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> ux(-500, 10500), uy(-100, 100), uisd(50, 500);
  std::uniform_int_distribution<int> un(1, 5);
  for (int trial = 0; trial < 500; ++trial) {
    ScenarioConfig c;
    c.isd_m = uisd(gen);
    auto sites = build_scenario(c).sites;
    const Vec2 p(ux(gen), uy(gen));
    const std::size_t n = static_cast<std::size_t>(un(gen));
    const auto got = ids(nearest_bs(p, sites, n));
    REQUIRE(got == brute_nearest(p, sites, n));
    REQUIRE(got == ids(nearest_bs(p, sites, n)));
  }
  // Exact tie: equidistant sites resolve to the lower id first.
  ScenarioConfig c;
  auto sites = build_scenario(c).sites;
  CHECK(ids(nearest_bs({300, 0}, sites, 2)) == std::vector<int>{1, 2});
}

TEST_CASE("every site lies exactly bs_lateral_offset_m from the road") {
  for (double off : {30.0, -30.0, 12.5}) {
    ScenarioConfig c;
    c.bs_lateral_offset_m = off;
    for (const auto& s : build_scenario(c).sites) CHECK(s.position.y() == off);
  }
}

TEST_CASE("requirement profiles carry the numeric rows of the V2X/rail table") {
  const auto profiles = builtin_requirement_profiles();
  CHECK(profiles.size() == 13);

  const auto& hd = find_profile(profiles, "High-definition sensor sharing");
  CHECK(hd.accuracy_m == 0.1);
  CHECK(hd.sigma_level == SigmaLevel::Three);
  CHECK(hd.velocity_kmh == 250);
  CHECK(hd.density_per_km2.value() == 12000);

  const auto& ima = find_profile(profiles, "Intersection movement assist");
  CHECK(ima.accuracy_m == 1.5);
  CHECK(ima.sigma_level == SigmaLevel::Three);

  const auto& train = find_profile(profiles, "Driverless train");
  CHECK(train.accuracy_m == 0.25);
  CHECK_FALSE(train.density_per_km2.has_value());

  const auto& tjw = find_profile(profiles, "Traffic jam warning");
  CHECK(tjw.accuracy_m == 20.0);
  CHECK(tjw.sigma_level == SigmaLevel::One);

  for (const auto& p : profiles) CHECK(p.accuracy_m > 0.0);
  CHECK(percentile_for(SigmaLevel::One) == 68.3);
  CHECK(percentile_for(SigmaLevel::Three) == 99.7);
  CHECK_THROWS_AS(find_profile(profiles, "Location aware beamforming for HST"), ArgumentError);
}

TEST_CASE("fusion mode names round-trip") {
  for (auto m : {FusionMode::ImuOnly, FusionMode::FiveGOnly, FusionMode::Fused}) {
    CHECK(parse_fusion_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_fusion_mode("gnss"), ArgumentError);
}
