#include "fusion_track/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fusion_track/errors.hpp"

namespace fusion_track {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// floor(a / b) that does not lose an exact integer quotient to roundoff.
std::size_t floor_ratio(double a, double b) {
  const double q = a / b;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(q));
}

void require(bool ok, const char* field, const char* constraint) {
  if (!ok) throw ConfigError(field, constraint);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::ImuOnly:
      return "imu_only";
    case FusionMode::FiveGOnly:
      return "5g_only";
    case FusionMode::Fused:
      return "fused";
  }
  return "unknown";
}

FusionMode parse_fusion_mode(std::string_view text) {
  const std::string t = lower(text);
  if (t == "imu_only" || t == "imuonly" || t == "imu") return FusionMode::ImuOnly;
  if (t == "5g_only" || t == "fivegonly" || t == "5g") return FusionMode::FiveGOnly;
  if (t == "fused" || t == "imu+5g") return FusionMode::Fused;
  throw ArgumentError("unknown fusion mode '" + std::string(text) +
                      "' (expected imu_only, 5g_only or fused)");
}

void validate(const ScenarioConfig& c) {
  require(finite_pos(c.isd_m), "isd_m", "must be > 0");
  require(std::isfinite(c.bs_lateral_offset_m), "bs_lateral_offset_m", "must be finite");
  require(finite_pos(c.track_length_m), "track_length_m", "must be > 0");
  require(finite_nonneg(c.speed_mps), "speed_mps", "must be >= 0");
  require(finite_pos(c.epoch_dt_s), "epoch_dt_s", "must be > 0");
  require(c.n_fused_bs >= 1, "n_fused_bs", "must be >= 1");
  require(c.n_fused_bs <= deployed_bs_count(c), "n_fused_bs",
          "must not exceed the number of deployed base stations");

  const NoiseConfig& n = c.noise;
  require(finite_nonneg(n.sigma_range_m), "noise.sigma_range_m", "must be >= 0");
  require(finite_pos(n.range_ref_m), "noise.range_ref_m", "must be > 0");
  require(std::isfinite(n.range_dist_exponent), "noise.range_dist_exponent", "must be finite");
  require(finite_nonneg(n.sigma_aoa_rad), "noise.sigma_aoa_deg", "must be >= 0");
  if (n.beam_grid) require(n.beam_grid->n_beams_az >= 1, "noise.beam_grid.n_beams_az", "must be >= 1");
  require(finite_nonneg(n.sigma_accel_mps2), "noise.sigma_accel_mps2", "must be >= 0");
  require(finite_nonneg(n.accel_bias_rw_mps2_per_sqrt_s), "noise.accel_bias_rw_mps2_per_sqrt_s",
          "must be >= 0");
  require(finite_nonneg(n.sigma_speed_mps), "noise.sigma_speed_mps", "must be >= 0");
  require(finite_nonneg(n.sigma_init_pos_m), "noise.sigma_init_pos_m", "must be >= 0");

  const FilterConfig& f = c.filter;
  require(finite_nonneg(f.jerk_psd), "filter.jerk_psd", "must be >= 0");
  require(finite_nonneg(f.init_sigma_vel_mps), "filter.init_sigma_vel_mps", "must be >= 0");
  require(finite_nonneg(f.init_sigma_accel_mps2), "filter.init_sigma_accel_mps2", "must be >= 0");
  if (f.gate_chi2) require(finite_pos(*f.gate_chi2), "filter.gate_chi2", "must be > 0");

  require(epoch_count(c) >= 1, "track_length_m", "must cover at least one epoch");
}

std::size_t deployed_bs_count(const ScenarioConfig& c) {
  if (!finite_pos(c.isd_m) || !finite_pos(c.track_length_m)) return 0;
  return floor_ratio(c.track_length_m, c.isd_m) + 1;
}

std::size_t epoch_count(const ScenarioConfig& c) {
  const double step = c.speed_mps * c.epoch_dt_s;
  // A parked vehicle never covers the track: a single snapshot epoch.
  if (step <= 0.0) return 1;
  return floor_ratio(c.track_length_m, step);
}

TruthSample Trajectory::sample(std::int64_t epoch) const {
  TruthSample s;
  s.epoch = epoch;
  s.t_s = static_cast<double>(epoch) * epoch_dt_s_;
  s.position = Vec2(speed_mps_ * s.t_s, 0.0);
  s.velocity = Vec2(speed_mps_, 0.0);
  s.acceleration = Vec2::Zero();
  return s;
}

Scenario build_scenario(const ScenarioConfig& config) {
  validate(config);
  const std::size_t n_sites = deployed_bs_count(config);
  std::vector<BsSite> sites;
  sites.reserve(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    sites.push_back({static_cast<int>(k),
                     Vec2(static_cast<double>(k) * config.isd_m, config.bs_lateral_offset_m)});
  }
  return Scenario{std::move(sites),
                  Trajectory(config.speed_mps, config.epoch_dt_s, epoch_count(config))};
}

std::vector<BsSite> nearest_bs(const Vec2& position, std::span<const BsSite> sites, std::size_t n) {
  if (n > sites.size()) {
    throw ArgumentError("nearest_bs: requested " + std::to_string(n) + " sites but only " +
                        std::to_string(sites.size()) + " are deployed");
  }
  std::vector<std::pair<double, const BsSite*>> ranked;
  ranked.reserve(sites.size());
  for (const BsSite& s : sites) ranked.emplace_back((s.position - position).squaredNorm(), &s);
  const auto less = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                    less);
  std::vector<BsSite> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*ranked[i].second);
  return out;
}

std::string_view to_string(SigmaLevel level) {
  switch (level) {
    case SigmaLevel::One:
      return "1sigma";
    case SigmaLevel::Three:
      return "3sigma";
    case SigmaLevel::Unspecified:
      return "unspecified";
  }
  return "unknown";
}

double percentile_for(SigmaLevel level) { return level == SigmaLevel::One ? 68.3 : 99.7; }

std::vector<RequirementProfile> builtin_requirement_profiles() {
  using S = SigmaLevel;
  // V2X rows (5GAA) followed by the rail row (STARS). The map collecting row lists an
  // accuracy span of 0.1-0.5 m and is carried as its two bounds.
  return {
      {"Intersection movement assist", 1.5, S::Three, 120, 12000, ""},
      {"Traffic jam warning (urban environment)", 20.0, S::One, 70, 12000, ""},
      {"Lane change warning", 1.5, S::Three, 50, 12000, "Host vehicle: 40; Remote vehicle: 50"},
      {"High-definition sensor sharing", 0.1, S::Three, 250, 12000, ""},
      {"Vulnerable road user (VRU) awareness – potentially dangerous situation", 1.0, S::Three, 120,
       1500, "Urban: 70; Rural: 120"},
      {"Real-time situational awareness and high-definition maps", 0.5, S::Three, 250, 1500, ""},
      {"Group start", 0.2, S::Three, 70, 3200, ""},
      {"Tele-operated driving support", 0.1, S::Three, 10, 10, ""},
      {"High-definition map collecting and sharing (strict bound)", 0.1, S::Three, 250, 12000,
       "City: 70; Highway: 250"},
      {"High-definition map collecting and sharing (relaxed bound)", 0.5, S::Three, 250, 12000,
       "City: 70; Highway: 250"},
      {"Automated intersection crossing", 0.15, S::Three, 120, 3200, "Urban: 70; Rural: 120"},
      {"Infrastructure assisted environment perception", 0.15, S::Three, 250, 1200, ""},
      {"Driverless train", 0.25, S::Unspecified, 150, std::nullopt, ""},
  };
}

const RequirementProfile& find_profile(std::span<const RequirementProfile> profiles,
                                       std::string_view name) {
  const std::string key = lower(name);
  for (const auto& p : profiles) {
    if (lower(p.name) == key) return p;
  }
  for (const auto& p : profiles) {
    if (lower(p.name).starts_with(key)) return p;
  }
  throw ArgumentError("no requirement profile named '" + std::string(name) + "'");
}

}  // namespace fusion_track
