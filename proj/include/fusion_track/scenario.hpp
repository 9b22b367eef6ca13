#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fusion_track {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

// Which observation sources feed the filter correction.
enum class FusionMode { ImuOnly, FiveGOnly, Fused };

std::string_view to_string(FusionMode mode);
// Accepts "imu_only", "5g_only", "fused" (case-insensitive); throws ArgumentError otherwise.
FusionMode parse_fusion_mode(std::string_view text);

constexpr bool uses_imu(FusionMode mode) { return mode != FusionMode::FiveGOnly; }
constexpr bool uses_cellular(FusionMode mode) { return mode != FusionMode::ImuOnly; }

// DFT beam grid of a square BS array; 16 azimuth beams for a 16x16 (256 element) panel.
struct BeamGrid {
  int n_beams_az = 16;
};

struct NoiseConfig {
  double sigma_range_m = 0.25;  // at range_ref_m
  double range_ref_m = 100.0;
  double range_dist_exponent = 1.0;
  double sigma_aoa_rad = deg_to_rad(1.0);
  std::optional<BeamGrid> beam_grid = BeamGrid{};
  double sigma_accel_mps2 = 0.05;
  double accel_bias_rw_mps2_per_sqrt_s = 0.001;
  double sigma_speed_mps = 0.1;
  double sigma_init_pos_m = 5.0;
};

struct FilterConfig {
  double jerk_psd = 1.0;  // (m/s^3)^2 * s
  double init_sigma_vel_mps = 1.0;
  double init_sigma_accel_mps2 = 0.5;
  // Per-row chi-square innovation gate (1 dof); disabled when empty.
  std::optional<double> gate_chi2;
};

// Link-budget parameters of the case study. Recorded for provenance only; the noise
// magnitudes in NoiseConfig stand in for their effect.
struct RadioMetadata {
  double carrier_ghz = 28.0;
  double tx_power_dbm = 40.0;
  int bs_antennas = 256;
  int ue_antennas = 4;
};

struct ScenarioConfig {
  double isd_m = 200.0;
  double bs_lateral_offset_m = 30.0;  // sign selects the road side
  double track_length_m = 10000.0;
  double speed_mps = kmh_to_mps(130.0);
  double epoch_dt_s = 0.1;
  std::size_t n_fused_bs = 3;
  NoiseConfig noise;
  FilterConfig filter;
  RadioMetadata radio;
  std::uint64_t seed = 1;
  FusionMode mode = FusionMode::Fused;
  // Leading epochs left out of error reports (initial-fix transient).
  std::size_t warmup_epochs = 10;
};

// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

std::size_t deployed_bs_count(const ScenarioConfig& config);
std::size_t epoch_count(const ScenarioConfig& config);

struct BsSite {
  int id = 0;
  Vec2 position = Vec2::Zero();
};

struct TruthSample {
  std::int64_t epoch = 0;
  double t_s = 0.0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 acceleration = Vec2::Zero();
};

// Straight constant-speed drive along +x starting at the origin.
class Trajectory {
 public:
  Trajectory(double speed_mps, double epoch_dt_s, std::size_t n_epochs)
      : speed_mps_(speed_mps), epoch_dt_s_(epoch_dt_s), n_epochs_(n_epochs) {}

  std::size_t epoch_count() const noexcept { return n_epochs_; }
  double epoch_dt_s() const noexcept { return epoch_dt_s_; }
  TruthSample sample(std::int64_t epoch) const;

 private:
  double speed_mps_;
  double epoch_dt_s_;
  std::size_t n_epochs_;
};

struct Scenario {
  std::vector<BsSite> sites;
  Trajectory trajectory;
};

Scenario build_scenario(const ScenarioConfig& config);

// The n sites closest to position, sorted by (distance, id).
std::vector<BsSite> nearest_bs(const Vec2& position, std::span<const BsSite> sites, std::size_t n);

enum class SigmaLevel { One, Three, Unspecified };

std::string_view to_string(SigmaLevel level);
// Percentile a sigma level is evaluated at: 1σ -> 68.3, 3σ (and unspecified) -> 99.7.
double percentile_for(SigmaLevel level);

struct RequirementProfile {
  std::string name;
  double accuracy_m = 0.0;
  SigmaLevel sigma_level = SigmaLevel::Three;
  double velocity_kmh = 0.0;  // largest velocity listed for the use case
  std::optional<double> density_per_km2;
  std::string velocity_note;  // verbatim velocity cell when it lists several values
};

std::vector<RequirementProfile> builtin_requirement_profiles();
const RequirementProfile& find_profile(std::span<const RequirementProfile> profiles,
                                       std::string_view name);

}  // namespace fusion_track
