#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "fusion_track/scenario.hpp"

namespace fusion_track {

// Seeded Gaussian source. The same seed and call sequence always reproduce the same draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);
  // Independent stream derived from (seed, tag).
  RandomStream(std::uint64_t seed, std::uint64_t tag);

  double standard_normal() { return normal_(engine_); }
  double normal(double sigma) { return sigma * standard_normal(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Accelerometer bias carried across epochs (random walk).
struct ImuBias {
  Vec2 bias = Vec2::Zero();
};

struct ImuReading {
  double speed_mps = 0.0;
  Vec2 accel_mps2 = Vec2::Zero();
  double sigma_speed_mps = 0.0;
  double sigma_accel_mps2 = 0.0;
};

struct CellularObservation {
  int bs_id = 0;
  double range_m = 0.0;
  double azimuth_rad = 0.0;
  double sigma_range_m = 0.0;
  double sigma_aoa_rad = 0.0;
};

struct MeasurementBatch {
  std::int64_t epoch = 0;
  std::optional<ImuReading> imu;
  std::vector<CellularObservation> cellular;  // sorted by bs_id
};

double true_range(const Vec2& vehicle, const Vec2& bs);

// Direction of (vehicle - bs) seen from the BS, in (-pi, pi]. Throws GeometryError
// when the points coincide.
double true_azimuth(const Vec2& vehicle, const Vec2& bs);

double wrap_angle(double rad);

// Array boresight of a site: perpendicular to the road, facing it.
double boresight_azimuth(const BsSite& site);

// Snap an azimuth to the nearest beam of a uniform sine-space grid centred on boresight.
double quantize_azimuth(double azimuth_rad, double boresight_rad, const BeamGrid& grid);

// Range noise std at distance d: sigma_range_m * (d / range_ref_m)^gamma.
double range_sigma(const NoiseConfig& noise, double distance_m);

// Azimuth std reported alongside a measurement: Gaussian part plus, with a beam grid,
// the uniform quantization spread mapped from sine-space at the given off-boresight angle.
double reported_aoa_sigma(const NoiseConfig& noise, double off_boresight_rad);

// Accelerometer std reported alongside epoch k: white noise plus the spread the bias
// random walk has accumulated by t = k * dt.
double reported_accel_sigma(const NoiseConfig& noise, double t_s);

MeasurementBatch sample_batch(const TruthSample& truth, std::span<const BsSite> sites,
                              const ScenarioConfig& config, RandomStream& rng, ImuBias& imu_state);

}  // namespace fusion_track
