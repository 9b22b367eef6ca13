#include "fusion_track/measurements.hpp"

#include <algorithm>
#include <cmath>

#include "fusion_track/errors.hpp"

namespace fusion_track {

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(seed, 0) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  engine_.seed(seq);
}

double true_range(const Vec2& vehicle, const Vec2& bs) { return (vehicle - bs).norm(); }

double true_azimuth(const Vec2& vehicle, const Vec2& bs) {
  const Vec2 d = vehicle - bs;
  if (d.x() == 0.0 && d.y() == 0.0) {
    throw GeometryError("azimuth undefined: vehicle coincides with base station");
  }
  return wrap_angle(std::atan2(d.y(), d.x()));
}

double wrap_angle(double rad) {
  double w = std::remainder(rad, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double boresight_azimuth(const BsSite& site) {
  return site.position.y() < 0.0 ? kPi / 2.0 : -kPi / 2.0;
}

double quantize_azimuth(double azimuth_rad, double boresight_rad, const BeamGrid& grid) {
  const int n = std::max(grid.n_beams_az, 1);
  const double rel = wrap_angle(azimuth_rad - boresight_rad);
  const double u = std::clamp(std::sin(rel), -1.0, 1.0);
  const int k = std::clamp(static_cast<int>(std::floor((u + 1.0) * n / 2.0)), 0, n - 1);
  const double u_beam = -1.0 + (2.0 * k + 1.0) / n;
  double rel_q = std::asin(u_beam);
  if (std::cos(rel) < 0.0) rel_q = kPi - rel_q;  // back lobe
  return wrap_angle(boresight_rad + rel_q);
}

double range_sigma(const NoiseConfig& noise, double distance_m) {
  return noise.sigma_range_m * std::pow(distance_m / noise.range_ref_m, noise.range_dist_exponent);
}

double reported_aoa_sigma(const NoiseConfig& noise, double off_boresight_rad) {
  double var = noise.sigma_aoa_rad * noise.sigma_aoa_rad;
  if (noise.beam_grid) {
    const double spacing = 2.0 / std::max(noise.beam_grid->n_beams_az, 1);
    const double c = std::max(std::abs(std::cos(off_boresight_rad)), 0.1);
    var += spacing * spacing / 12.0 / (c * c);
  }
  return std::sqrt(var);
}

double reported_accel_sigma(const NoiseConfig& noise, double t_s) {
  const double rw = noise.accel_bias_rw_mps2_per_sqrt_s;
  return std::sqrt(noise.sigma_accel_mps2 * noise.sigma_accel_mps2 + rw * rw * std::max(t_s, 0.0));
}

MeasurementBatch sample_batch(const TruthSample& truth, std::span<const BsSite> sites,
                              const ScenarioConfig& config, RandomStream& rng, ImuBias& imu_state) {
  const NoiseConfig& noise = config.noise;
  MeasurementBatch batch;
  batch.epoch = truth.epoch;

  if (uses_imu(config.mode)) {
    ImuReading imu;
    imu.speed_mps = truth.velocity.norm() + rng.normal(noise.sigma_speed_mps);
    imu.accel_mps2 = truth.acceleration + imu_state.bias +
                     Vec2(rng.normal(noise.sigma_accel_mps2), rng.normal(noise.sigma_accel_mps2));
    imu.sigma_speed_mps = noise.sigma_speed_mps;
    imu.sigma_accel_mps2 = reported_accel_sigma(noise, truth.t_s);
    batch.imu = imu;

    const double step = noise.accel_bias_rw_mps2_per_sqrt_s * std::sqrt(config.epoch_dt_s);
    imu_state.bias += Vec2(rng.normal(step), rng.normal(step));
  }

  if (uses_cellular(config.mode)) {
    if (sites.empty()) throw ArgumentError("sample_batch: no base stations deployed");
    std::vector<BsSite> active = nearest_bs(truth.position, sites, config.n_fused_bs);
    std::sort(active.begin(), active.end(), [](const BsSite& a, const BsSite& b) { return a.id < b.id; });
    batch.cellular.reserve(active.size());
    for (const BsSite& site : active) {
      const double d = true_range(truth.position, site.position);
      const double az_true = true_azimuth(truth.position, site.position);
      const double boresight = boresight_azimuth(site);

      CellularObservation obs;
      obs.bs_id = site.id;
      obs.sigma_range_m = range_sigma(noise, d);
      obs.range_m = std::max(d + rng.normal(obs.sigma_range_m), 1e-3);
      double az = wrap_angle(az_true + rng.normal(noise.sigma_aoa_rad));
      if (noise.beam_grid) az = quantize_azimuth(az, boresight, *noise.beam_grid);
      obs.azimuth_rad = az;
      obs.sigma_aoa_rad = reported_aoa_sigma(noise, az_true - boresight);
      batch.cellular.push_back(obs);
    }
  }
  return batch;
}

}  // namespace fusion_track
