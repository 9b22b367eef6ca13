#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fusion_track/ekf.hpp"
#include "fusion_track/scenario.hpp"

namespace fusion_track {

struct EpochRecord {
  std::int64_t epoch = 0;
  double t_s = 0.0;
  Vec2 truth = Vec2::Zero();
  Vec2 estimate = Vec2::Zero();
  double error_m = 0.0;
};

struct RunResult {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> per_epoch;
};

// Called with the prior after each predict and with the posterior after each update.
struct EpochObserver {
  std::function<void(const EstimatorState&)> after_predict;
  std::function<void(const EstimatorState&, const InnovationDiagnostics&)> after_update;
};

// Errors raised inside the epoch loop are rethrown as NumericError carrying the epoch.
RunResult run(const ScenarioConfig& config, const EpochObserver& observer = {});

// Empirical error distribution. Percentiles interpolate linearly between order
// statistics: rank h = (n - 1) * p / 100, value = x[floor h] + (h - floor h) * (x[floor h + 1] - x[floor h]).
class ErrorReport {
 public:
  ErrorReport() = default;
  static ErrorReport from_samples(std::vector<double> samples);

  const std::vector<double>& sorted_errors() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  bool empty() const noexcept { return sorted_.empty(); }

  double percentile(double p) const;
  double mean() const;
  double max() const;

 private:
  std::vector<double> sorted_;
};

// Pools errors of every run, skipping each run's first skip_epochs epochs.
ErrorReport cdf(std::span<const RunResult> results, std::size_t skip_epochs = 0);

struct RequirementCheck {
  bool pass = false;
  double achieved_m = 0.0;  // error at the profile's percentile
  double margin_m = 0.0;    // accuracy_m - achieved_m
};

RequirementCheck check_requirement(const ErrorReport& report, const RequirementProfile& profile);

struct SweepKey {
  double isd_m = 0.0;
  std::size_t n_bs = 0;
  FusionMode mode = FusionMode::Fused;

  auto operator<=>(const SweepKey&) const = default;
};

struct SweepSpec {
  std::vector<double> isd_values;
  std::vector<std::size_t> n_values;
  std::vector<FusionMode> modes;
  std::size_t seeds = 20;
};

struct SweepCell {
  SweepKey key;
  ErrorReport report;
  std::vector<RunResult> runs;  // filled only when requested
};

// Seed of the i-th run of a cell.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i) { return base ^ i; }

// One pooled report per (isd, n, mode) in canonical order (isd, n, mode as listed).
// jobs == 0 uses the hardware concurrency. Results do not depend on jobs.
std::vector<SweepCell> sweep(const ScenarioConfig& base, const SweepSpec& spec, std::size_t jobs = 0,
                             bool keep_runs = false);

std::size_t resolve_jobs(std::size_t jobs);

}  // namespace fusion_track
