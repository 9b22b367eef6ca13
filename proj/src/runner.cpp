#include "fusion_track/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fusion_track/errors.hpp"
#include "fusion_track/measurements.hpp"

namespace fusion_track {

namespace {

constexpr std::uint64_t kInitStreamTag = 1;
constexpr std::uint64_t kMeasurementStreamTag = 2;

}  // namespace

RunResult run(const ScenarioConfig& config, const EpochObserver& observer) {
  const Scenario scenario = build_scenario(config);
  const std::span<const BsSite> sites(scenario.sites);
  const ProcessModel process{config.epoch_dt_s, config.filter.jerk_psd};
  const UpdateOptions options{config.filter.gate_chi2};

  RandomStream init_rng(config.seed, kInitStreamTag);
  RandomStream meas_rng(config.seed, kMeasurementStreamTag);
  ImuBias bias;

  RunResult result;
  result.config = config;
  result.seed = config.seed;
  const std::size_t n_epochs = scenario.trajectory.epoch_count();
  result.per_epoch.reserve(n_epochs);

  EstimatorState state;
  for (std::size_t k = 0; k < n_epochs; ++k) {
    const auto epoch = static_cast<std::int64_t>(k);
    try {
      const TruthSample truth = scenario.trajectory.sample(epoch);
      if (k == 0) {
        state = initialize(truth, config, init_rng);
      } else {
        state = predict(state, process);
        if (observer.after_predict) observer.after_predict(state);
      }
      const MeasurementBatch batch = sample_batch(truth, sites, config, meas_rng, bias);
      UpdateResult upd = update(state, batch, sites, config.mode, options);
      state = std::move(upd.state);
      if (observer.after_update) observer.after_update(state, upd.diagnostics);

      EpochRecord rec;
      rec.epoch = epoch;
      rec.t_s = truth.t_s;
      rec.truth = truth.position;
      rec.estimate = state.position();
      rec.error_m = (rec.estimate - rec.truth).norm();
      result.per_epoch.push_back(rec);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what(), e.block(), epoch);
    } catch (const GeometryError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what(), {}, epoch);
    } catch (const ContractError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what(), {}, epoch);
    }
  }
  return result;
}

ErrorReport ErrorReport::from_samples(std::vector<double> samples) {
  ErrorReport r;
  r.sorted_ = std::move(samples);
  std::sort(r.sorted_.begin(), r.sorted_.end());
  return r;
}

double ErrorReport::percentile(double p) const {
  if (sorted_.empty()) throw ArgumentError("percentile of an empty error report");
  if (!(p >= 0.0 && p <= 100.0)) throw ArgumentError("percentile must lie in [0, 100]");
  const double h = static_cast<double>(sorted_.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted_.size()) return sorted_.back();
  const double frac = h - static_cast<double>(lo);
  return sorted_[lo] + frac * (sorted_[lo + 1] - sorted_[lo]);
}

double ErrorReport::mean() const {
  if (sorted_.empty()) throw ArgumentError("mean of an empty error report");
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / static_cast<double>(sorted_.size());
}

double ErrorReport::max() const {
  if (sorted_.empty()) throw ArgumentError("max of an empty error report");
  return sorted_.back();
}

ErrorReport cdf(std::span<const RunResult> results, std::size_t skip_epochs) {
  std::vector<double> pooled;
  for (const RunResult& r : results) {
    for (std::size_t i = std::min(skip_epochs, r.per_epoch.size()); i < r.per_epoch.size(); ++i) {
      pooled.push_back(r.per_epoch[i].error_m);
    }
  }
  if (pooled.empty()) throw ArgumentError("cdf: no epochs to report");
  return ErrorReport::from_samples(std::move(pooled));
}

RequirementCheck check_requirement(const ErrorReport& report, const RequirementProfile& profile) {
  RequirementCheck c;
  c.achieved_m = report.percentile(percentile_for(profile.sigma_level));
  c.margin_m = profile.accuracy_m - c.achieved_m;
  c.pass = c.achieved_m <= profile.accuracy_m;
  return c;
}

std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<SweepCell> sweep(const ScenarioConfig& base, const SweepSpec& spec, std::size_t jobs,
                             bool keep_runs) {
  if (spec.isd_values.empty()) throw ArgumentError("sweep: isd list is empty");
  if (spec.n_values.empty()) throw ArgumentError("sweep: n_fused_bs list is empty");
  if (spec.modes.empty()) throw ArgumentError("sweep: mode list is empty");
  if (spec.seeds == 0) throw ArgumentError("sweep: seed count must be >= 1");

  std::vector<SweepCell> cells;
  std::vector<ScenarioConfig> cell_configs;
  for (double isd : spec.isd_values) {
    for (std::size_t n : spec.n_values) {
      for (FusionMode mode : spec.modes) {
        ScenarioConfig c = base;
        c.isd_m = isd;
        c.n_fused_bs = n;
        c.mode = mode;
        validate(c);
        cells.push_back(SweepCell{{isd, n, mode}, {}, {}});
        cell_configs.push_back(c);
      }
    }
  }

  const std::size_t n_tasks = cells.size() * spec.seeds;
  std::vector<RunResult> runs(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      ScenarioConfig c = cell_configs[t / spec.seeds];
      c.seed = derive_seed(base.seed, t % spec.seeds);
      try {
        runs[t] = run(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::min(resolve_jobs(jobs), std::max<std::size_t>(n_tasks, 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto first = runs.begin() + static_cast<std::ptrdiff_t>(ci * spec.seeds);
    const std::span<const RunResult> cell_runs(&*first, spec.seeds);
    cells[ci].report = cdf(cell_runs, base.warmup_epochs);
    if (keep_runs) cells[ci].runs.assign(first, first + static_cast<std::ptrdiff_t>(spec.seeds));
  }
  return cells;
}

}  // namespace fusion_track
