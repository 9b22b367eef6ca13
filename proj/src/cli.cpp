#include "fusion_track/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "fusion_track/config_io.hpp"
#include "fusion_track/csv_export.hpp"
#include "fusion_track/errors.hpp"
#include "fusion_track/fogsim.hpp"
#include "fusion_track/runner.hpp"

namespace fusion_track::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("fusion_track", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("FUSION_TRACK_LOG")) level = spdlog::level::from_str(env);
  logger->set_level(level);
  return logger;
}

ExperimentDocument load(const Options& opt) {
  ExperimentDocument doc = load_experiment(opt.config_path);
  if (opt.seed) {
    doc.scenario.seed = *opt.seed;
    validate(doc.scenario);
  }
  return doc;
}

fs::path prepare_out(const Options& opt) {
  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("--out", "cannot create directory '" + opt.out_dir + "'");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--out", "cannot write '" + path.string() + "'");
  return f;
}

void write_metadata(const fs::path& dir, const std::string& subcommand, const ExperimentDocument& doc,
                    std::size_t seeds) {
  json meta = {{"subcommand", subcommand},
               {"base_seed", doc.scenario.seed},
               {"seeds_per_cell", seeds},
               {"seed_derivation", "seed_i = base_seed XOR i"},
               {"warmup_epochs_excluded", doc.scenario.warmup_epochs},
               {"percentile_rule", "linear interpolation between order statistics, rank (n-1)*p/100"},
               {"config", to_json(doc.scenario)}};
  if (doc.scenario.warmup_epochs > 0) {
    meta["warning"] = "the first " + std::to_string(doc.scenario.warmup_epochs) +
                      " epochs of every run are excluded from summary and requirement reports";
  }
  auto f = open_out(dir / "metadata.json");
  f << meta.dump(2) << '\n';
}

int cmd_run(const Options& opt, spdlog::logger& log, std::ostream& out) {
  const ExperimentDocument doc = load(opt);
  const fs::path dir = prepare_out(opt);
  log.info("run: isd={} n={} mode={} seed={}", doc.scenario.isd_m, doc.scenario.n_fused_bs,
           to_string(doc.scenario.mode), doc.scenario.seed);
  const RunResult result = run(doc.scenario);
  const ErrorReport report = cdf(std::span<const RunResult>(&result, 1), doc.scenario.warmup_epochs);
  const SweepKey key{doc.scenario.isd_m, doc.scenario.n_fused_bs, doc.scenario.mode};
  const auto profiles = builtin_requirement_profiles();

  auto epochs = open_out(dir / "epochs.csv");
  csv::write_epochs_header(epochs);
  csv::write_epochs(epochs, result);
  auto summary = open_out(dir / "summary.csv");
  csv::write_summary_header(summary);
  csv::write_summary_row(summary, key, report);
  auto req = open_out(dir / "requirements.csv");
  csv::write_requirements_header(req, false);
  csv::write_requirements(req, report, profiles);
  write_metadata(dir, "run", doc, 1);

  out << "run complete: " << result.per_epoch.size() << " epochs, p90 = " << csv::number(report.percentile(90))
      << " m -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& opt, spdlog::logger& log, std::ostream& out) {
  const ExperimentDocument doc = load(opt);
  const fs::path dir = prepare_out(opt);
  const std::size_t jobs = resolve_jobs(opt.jobs);
  log.info("sweep: {} isd x {} n x {} modes x {} seeds on {} threads", doc.sweep.isd_values.size(),
           doc.sweep.n_values.size(), doc.sweep.modes.size(), doc.sweep.seeds, jobs);
  const auto cells = sweep(doc.scenario, doc.sweep, jobs, true);
  const auto profiles = builtin_requirement_profiles();

  auto epochs = open_out(dir / "epochs.csv");
  auto summary = open_out(dir / "summary.csv");
  auto req = open_out(dir / "requirements.csv");
  csv::write_epochs_header(epochs);
  csv::write_summary_header(summary);
  csv::write_requirements_header(req, true);
  for (const SweepCell& cell : cells) {
    for (const RunResult& r : cell.runs) csv::write_epochs(epochs, r);
    csv::write_summary_row(summary, cell.key, cell.report);
    csv::write_requirements(req, cell.report, profiles, &cell.key);
    log.debug("cell isd={} n={} mode={} p90={}", cell.key.isd_m, cell.key.n_bs, to_string(cell.key.mode),
              cell.report.percentile(90));
  }
  write_metadata(dir, "sweep", doc, doc.sweep.seeds);
  out << "sweep complete: " << cells.size() << " cells -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_fogsim(const Options& opt, spdlog::logger& log, std::ostream& out) {
  const ExperimentDocument doc = load(opt);
  const fs::path dir = prepare_out(opt);
  const fog::FogTopology topo = make_topology(doc.fog, doc.scenario);
  auto summary = open_out(dir / "latency_summary.csv");
  csv::write_latency_summary_header(summary);
  for (fog::Architecture arch : doc.fog.architectures) {
    const fog::SessionResult s = fog::simulate_session(doc.scenario, topo, arch);
    log.info("fogsim {}: {} reports, {} transfers, p50 {} ms", fog::to_string(arch), s.reports, s.transfers,
             s.latency.percentile(50));
    auto events = open_out(dir / ("events_" + std::string(fog::to_string(arch)) + ".csv"));
    csv::write_events(events, s.events);
    csv::write_latency_summary_row(summary, s);
    out << fog::to_string(arch) << ": " << s.reports << " reports, " << s.transfers
        << " context transfers, p50 latency " << csv::number(s.latency.percentile(50)) << " ms\n";
  }
  write_metadata(dir, "fogsim", doc, 1);
  return kExitOk;
}

int cmd_profiles(const Options& opt, std::ostream& out) {
  for (const std::string& line : profile_lines()) out << line << '\n';
  if (!opt.out_dir.empty()) {
    const fs::path dir = prepare_out(opt);
    auto f = open_out(dir / "profiles.csv");
    csv::write_profiles(f, builtin_requirement_profiles());
  }
  return kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  const ExperimentDocument doc = load(opt);
  out << "ok: " << opt.config_path << " (" << deployed_bs_count(doc.scenario) << " base stations, "
      << epoch_count(doc.scenario) << " epochs)\n";
  return kExitOk;
}

}  // namespace

std::vector<std::string> profile_lines() {
  std::vector<std::string> lines;
  for (const RequirementProfile& p : builtin_requirement_profiles()) lines.push_back(csv::profile_line(p));
  return lines;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto logger = make_logger(err);

  CLI::App app{"Vehicle position tracking by IMU + 5G range/AOA fusion"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opt.config_path, "Scenario JSON document")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", opt.out_dir, "Output directory");
    if (needs_out) o->required();
    sub->add_option("--seed", opt.seed, "Override the base seed");
    sub->add_option("--jobs", opt.jobs, "Worker threads (default: hardware concurrency)");
  };
  auto* run_cmd = app.add_subcommand("run", "Single run; per-epoch, summary and requirement CSVs");
  add_common(run_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "ISD x N x mode sweep over several seeds");
  add_common(sweep_cmd, true);
  auto* fog_cmd = app.add_subcommand("fogsim", "Legacy vs fog positioning architecture session");
  add_common(fog_cmd, true);
  auto* profiles_cmd = app.add_subcommand("profiles", "Print the V2X/rail requirement profiles");
  profiles_cmd->add_option("--out", opt.out_dir, "Also write profiles.csv into this directory");
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario document without running it");
  validate_cmd->add_option("--config", opt.config_path, "Scenario JSON document")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(opt, *logger, out);
    if (*sweep_cmd) return cmd_sweep(opt, *logger, out);
    if (*fog_cmd) return cmd_fogsim(opt, *logger, out);
    if (*profiles_cmd) return cmd_profiles(opt, out);
    if (*validate_cmd) return cmd_validate(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const TopologyError& e) {
    err << "config error: fog topology: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericError& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace fusion_track::cli
