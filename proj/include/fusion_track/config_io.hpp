#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "fusion_track/fogsim.hpp"
#include "fusion_track/runner.hpp"
#include "fusion_track/scenario.hpp"

namespace fusion_track {

// Optional `fog` block of an experiment document.
struct FogSpec {
  std::size_t n_instances = 2;                     // used when `instances` is absent
  std::vector<fog::FogInstance> instances;         // explicit BS ownership
  std::map<fog::LinkKey, fog::LatencyModel> links = fog::default_links();
  std::size_t position_report_every = 0;
  std::vector<fog::Architecture> architectures = {fog::Architecture::Legacy, fog::Architecture::Fog};
};

// A scenario document: the ScenarioConfig fields at top level plus optional
// `sweep` and `fog` blocks. Angles are in degrees; speed is `speed_mps` or `speed_kmh`.
struct ExperimentDocument {
  ScenarioConfig scenario;
  SweepSpec sweep;
  FogSpec fog;
};

// Throws ConfigError naming the offending key (dotted path) on unknown keys,
// wrong types, or values violating the scenario invariants.
ExperimentDocument parse_experiment(const nlohmann::json& doc);
ExperimentDocument load_experiment(const std::filesystem::path& path);

fog::FogTopology make_topology(const FogSpec& spec, const ScenarioConfig& scenario);

nlohmann::json to_json(const ScenarioConfig& config);

}  // namespace fusion_track
