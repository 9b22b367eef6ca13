#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fusion_track/ekf.hpp"
#include "fusion_track/measurements.hpp"
#include "fusion_track/runner.hpp"
#include "fusion_track/scenario.hpp"

namespace fusion_track::fog {

enum class NodeKind { Ue, Bs, Amf, Lmf, Fog };

struct Node {
  NodeKind kind = NodeKind::Ue;
  int id = 0;  // BS id or fog id; 0 for singletons

  std::string label() const;
  auto operator<=>(const Node&) const = default;
};

enum class Architecture { Legacy, Fog };

std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view text);

// Per-hop latency: fixed part plus Gaussian jitter, the sum truncated at zero.
struct LatencyModel {
  double fixed_ms = 0.0;
  double jitter_ms = 0.0;

  double sample(RandomStream& rng) const;
};

using LinkKey = std::pair<NodeKind, NodeKind>;

struct FogInstance {
  int id = 0;
  std::set<int> bs_ids;
};

struct FogTopology {
  std::vector<FogInstance> fog_instances;
  // Keyed by the kinds of the two endpoints; lookups are direction-agnostic.
  std::map<LinkKey, LatencyModel> links;
  // Fog instances forward a position fix to the central LMF (I2) every this many epochs; 0 = never.
  std::size_t position_report_every = 0;

  // Throws TopologyError unless every site is managed by exactly one fog instance and
  // every hop class used by either architecture has a latency model.
  void validate(std::span<const BsSite> sites) const;
  const FogInstance& owner_of(int bs_id) const;
  const LatencyModel& link(NodeKind a, NodeKind b) const;
};

// Legacy hops 5 ms each; BS-fog 4 ms; fog-LMF 5 ms; no jitter.
std::map<LinkKey, LatencyModel> default_links();

// n_fogs contiguous blocks of site ids, the first blocks taking the remainder
// (51 sites over 2 fogs -> ids 0-25 and 26-50). Fog ids start at 1.
FogTopology split_evenly(std::size_t n_sites, std::size_t n_fogs,
                         std::map<LinkKey, LatencyModel> links = default_links());

enum class EventKind { MeasReportI1, PositionToLmfI2, ContextTransfer, LegacyHop };

std::string_view to_string(EventKind kind);

struct LocationContext {
  int ue_id = 0;
  EstimatorState state;
  std::optional<int> owner_fog;  // empty while the central LMF holds it (legacy)
  std::uint64_t version = 0;
};

struct PositioningEvent {
  double t_ms = 0.0;  // delivery time
  double emitted_ms = 0.0;
  EventKind kind = EventKind::MeasReportI1;
  std::vector<Node> path;
  double latency_ms = 0.0;
  std::optional<int> fog_owner;  // context owner when the event was emitted
  std::uint64_t context_version = 0;
  std::optional<EstimatorState> payload;  // transferred state (ContextTransfer only)

  std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

struct Route {
  std::vector<Node> path;
  double latency_ms = 0.0;

  std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

// Legacy: UE-BS-AMF-LMF. Fog: UE-BS-fog(serving BS).
Route route_report(int serving_bs, const FogTopology& topology, Architecture arch, RandomStream& rng);

// Hands the context to the fog instance managing the new serving BS if that differs
// from the current owner, routed fog -> central LMF -> fog over I2. The first call on
// an unowned context attaches it without an event.
std::optional<PositioningEvent> step_mobility(const TruthSample& truth, std::span<const BsSite> sites,
                                              const FogTopology& topology, LocationContext& context,
                                              RandomStream& rng);

struct SessionResult {
  Architecture architecture = Architecture::Fog;
  std::vector<PositioningEvent> events;  // delivery order
  ErrorReport latency;                   // end-to-end latency of measurement reports
  std::size_t reports = 0;
  std::size_t transfers = 0;
  LocationContext final_context;
};

SessionResult simulate_session(const ScenarioConfig& scenario, const FogTopology& topology,
                               Architecture arch);

}  // namespace fusion_track::fog
