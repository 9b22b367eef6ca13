#include "fusion_track/fogsim.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <queue>

#include "fusion_track/errors.hpp"

namespace fusion_track::fog {

namespace {

constexpr std::uint64_t kLatencyStreamTag = 3;

LinkKey canonical(NodeKind a, NodeKind b) { return a <= b ? LinkKey{a, b} : LinkKey{b, a}; }

std::string kind_label(NodeKind k) {
  switch (k) {
    case NodeKind::Ue:
      return "UE";
    case NodeKind::Bs:
      return "BS";
    case NodeKind::Amf:
      return "AMF";
    case NodeKind::Lmf:
      return "LMF";
    case NodeKind::Fog:
      return "FOG";
  }
  return "?";
}

double path_latency(const std::vector<Node>& path, const FogTopology& topology, RandomStream& rng) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += topology.link(path[i - 1].kind, path[i].kind).sample(rng);
  }
  return total;
}

struct Pending {
  PositioningEvent event;
  std::uint64_t seq = 0;
};

struct LaterFirst {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.event.t_ms != b.event.t_ms) return a.event.t_ms > b.event.t_ms;
    return a.seq > b.seq;
  }
};

}  // namespace

std::string Node::label() const {
  switch (kind) {
    case NodeKind::Bs:
      return "BS" + std::to_string(id);
    case NodeKind::Fog:
      return "FOG" + std::to_string(id);
    default:
      return kind_label(kind);
  }
}

std::string_view to_string(Architecture arch) { return arch == Architecture::Legacy ? "legacy" : "fog"; }

Architecture parse_architecture(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "legacy") return Architecture::Legacy;
  if (t == "fog") return Architecture::Fog;
  throw ArgumentError("unknown architecture '" + std::string(text) + "' (expected legacy or fog)");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::MeasReportI1:
      return "MeasReportI1";
    case EventKind::PositionToLmfI2:
      return "PositionToLmfI2";
    case EventKind::ContextTransfer:
      return "ContextTransfer";
    case EventKind::LegacyHop:
      return "LegacyHop";
  }
  return "Unknown";
}

double LatencyModel::sample(RandomStream& rng) const {
  return std::max(0.0, fixed_ms + rng.normal(jitter_ms));
}

std::map<LinkKey, LatencyModel> default_links() {
  std::map<LinkKey, LatencyModel> links;
  links[canonical(NodeKind::Ue, NodeKind::Bs)] = {5.0, 0.0};
  links[canonical(NodeKind::Bs, NodeKind::Amf)] = {5.0, 0.0};
  links[canonical(NodeKind::Amf, NodeKind::Lmf)] = {5.0, 0.0};
  links[canonical(NodeKind::Bs, NodeKind::Fog)] = {4.0, 0.0};
  links[canonical(NodeKind::Fog, NodeKind::Lmf)] = {5.0, 0.0};
  return links;
}

FogTopology split_evenly(std::size_t n_sites, std::size_t n_fogs, std::map<LinkKey, LatencyModel> links) {
  if (n_fogs == 0) throw TopologyError("at least one fog instance is required");
  if (n_fogs > n_sites) throw TopologyError("more fog instances than base stations");
  FogTopology topo;
  topo.links.clear();
  for (const auto& [key, model] : links) topo.links[canonical(key.first, key.second)] = model;
  const std::size_t base = n_sites / n_fogs;
  const std::size_t extra = n_sites % n_fogs;
  int next = 0;
  for (std::size_t f = 0; f < n_fogs; ++f) {
    FogInstance inst;
    inst.id = static_cast<int>(f) + 1;
    const std::size_t count = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) inst.bs_ids.insert(next++);
    topo.fog_instances.push_back(std::move(inst));
  }
  return topo;
}

void FogTopology::validate(std::span<const BsSite> sites) const {
  if (fog_instances.empty()) throw TopologyError("topology has no fog instances");
  std::set<int> fog_ids;
  for (const FogInstance& f : fog_instances) {
    if (!fog_ids.insert(f.id).second) throw TopologyError("duplicate fog id " + std::to_string(f.id));
  }
  for (const BsSite& s : sites) {
    const auto n = std::count_if(fog_instances.begin(), fog_instances.end(),
                                 [&](const FogInstance& f) { return f.bs_ids.count(s.id) > 0; });
    if (n != 1) {
      throw TopologyError("BS " + std::to_string(s.id) + " is managed by " + std::to_string(n) +
                          " fog instances (expected exactly 1)");
    }
  }
  for (const FogInstance& f : fog_instances) {
    for (int id : f.bs_ids) {
      const bool known = std::any_of(sites.begin(), sites.end(), [&](const BsSite& s) { return s.id == id; });
      if (!known) throw TopologyError("fog " + std::to_string(f.id) + " manages unknown BS " + std::to_string(id));
    }
  }
  const LinkKey required[] = {canonical(NodeKind::Ue, NodeKind::Bs), canonical(NodeKind::Bs, NodeKind::Amf),
                              canonical(NodeKind::Amf, NodeKind::Lmf), canonical(NodeKind::Bs, NodeKind::Fog),
                              canonical(NodeKind::Fog, NodeKind::Lmf)};
  for (const LinkKey& key : required) {
    auto it = links.find(key);
    if (it == links.end()) {
      throw TopologyError("no latency model for link " + kind_label(key.first) + "-" + kind_label(key.second));
    }
    if (!(it->second.fixed_ms >= 0.0) || !(it->second.jitter_ms >= 0.0)) {
      throw TopologyError("negative latency on link " + kind_label(key.first) + "-" + kind_label(key.second));
    }
  }
}

const FogInstance& FogTopology::owner_of(int bs_id) const {
  for (const FogInstance& f : fog_instances) {
    if (f.bs_ids.count(bs_id)) return f;
  }
  throw TopologyError("BS " + std::to_string(bs_id) + " is not managed by any fog instance");
}

const LatencyModel& FogTopology::link(NodeKind a, NodeKind b) const {
  auto it = links.find(canonical(a, b));
  if (it == links.end()) throw TopologyError("no latency model for link " + kind_label(a) + "-" + kind_label(b));
  return it->second;
}

Route route_report(int serving_bs, const FogTopology& topology, Architecture arch, RandomStream& rng) {
  Route route;
  const FogInstance& fog = topology.owner_of(serving_bs);
  if (arch == Architecture::Legacy) {
    route.path = {{NodeKind::Ue, 0}, {NodeKind::Bs, serving_bs}, {NodeKind::Amf, 0}, {NodeKind::Lmf, 0}};
  } else {
    route.path = {{NodeKind::Ue, 0}, {NodeKind::Bs, serving_bs}, {NodeKind::Fog, fog.id}};
  }
  route.latency_ms = path_latency(route.path, topology, rng);
  return route;
}

std::optional<PositioningEvent> step_mobility(const TruthSample& truth, std::span<const BsSite> sites,
                                              const FogTopology& topology, LocationContext& context,
                                              RandomStream& rng) {
  const int serving = nearest_bs(truth.position, sites, 1).front().id;
  const int target = topology.owner_of(serving).id;
  if (!context.owner_fog) {
    context.owner_fog = target;
    return std::nullopt;
  }
  if (*context.owner_fog == target) return std::nullopt;

  PositioningEvent ev;
  ev.kind = EventKind::ContextTransfer;
  ev.path = {{NodeKind::Fog, *context.owner_fog}, {NodeKind::Lmf, 0}, {NodeKind::Fog, target}};
  ev.latency_ms = path_latency(ev.path, topology, rng);
  ev.emitted_ms = truth.t_s * 1000.0;
  ev.t_ms = ev.emitted_ms + ev.latency_ms;
  ev.payload = context.state;

  context.owner_fog = target;
  ++context.version;
  ev.fog_owner = target;
  ev.context_version = context.version;
  return ev;
}

SessionResult simulate_session(const ScenarioConfig& config, const FogTopology& topology, Architecture arch) {
  const Scenario scenario = build_scenario(config);
  const std::span<const BsSite> sites(scenario.sites);
  topology.validate(sites);

  const ProcessModel process{config.epoch_dt_s, config.filter.jerk_psd};
  const UpdateOptions options{config.filter.gate_chi2};
  RandomStream init_rng(config.seed, 1);
  RandomStream meas_rng(config.seed, 2);
  RandomStream latency_rng(config.seed, kLatencyStreamTag);
  ImuBias bias;

  SessionResult out;
  out.architecture = arch;
  LocationContext& ctx = out.final_context;

  std::priority_queue<Pending, std::vector<Pending>, LaterFirst> queue;
  std::uint64_t seq = 0;
  std::vector<double> report_latencies;

  auto schedule = [&](PositioningEvent ev) { queue.push(Pending{std::move(ev), seq++}); };
  auto deliver_until = [&](double t_ms) {
    while (!queue.empty() && queue.top().event.t_ms <= t_ms) {
      out.events.push_back(queue.top().event);
      queue.pop();
    }
  };

  const std::size_t n_epochs = scenario.trajectory.epoch_count();
  for (std::size_t k = 0; k < n_epochs; ++k) {
    const auto epoch = static_cast<std::int64_t>(k);
    const TruthSample truth = scenario.trajectory.sample(epoch);
    const double now_ms = truth.t_s * 1000.0;
    deliver_until(now_ms);

    if (arch == Architecture::Fog) {
      if (auto transfer = step_mobility(truth, sites, topology, ctx, latency_rng)) {
        ++out.transfers;
        schedule(std::move(*transfer));
      }
    }

    const int serving = nearest_bs(truth.position, sites, 1).front().id;
    Route route = route_report(serving, topology, arch, latency_rng);
    PositioningEvent report;
    report.kind = arch == Architecture::Fog ? EventKind::MeasReportI1 : EventKind::LegacyHop;
    report.emitted_ms = now_ms;
    report.latency_ms = route.latency_ms;
    report.t_ms = now_ms + route.latency_ms;
    report.path = std::move(route.path);
    report.fog_owner = ctx.owner_fog;
    report.context_version = ctx.version;
    report_latencies.push_back(report.latency_ms);
    ++out.reports;
    schedule(std::move(report));

    try {
      if (k == 0) {
        ctx.state = initialize(truth, config, init_rng);
      } else {
        ctx.state = predict(ctx.state, process);
      }
      const MeasurementBatch batch = sample_batch(truth, sites, config, meas_rng, bias);
      ctx.state = update(ctx.state, batch, sites, config.mode, options).state;
    } catch (const std::runtime_error& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what(), {}, epoch);
    }

    if (arch == Architecture::Fog && topology.position_report_every > 0 &&
        k % topology.position_report_every == 0) {
      PositioningEvent fix;
      fix.kind = EventKind::PositionToLmfI2;
      fix.path = {{NodeKind::Fog, *ctx.owner_fog}, {NodeKind::Lmf, 0}};
      fix.latency_ms = path_latency(fix.path, topology, latency_rng);
      fix.emitted_ms = now_ms;
      fix.t_ms = now_ms + fix.latency_ms;
      fix.fog_owner = ctx.owner_fog;
      fix.context_version = ctx.version;
      schedule(std::move(fix));
    }
  }
  deliver_until(std::numeric_limits<double>::infinity());

  out.latency = ErrorReport::from_samples(std::move(report_latencies));
  return out;
}

}  // namespace fusion_track::fog
