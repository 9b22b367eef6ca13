#include "fusion_track/config_io.hpp"

#include <fstream>
#include <set>
#include <string>

#include "fusion_track/errors.hpp"

namespace fusion_track {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(prefix, key), "unknown key");
  }
}

const json& require_object(const json& v, const std::string& field) {
  if (!v.is_object()) throw ConfigError(field, "expected an object");
  return v;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::uint64_t as_unsigned(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(field, "expected a non-negative integer");
}

template <typename T>
void read(const json& obj, const std::string& prefix, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string field = join(prefix, key);
  if constexpr (std::is_same_v<T, double>) {
    out = as_number(*it, field);
  } else if constexpr (std::is_same_v<T, int>) {
    if (!it->is_number_integer()) throw ConfigError(field, "expected an integer");
    out = it->template get<int>();
  } else {
    out = static_cast<T>(as_unsigned(*it, field));
  }
}

FusionMode as_mode(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected one of imu_only, 5g_only, fused");
  try {
    return parse_fusion_mode(v.get<std::string>());
  } catch (const ArgumentError&) {
    throw ConfigError(field, "expected one of imu_only, 5g_only, fused");
  }
}

void parse_noise(const json& obj, NoiseConfig& n) {
  const std::string p = "noise";
  require_object(obj, p);
  reject_unknown(obj, p,
                 {"sigma_range_m", "range_ref_m", "range_dist_exponent", "sigma_aoa_deg", "beam_grid",
                  "sigma_accel_mps2", "accel_bias_rw_mps2_per_sqrt_s", "sigma_speed_mps", "sigma_init_pos_m"});
  read(obj, p, "sigma_range_m", n.sigma_range_m);
  read(obj, p, "range_ref_m", n.range_ref_m);
  read(obj, p, "range_dist_exponent", n.range_dist_exponent);
  if (auto it = obj.find("sigma_aoa_deg"); it != obj.end()) {
    n.sigma_aoa_rad = deg_to_rad(as_number(*it, "noise.sigma_aoa_deg"));
  }
  if (auto it = obj.find("beam_grid"); it != obj.end()) {
    if (it->is_null() || (it->is_boolean() && !it->get<bool>())) {
      n.beam_grid.reset();
    } else if (it->is_boolean()) {
      n.beam_grid = BeamGrid{};
    } else {
      require_object(*it, "noise.beam_grid");
      reject_unknown(*it, "noise.beam_grid", {"n_beams_az"});
      BeamGrid g;
      read(*it, "noise.beam_grid", "n_beams_az", g.n_beams_az);
      n.beam_grid = g;
    }
  }
  read(obj, p, "sigma_accel_mps2", n.sigma_accel_mps2);
  read(obj, p, "accel_bias_rw_mps2_per_sqrt_s", n.accel_bias_rw_mps2_per_sqrt_s);
  read(obj, p, "sigma_speed_mps", n.sigma_speed_mps);
  read(obj, p, "sigma_init_pos_m", n.sigma_init_pos_m);
}

void parse_filter(const json& obj, FilterConfig& f) {
  const std::string p = "filter";
  require_object(obj, p);
  reject_unknown(obj, p, {"jerk_psd", "init_sigma_vel_mps", "init_sigma_accel_mps2", "gate_chi2"});
  read(obj, p, "jerk_psd", f.jerk_psd);
  read(obj, p, "init_sigma_vel_mps", f.init_sigma_vel_mps);
  read(obj, p, "init_sigma_accel_mps2", f.init_sigma_accel_mps2);
  if (auto it = obj.find("gate_chi2"); it != obj.end()) {
    if (it->is_null()) {
      f.gate_chi2.reset();
    } else {
      f.gate_chi2 = as_number(*it, "filter.gate_chi2");
    }
  }
}

void parse_radio(const json& obj, RadioMetadata& r) {
  const std::string p = "radio";
  require_object(obj, p);
  reject_unknown(obj, p, {"carrier_ghz", "tx_power_dbm", "bs_antennas", "ue_antennas"});
  read(obj, p, "carrier_ghz", r.carrier_ghz);
  read(obj, p, "tx_power_dbm", r.tx_power_dbm);
  read(obj, p, "bs_antennas", r.bs_antennas);
  read(obj, p, "ue_antennas", r.ue_antennas);
}

void parse_sweep(const json& obj, const ScenarioConfig& base, SweepSpec& s) {
  const std::string p = "sweep";
  require_object(obj, p);
  reject_unknown(obj, p, {"isd_m", "n_fused_bs", "modes", "seeds"});
  if (auto it = obj.find("isd_m"); it != obj.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("sweep.isd_m", "expected a non-empty array");
    s.isd_values.clear();
    for (const auto& v : *it) s.isd_values.push_back(as_number(v, "sweep.isd_m"));
  }
  if (auto it = obj.find("n_fused_bs"); it != obj.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("sweep.n_fused_bs", "expected a non-empty array");
    s.n_values.clear();
    for (const auto& v : *it) s.n_values.push_back(as_unsigned(v, "sweep.n_fused_bs"));
  }
  if (auto it = obj.find("modes"); it != obj.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("sweep.modes", "expected a non-empty array");
    s.modes.clear();
    for (const auto& v : *it) s.modes.push_back(as_mode(v, "sweep.modes"));
  }
  read(obj, p, "seeds", s.seeds);
  if (s.seeds == 0) throw ConfigError("sweep.seeds", "must be >= 1");

  for (double isd : s.isd_values) {
    ScenarioConfig c = base;
    c.isd_m = isd;
    if (!(isd > 0.0)) throw ConfigError("sweep.isd_m", "must be > 0");
    for (std::size_t n : s.n_values) {
      if (n < 1) throw ConfigError("sweep.n_fused_bs", "must be >= 1");
      if (n > deployed_bs_count(c)) {
        throw ConfigError("sweep.n_fused_bs", "must not exceed the number of deployed base stations");
      }
    }
  }
}

fog::NodeKind parse_node_kind(const std::string& text, const std::string& field) {
  std::string t;
  for (char ch : text) t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (t == "UE") return fog::NodeKind::Ue;
  if (t == "BS") return fog::NodeKind::Bs;
  if (t == "AMF") return fog::NodeKind::Amf;
  if (t == "LMF") return fog::NodeKind::Lmf;
  if (t == "FOG") return fog::NodeKind::Fog;
  throw ConfigError(field, "unknown node kind '" + text + "'");
}

void parse_fog(const json& obj, FogSpec& f) {
  const std::string p = "fog";
  require_object(obj, p);
  reject_unknown(obj, p, {"n_instances", "instances", "links", "position_report_every", "architectures"});
  read(obj, p, "n_instances", f.n_instances);
  if (f.n_instances == 0) throw ConfigError("fog.n_instances", "must be >= 1");
  read(obj, p, "position_report_every", f.position_report_every);
  if (auto it = obj.find("instances"); it != obj.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("fog.instances", "expected a non-empty array");
    f.instances.clear();
    for (const auto& inst : *it) {
      require_object(inst, "fog.instances");
      reject_unknown(inst, "fog.instances", {"id", "bs_ids"});
      fog::FogInstance fi;
      read(inst, "fog.instances", "id", fi.id);
      auto ids = inst.find("bs_ids");
      if (ids == inst.end() || !ids->is_array()) throw ConfigError("fog.instances.bs_ids", "expected an array");
      for (const auto& id : *ids) fi.bs_ids.insert(static_cast<int>(as_unsigned(id, "fog.instances.bs_ids")));
      f.instances.push_back(std::move(fi));
    }
  }
  if (auto it = obj.find("links"); it != obj.end()) {
    require_object(*it, "fog.links");
    for (const auto& [key, value] : it->items()) {
      const std::string field = "fog.links." + key;
      const auto dash = key.find('-');
      if (dash == std::string::npos) throw ConfigError(field, "link key must look like 'UE-BS'");
      const auto a = parse_node_kind(key.substr(0, dash), field);
      const auto b = parse_node_kind(key.substr(dash + 1), field);
      require_object(value, field);
      reject_unknown(value, field, {"fixed_ms", "jitter_ms"});
      fog::LatencyModel m;
      read(value, field, "fixed_ms", m.fixed_ms);
      read(value, field, "jitter_ms", m.jitter_ms);
      if (!(m.fixed_ms >= 0.0)) throw ConfigError(field + ".fixed_ms", "must be >= 0");
      if (!(m.jitter_ms >= 0.0)) throw ConfigError(field + ".jitter_ms", "must be >= 0");
      f.links[a <= b ? fog::LinkKey{a, b} : fog::LinkKey{b, a}] = m;
    }
  }
  if (auto it = obj.find("architectures"); it != obj.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("fog.architectures", "expected a non-empty array");
    f.architectures.clear();
    for (const auto& v : *it) {
      if (!v.is_string()) throw ConfigError("fog.architectures", "expected 'legacy' or 'fog'");
      try {
        f.architectures.push_back(fog::parse_architecture(v.get<std::string>()));
      } catch (const ArgumentError&) {
        throw ConfigError("fog.architectures", "expected 'legacy' or 'fog'");
      }
    }
  }
}

}  // namespace

ExperimentDocument parse_experiment(const json& doc) {
  require_object(doc, "<document>");
  reject_unknown(doc, "",
                 {"isd_m", "bs_lateral_offset_m", "track_length_m", "speed_mps", "speed_kmh", "epoch_dt_s",
                  "n_fused_bs", "seed", "mode", "warmup_epochs", "noise", "filter", "radio", "sweep", "fog",
                  "description"});
  ExperimentDocument out;
  ScenarioConfig& c = out.scenario;
  read(doc, "", "isd_m", c.isd_m);
  read(doc, "", "bs_lateral_offset_m", c.bs_lateral_offset_m);
  read(doc, "", "track_length_m", c.track_length_m);
  if (doc.contains("speed_mps") && doc.contains("speed_kmh")) {
    throw ConfigError("speed_kmh", "give either speed_mps or speed_kmh, not both");
  }
  read(doc, "", "speed_mps", c.speed_mps);
  if (auto it = doc.find("speed_kmh"); it != doc.end()) c.speed_mps = kmh_to_mps(as_number(*it, "speed_kmh"));
  read(doc, "", "epoch_dt_s", c.epoch_dt_s);
  read(doc, "", "n_fused_bs", c.n_fused_bs);
  read(doc, "", "seed", c.seed);
  if (auto it = doc.find("mode"); it != doc.end()) c.mode = as_mode(*it, "mode");
  read(doc, "", "warmup_epochs", c.warmup_epochs);
  if (auto it = doc.find("noise"); it != doc.end()) parse_noise(*it, c.noise);
  if (auto it = doc.find("filter"); it != doc.end()) parse_filter(*it, c.filter);
  if (auto it = doc.find("radio"); it != doc.end()) parse_radio(*it, c.radio);
  validate(c);

  out.sweep.isd_values = {c.isd_m};
  out.sweep.n_values = {c.n_fused_bs};
  out.sweep.modes = {c.mode};
  if (auto it = doc.find("sweep"); it != doc.end()) parse_sweep(*it, c, out.sweep);
  if (auto it = doc.find("fog"); it != doc.end()) parse_fog(*it, out.fog);
  return out;
}

ExperimentDocument load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment(doc);
}

fog::FogTopology make_topology(const FogSpec& spec, const ScenarioConfig& scenario) {
  const std::size_t n_sites = deployed_bs_count(scenario);
  fog::FogTopology topo;
  if (spec.instances.empty()) {
    if (spec.n_instances > n_sites) {
      throw ConfigError("fog.n_instances", "must not exceed the number of deployed base stations");
    }
    topo = fog::split_evenly(n_sites, spec.n_instances, spec.links);
  } else {
    topo.fog_instances = spec.instances;
    topo.links = spec.links;
  }
  topo.position_report_every = spec.position_report_every;
  return topo;
}

json to_json(const ScenarioConfig& c) {
  json noise = {{"sigma_range_m", c.noise.sigma_range_m},
                {"range_ref_m", c.noise.range_ref_m},
                {"range_dist_exponent", c.noise.range_dist_exponent},
                {"sigma_aoa_deg", rad_to_deg(c.noise.sigma_aoa_rad)},
                {"sigma_accel_mps2", c.noise.sigma_accel_mps2},
                {"accel_bias_rw_mps2_per_sqrt_s", c.noise.accel_bias_rw_mps2_per_sqrt_s},
                {"sigma_speed_mps", c.noise.sigma_speed_mps},
                {"sigma_init_pos_m", c.noise.sigma_init_pos_m}};
  noise["beam_grid"] = c.noise.beam_grid ? json{{"n_beams_az", c.noise.beam_grid->n_beams_az}} : json(nullptr);
  json filter = {{"jerk_psd", c.filter.jerk_psd},
                 {"init_sigma_vel_mps", c.filter.init_sigma_vel_mps},
                 {"init_sigma_accel_mps2", c.filter.init_sigma_accel_mps2}};
  filter["gate_chi2"] = c.filter.gate_chi2 ? json(*c.filter.gate_chi2) : json(nullptr);
  return {{"isd_m", c.isd_m},
          {"bs_lateral_offset_m", c.bs_lateral_offset_m},
          {"track_length_m", c.track_length_m},
          {"speed_mps", c.speed_mps},
          {"epoch_dt_s", c.epoch_dt_s},
          {"n_fused_bs", c.n_fused_bs},
          {"seed", c.seed},
          {"mode", std::string(to_string(c.mode))},
          {"warmup_epochs", c.warmup_epochs},
          {"noise", noise},
          {"filter", filter},
          {"radio",
           {{"carrier_ghz", c.radio.carrier_ghz},
            {"tx_power_dbm", c.radio.tx_power_dbm},
            {"bs_antennas", c.radio.bs_antennas},
            {"ue_antennas", c.radio.ue_antennas}}}};
}

}  // namespace fusion_track
