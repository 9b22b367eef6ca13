#include "fusion_track/csv_export.hpp"

#include <array>
#include <charconv>

namespace fusion_track::csv {

namespace {

std::string quoted(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string key_prefix(const SweepKey& key) {
  return number(key.isd_m) + "," + std::to_string(key.n_bs) + "," + std::string(to_string(key.mode));
}

}  // namespace

std::string number(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

void write_epochs_header(std::ostream& out) {
  out << "isd_m,n_bs,mode,seed,epoch,t_s,truth_x,truth_y,est_x,est_y,error_m\n";
}

void write_epochs(std::ostream& out, const RunResult& result) {
  const SweepKey key{result.config.isd_m, result.config.n_fused_bs, result.config.mode};
  const std::string prefix = key_prefix(key) + "," + std::to_string(result.seed) + ",";
  for (const EpochRecord& r : result.per_epoch) {
    out << prefix << r.epoch << ',' << number(r.t_s) << ',' << number(r.truth.x()) << ','
        << number(r.truth.y()) << ',' << number(r.estimate.x()) << ',' << number(r.estimate.y()) << ','
        << number(r.error_m) << '\n';
  }
}

void write_summary_header(std::ostream& out) {
  out << "isd_m,n_bs,mode,p50,p68.3,p90,p99.7,mean,max,n_samples\n";
}

void write_summary_row(std::ostream& out, const SweepKey& key, const ErrorReport& report) {
  out << key_prefix(key) << ',' << number(report.percentile(50)) << ',' << number(report.percentile(68.3)) << ','
      << number(report.percentile(90)) << ',' << number(report.percentile(99.7)) << ',' << number(report.mean())
      << ',' << number(report.max()) << ',' << report.size() << '\n';
}

void write_requirements_header(std::ostream& out, bool with_key) {
  if (with_key) out << "isd_m,n_bs,mode,";
  out << "profile,accuracy_m,sigma_level,achieved_m,pass,margin_m\n";
}

void write_requirements(std::ostream& out, const ErrorReport& report,
                        std::span<const RequirementProfile> profiles, const SweepKey* key) {
  for (const RequirementProfile& p : profiles) {
    const RequirementCheck c = check_requirement(report, p);
    if (key) out << key_prefix(*key) << ',';
    out << quoted(p.name) << ',' << number(p.accuracy_m) << ',' << to_string(p.sigma_level) << ','
        << number(c.achieved_m) << ',' << (c.pass ? "true" : "false") << ',' << number(c.margin_m) << '\n';
  }
}

void write_events(std::ostream& out, std::span<const fog::PositioningEvent> events) {
  out << "t_ms,kind,path,latency_ms,fog_owner,context_version\n";
  for (const fog::PositioningEvent& e : events) {
    std::string path;
    for (std::size_t i = 0; i < e.path.size(); ++i) {
      if (i) path += '>';
      path += e.path[i].label();
    }
    out << number(e.t_ms) << ',' << fog::to_string(e.kind) << ',' << path << ',' << number(e.latency_ms) << ','
        << (e.fog_owner ? "FOG" + std::to_string(*e.fog_owner) : std::string("LMF")) << ','
        << e.context_version << '\n';
  }
}

void write_latency_summary_header(std::ostream& out) {
  out << "architecture,hops,p50_ms,p90_ms,p99.7_ms,mean_ms,max_ms,reports,transfers\n";
}

void write_latency_summary_row(std::ostream& out, const fog::SessionResult& s) {
  std::size_t hops = 0;
  for (const fog::PositioningEvent& e : s.events) {
    if (e.kind == fog::EventKind::MeasReportI1 || e.kind == fog::EventKind::LegacyHop) {
      hops = e.hops();
      break;
    }
  }
  out << fog::to_string(s.architecture) << ',' << hops << ',' << number(s.latency.percentile(50)) << ','
      << number(s.latency.percentile(90)) << ',' << number(s.latency.percentile(99.7)) << ','
      << number(s.latency.mean()) << ',' << number(s.latency.max()) << ',' << s.reports << ',' << s.transfers
      << '\n';
}

void write_profiles(std::ostream& out, std::span<const RequirementProfile> profiles) {
  out << "profile,velocity_kmh,density_per_km2,accuracy_m,sigma_level\n";
  for (const RequirementProfile& p : profiles) {
    out << quoted(p.name) << ',' << number(p.velocity_kmh) << ','
        << (p.density_per_km2 ? number(*p.density_per_km2) : std::string("N/A")) << ',' << number(p.accuracy_m)
        << ',' << to_string(p.sigma_level) << '\n';
  }
}

std::string profile_line(const RequirementProfile& p) {
  std::string level;
  switch (p.sigma_level) {
    case SigmaLevel::One:
      level = "1σ";
      break;
    case SigmaLevel::Three:
      level = "3σ";
      break;
    case SigmaLevel::Unspecified:
      level = "σ unspecified";
      break;
  }
  std::string line = p.name + ", " + number(p.accuracy_m) + " m, " + level + ", " + number(p.velocity_kmh) + " km/h, ";
  line += p.density_per_km2 ? number(*p.density_per_km2) + " /km²" : std::string("N/A");
  return line;
}

}  // namespace fusion_track::csv
