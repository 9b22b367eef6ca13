#pragma once

#include <ostream>
#include <span>
#include <string>

#include "fusion_track/fogsim.hpp"
#include "fusion_track/runner.hpp"
#include "fusion_track/scenario.hpp"

namespace fusion_track::csv {

// Shortest round-trip decimal form; identical inputs always give identical text.
std::string number(double value);

// isd_m,n_bs,mode,seed,epoch,t_s,truth_x,truth_y,est_x,est_y,error_m
void write_epochs_header(std::ostream& out);
void write_epochs(std::ostream& out, const RunResult& result);

// isd_m,n_bs,mode,p50,p68.3,p90,p99.7,mean,max,n_samples
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SweepKey& key, const ErrorReport& report);

// [isd_m,n_bs,mode,]profile,accuracy_m,sigma_level,achieved_m,pass,margin_m
void write_requirements_header(std::ostream& out, bool with_key);
void write_requirements(std::ostream& out, const ErrorReport& report,
                        std::span<const RequirementProfile> profiles, const SweepKey* key = nullptr);

// t_ms,kind,path,latency_ms,fog_owner,context_version
void write_events(std::ostream& out, std::span<const fog::PositioningEvent> events);

// architecture,hops,p50_ms,p90_ms,p99.7_ms,mean_ms,max_ms,reports,transfers
void write_latency_summary_header(std::ostream& out);
void write_latency_summary_row(std::ostream& out, const fog::SessionResult& session);

// profile,velocity_kmh,density_per_km2,accuracy_m,sigma_level
void write_profiles(std::ostream& out, std::span<const RequirementProfile> profiles);

// Human-readable form, e.g. "Group start, 0.2 m, 3σ, 70 km/h, 3200 /km²".
std::string profile_line(const RequirementProfile& profile);

}  // namespace fusion_track::csv
