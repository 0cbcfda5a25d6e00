#pragma once

// Synthetic AIS traffic: vessels cycle through waypoint circuits under a
// flat-earth projection (1 deg lat = 60 nm, 1 deg lon = 60*cos(ref_lat) nm),
// with jittered speed, rate-limited heading changes and irregular integer
// report intervals. Each emitted row records the speed/course actually used
// to reach the next row, so kinematic consistency is testable.

#include <cstdint>
#include <string>
#include <vector>

#include "seatrack/ais.hpp"

namespace seatrack {

struct Waypoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct VesselProfile {
  std::string id;
  std::vector<Waypoint> circuit;       // visited in order, then wraps around
  double base_speed_kn = 8.0;          // knots
  // Per-leg speed multiplier, indexed by the waypoint being approached and
  // wrapped to the circuit length; {} means constant speed. This is what
  // couples speed to position and makes shared-corridor vessels separable
  // only through joint feature patterns.
  std::vector<double> leg_speed_scale;
  double speed_jitter_kn = 0.3;        // uniform +- on every report
  double course_noise_deg = 3.0;       // uniform +- on every report
  double turn_limit_deg = 25.0;        // max heading change per report
  std::int64_t min_interval_s = 20;    // report spacing, uniform integer draw
  std::int64_t max_interval_s = 40;
};

struct ScenarioConfig {
  std::string name;
  double ref_lat = 0.0;                // projection latitude for the region
  std::int64_t start_time = 0;         // epoch seconds of the first report
  std::int64_t duration_s = 0;         // reports stop at start_time + duration
  std::uint64_t seed = 1;
  std::vector<VesselProfile> vessels;
};

// All rows for a scenario, ordered by (timestamp, object id); object ids are
// assigned 1..N over that ordering. Deterministic in cfg.seed.
std::vector<AisRecord> generate(const ScenarioConfig& cfg);

// Removes runs of rows per vessel to simulate reception gaps. At each row a
// gap starts with probability gap_prob and swallows a uniform draw of
// [min_len, max_len] rows; the first and last row of every vessel always
// survive. Deterministic in seed.
std::vector<AisRecord> inject_gaps(const std::vector<AisRecord>& records, double gap_prob,
                                   std::size_t min_len, std::size_t max_len,
                                   std::uint64_t seed);

// Canned scenarios. small5: five vessels on well-separated circuits, about
// 1,420 rows each. port30: thirty vessels around one port, half of them
// sharing five corridors, about 1,010 rows each.
ScenarioConfig small5_scenario(std::uint64_t seed);
ScenarioConfig port30_scenario(std::uint64_t seed);

ScenarioConfig scenario_by_name(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& scenario_names();

// Shared flat-projection helpers (tests recompute implied speeds with them).
double nm_per_deg_lat();
double nm_per_deg_lon(double ref_lat);

}  // namespace seatrack
