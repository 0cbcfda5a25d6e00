#include "seatrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seatrack/error.hpp"
#include "seatrack/rng.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

double wrap360(double deg) {
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg;
}

// Signed smallest difference a-b in (-180, 180].
double wrap180(double deg) {
  double d = std::fmod(deg + 180.0, 360.0);
  if (d < 0.0) d += 360.0;
  return d - 180.0;
}

struct Flat {
  double nm_lat;
  double nm_lon;
  explicit Flat(double ref_lat)
      : nm_lat(nm_per_deg_lat()), nm_lon(nm_per_deg_lon(ref_lat)) {}
  double dist_nm(const Waypoint& a, const Waypoint& b) const {
    const double dy = (b.lat - a.lat) * nm_lat;
    const double dx = (b.lon - a.lon) * nm_lon;
    return std::sqrt(dx * dx + dy * dy);
  }
  // Nautical bearing: 0 = north, clockwise positive.
  double bearing_deg(const Waypoint& from, const Waypoint& to) const {
    const double dy = (to.lat - from.lat) * nm_lat;
    const double dx = (to.lon - from.lon) * nm_lon;
    if (dx == 0.0 && dy == 0.0) return 0.0;
    return wrap360(std::atan2(dx, dy) / kDegToRad);
  }
};

void validate(const ScenarioConfig& cfg) {
  if (cfg.vessels.empty()) throw ArgumentError("generate: scenario has no vessels");
  if (cfg.duration_s <= 0) throw ArgumentError("generate: duration must be positive");
  for (const VesselProfile& v : cfg.vessels) {
    if (v.id.empty()) throw ArgumentError("generate: vessel with empty id");
    if (v.circuit.size() < 2) {
      throw ArgumentError("generate: vessel '" + v.id + "' needs at least 2 waypoints");
    }
    if (!(v.base_speed_kn > 0)) {
      throw ArgumentError("generate: vessel '" + v.id + "' needs a positive speed");
    }
    if (v.min_interval_s <= 0 || v.max_interval_s < v.min_interval_s) {
      throw ArgumentError("generate: vessel '" + v.id + "' has a bad report interval range");
    }
  }
}

}  // namespace

double nm_per_deg_lat() { return 60.0; }
double nm_per_deg_lon(double ref_lat) { return 60.0 * std::cos(ref_lat * kDegToRad); }

std::vector<AisRecord> generate(const ScenarioConfig& cfg) {
  validate(cfg);
  const Flat flat(cfg.ref_lat);
  std::vector<AisRecord> rows;
  for (std::size_t vi = 0; vi < cfg.vessels.size(); ++vi) {
    const VesselProfile& v = cfg.vessels[vi];
    Rng rng(derive_seed(cfg.seed, 0x56455353 + vi));
    Waypoint pos = v.circuit[0];
    std::size_t target = 1;
    double heading = flat.bearing_deg(pos, v.circuit[target]);
    // Staggered first report so vessels do not tick in lockstep.
    std::int64_t t = cfg.start_time + rng.uniform_int(0, v.max_interval_s);
    const std::int64_t end = cfg.start_time + cfg.duration_s;
    while (t < end) {
      const double scale = v.leg_speed_scale.empty()
                               ? 1.0
                               : v.leg_speed_scale[target % v.leg_speed_scale.size()];
      double speed_kn = v.base_speed_kn * scale +
                        rng.uniform(-v.speed_jitter_kn, v.speed_jitter_kn);
      speed_kn = std::max(0.5, speed_kn);
      const double desired = flat.bearing_deg(pos, v.circuit[target]);
      const double turn = std::clamp(wrap180(desired - heading), -v.turn_limit_deg,
                                     v.turn_limit_deg);
      heading = wrap360(heading + turn);
      const double course =
          wrap360(heading + rng.uniform(-v.course_noise_deg, v.course_noise_deg));
      const std::int64_t dt = rng.uniform_int(v.min_interval_s, v.max_interval_s);

      AisRecord r;
      r.vessel_id = v.id;
      r.timestamp = t;
      r.lat = pos.lat;
      r.lon = pos.lon;
      r.speed = speed_kn * 10.0;  // wire unit: tenths of a knot
      r.course = course;
      rows.push_back(std::move(r));

      // The row we just emitted describes the motion to the next row.
      const double dist_nm = speed_kn * static_cast<double>(dt) / 3600.0;
      pos.lat += dist_nm * std::cos(course * kDegToRad) / flat.nm_lat;
      pos.lon += dist_nm * std::sin(course * kDegToRad) / flat.nm_lon;
      t += dt;

      const double remaining = flat.dist_nm(pos, v.circuit[target]);
      if (remaining <= std::max(1.8 * dist_nm, 0.02)) {
        target = (target + 1) % v.circuit.size();
      }
    }
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].timestamp < rows[b].timestamp;
  });
  std::vector<AisRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    AisRecord r = std::move(rows[order[i]]);
    r.object_id = static_cast<std::int64_t>(i + 1);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AisRecord> inject_gaps(const std::vector<AisRecord>& records, double gap_prob,
                                   std::size_t min_len, std::size_t max_len,
                                   std::uint64_t seed) {
  if (!(gap_prob >= 0.0 && gap_prob <= 1.0)) {
    throw ArgumentError("inject_gaps: gap_prob must be in [0,1]");
  }
  if (min_len == 0 || max_len < min_len) {
    throw ArgumentError("inject_gaps: bad gap length range");
  }
  if (gap_prob == 0.0) return records;
  // Row indices per vessel, in file order.
  std::vector<std::string> vessel_order;
  std::vector<std::vector<std::size_t>> per_vessel;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string& vid = records[i].vessel_id;
    auto it = std::find(vessel_order.begin(), vessel_order.end(), vid);
    std::size_t vi;
    if (it == vessel_order.end()) {
      vessel_order.push_back(vid);
      per_vessel.emplace_back();
      vi = vessel_order.size() - 1;
    } else {
      vi = static_cast<std::size_t>(it - vessel_order.begin());
    }
    per_vessel[vi].push_back(i);
  }
  std::vector<bool> keep(records.size(), false);
  for (std::size_t vi = 0; vi < per_vessel.size(); ++vi) {
    const std::vector<std::size_t>& idx = per_vessel[vi];
    Rng rng(derive_seed(seed, 0x47415053 + vi));
    keep[idx.front()] = true;
    std::size_t i = 1;
    while (i + 1 < idx.size()) {
      if (rng.uniform() < gap_prob) {
        const std::size_t len =
            static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(min_len),
                                                     static_cast<std::int64_t>(max_len)));
        i += len;  // swallow this row and the next len-1
      } else {
        keep[idx[i]] = true;
        i += 1;
      }
    }
    keep[idx.back()] = true;
  }
  std::vector<AisRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

namespace {

// 2020-03-01T00:00:00Z, the day after the reference data's last timestamp.
constexpr std::int64_t kScenarioStart = 1583020800;

Waypoint offset_nm(const Waypoint& base, double north_nm, double east_nm, const Flat& flat) {
  return {base.lat + north_nm / flat.nm_lat, base.lon + east_nm / flat.nm_lon};
}

// Regular polygon circuit around a center; negative radius flips orientation
// so the vessel runs the same loop the other way around.
std::vector<Waypoint> loop_circuit(const Waypoint& center, double radius_nm, int corners,
                                   double phase_deg, const Flat& flat) {
  std::vector<Waypoint> out;
  const double dir = radius_nm < 0 ? -1.0 : 1.0;
  const double r = std::abs(radius_nm);
  for (int k = 0; k < corners; ++k) {
    const double a = (phase_deg + dir * 360.0 * k / corners) * kDegToRad;
    out.push_back(offset_nm(center, r * std::cos(a), r * std::sin(a), flat));
  }
  return out;
}

// Out-and-back lane with interior points, so leg_speed_scale can shape a
// speed-vs-position profile: [p0 p1 .. p6 p5 .. p1] and wrap, 12 legs.
std::vector<Waypoint> lane_circuit(const Waypoint& near, const Waypoint& far) {
  const int segments = 6;
  std::vector<Waypoint> fwd;
  const double dlat = far.lat - near.lat, dlon = far.lon - near.lon;
  for (int k = 0; k <= segments; ++k) {
    const double f = static_cast<double>(k) / segments;
    fwd.push_back({near.lat + f * dlat, near.lon + f * dlon});
  }
  std::vector<Waypoint> out = fwd;
  for (int k = segments - 1; k >= 1; --k) out.push_back(fwd[static_cast<std::size_t>(k)]);
  return out;
}

std::vector<double> rotated(std::vector<double> v, std::size_t by) {
  if (!v.empty()) std::rotate(v.begin(), v.begin() + static_cast<long>(by % v.size()), v.end());
  return v;
}

std::vector<Waypoint> rotated_wp(std::vector<Waypoint> v, std::size_t by) {
  if (!v.empty()) std::rotate(v.begin(), v.begin() + static_cast<long>(by % v.size()), v.end());
  return v;
}

}  // namespace

ScenarioConfig small5_scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "small5";
  cfg.ref_lat = 37.9;
  cfg.start_time = kScenarioStart;
  cfg.duration_s = 42700;  // ~1,420 reports per vessel at ~30 s spacing
  cfg.seed = seed;
  const Flat flat(cfg.ref_lat);
  const Waypoint hub{37.9, 23.6};
  const double speeds[5] = {5.5, 7.5, 9.5, 11.5, 13.5};
  const int corners[5] = {3, 4, 5, 6, 4};
  for (int k = 0; k < 5; ++k) {
    VesselProfile v;
    v.id = "vessel " + std::to_string(k + 1);
    const double a = (90.0 - 72.0 * k) * kDegToRad;
    const Waypoint center = offset_nm(hub, 16.0 * std::sin(a), 16.0 * std::cos(a), flat);
    v.circuit = loop_circuit(center, 2.2, corners[k], 37.0 * k, flat);
    v.base_speed_kn = speeds[k];
    v.speed_jitter_kn = 0.3;
    v.course_noise_deg = 3.0;
    v.turn_limit_deg = 25.0;
    v.min_interval_s = 20;
    v.max_interval_s = 40;
    cfg.vessels.push_back(std::move(v));
  }
  return cfg;
}

ScenarioConfig port30_scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "port30";
  cfg.ref_lat = 37.94;
  cfg.start_time = kScenarioStart;
  cfg.duration_s = 30500;  // ~1,010 reports per vessel at ~30 s spacing
  cfg.seed = seed;
  const Flat flat(cfg.ref_lat);
  const Waypoint port{37.94, 23.63};
  int vessel_no = 1;
  auto next_id = [&]() { return "vessel " + std::to_string(vessel_no++); };

  // Fifteen vessels share five radial corridors, three per lane, all on the
  // exact centerline, so position alone cannot separate lane mates. Speed
  // over ground does: every leg deals the three mates a permutation of three
  // well-spaced speed bands and the deal changes leg to leg, so identity is
  // a joint function of where the vessel is, which way it points and how
  // fast it moves.
  constexpr double kBand[3] = {0.55, 1.00, 1.45};
  constexpr int kLaneBand[12][3] = {
      {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2},
      {2, 0, 1}, {0, 1, 2}, {1, 2, 0}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1},
  };
  for (int lane = 0; lane < 5; ++lane) {
    const double ang = (18.0 + 72.0 * lane) * kDegToRad;
    const Waypoint near = offset_nm(port, 2.5 * std::cos(ang), 2.5 * std::sin(ang), flat);
    const Waypoint far = offset_nm(port, 26.0 * std::cos(ang), 26.0 * std::sin(ang), flat);
    for (int j = 0; j < 3; ++j) {
      VesselProfile v;
      v.id = next_id();
      std::vector<double> profile(12);
      for (int m = 0; m < 12; ++m) profile[static_cast<std::size_t>(m)] = kBand[kLaneBand[m][j]];
      v.circuit = rotated_wp(lane_circuit(near, far), static_cast<std::size_t>(5 * j));
      v.leg_speed_scale = rotated(std::move(profile), static_cast<std::size_t>(5 * j));
      v.base_speed_kn = 8.5;
      v.speed_jitter_kn = 0.55;
      v.course_noise_deg = 4.0;
      v.turn_limit_deg = 30.0;
      v.min_interval_s = 20;
      v.max_interval_s = 40;
      cfg.vessels.push_back(std::move(v));
    }
  }

  // Ten vessels in five clockwise/counter-clockwise pairs: each pair runs the
  // same loop in opposite directions, so only the joint of position and
  // course tells them apart.
  for (int p = 0; p < 5; ++p) {
    const double ang = (54.0 + 72.0 * p) * kDegToRad;
    const Waypoint center = offset_nm(port, 17.0 * std::cos(ang), 17.0 * std::sin(ang), flat);
    for (int d = 0; d < 2; ++d) {
      VesselProfile v;
      v.id = next_id();
      v.circuit = loop_circuit(center, d == 0 ? 2.8 : -2.8, 5, 23.0 * p, flat);
      v.base_speed_kn = 7.0 + 0.8 * p;
      v.speed_jitter_kn = 0.5;
      v.course_noise_deg = 4.0;
      v.turn_limit_deg = 30.0;
      v.min_interval_s = 20;
      v.max_interval_s = 40;
      cfg.vessels.push_back(std::move(v));
    }
  }

  // Five singletons on their own loops further out.
  for (int s = 0; s < 5; ++s) {
    VesselProfile v;
    v.id = next_id();
    const double ang = (36.0 + 72.0 * s) * kDegToRad;
    const Waypoint center = offset_nm(port, 31.0 * std::cos(ang), 31.0 * std::sin(ang), flat);
    v.circuit = loop_circuit(center, 2.0 + 0.3 * s, 4, 51.0 * s, flat);
    v.base_speed_kn = 5.0 + 1.7 * s;
    v.speed_jitter_kn = 0.4;
    v.course_noise_deg = 3.5;
    v.turn_limit_deg = 28.0;
    v.min_interval_s = 20;
    v.max_interval_s = 40;
    cfg.vessels.push_back(std::move(v));
  }
  return cfg;
}

ScenarioConfig scenario_by_name(const std::string& name, std::uint64_t seed) {
  if (name == "small5") return small5_scenario(seed);
  if (name == "port30") return port30_scenario(seed);
  std::string known;
  for (const std::string& s : scenario_names()) {
    if (!known.empty()) known += ", ";
    known += s;
  }
  throw ArgumentError("unknown scenario '" + name + "' (available: " + known + ")");
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"small5", "port30"};
  return names;
}

}  // namespace seatrack
