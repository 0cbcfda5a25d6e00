#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "seatrack/pipeline.hpp"
#include "seatrack/synth.hpp"

using namespace seatrack;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::vector<AisRecord> vessel_rows(const std::vector<AisRecord>& records,
                                   const std::string& vid) {
  std::vector<AisRecord> out;
  for (const AisRecord& r : records) {
    if (r.vessel_id == vid) out.push_back(r);
  }
  return out;
}

std::map<std::string, std::size_t> vessel_counts(const std::vector<AisRecord>& records) {
  std::map<std::string, std::size_t> counts;
  for (const AisRecord& r : records) counts[r.vessel_id]++;
  return counts;
}

std::string rows_as_text(const std::vector<AisRecord>& records) {
  std::ostringstream os;
  write_csv(records, os);
  return os.str();
}

double wrap180(double deg) {
  double d = std::fmod(deg + 180.0, 360.0);
  if (d < 0.0) d += 360.0;
  return d - 180.0;
}

}  // namespace

TEST_CASE("generation is byte-identical for a fixed seed") {
  const std::string a = rows_as_text(generate(small5_scenario(7)));
  const std::string b = rows_as_text(generate(small5_scenario(7)));
  const std::string c = rows_as_text(generate(small5_scenario(8)));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("small5 produces five vessels at roughly 1,420 rows each") {
  auto rows = generate(small5_scenario(1));
  CHECK(rows.size() >= 6500);
  CHECK(rows.size() <= 7700);
  auto counts = vessel_counts(rows);
  REQUIRE(counts.size() == 5);
  for (const auto& [vid, n] : counts) {
    CAPTURE(vid);
    CHECK(n >= 1200);
    CHECK(n <= 1650);
  }
  CHECK(counts.count("vessel 1") == 1);
  CHECK(counts.count("vessel 5") == 1);
}

TEST_CASE("port30 produces thirty vessels at roughly 1,010 rows each") {
  auto rows = generate(port30_scenario(1));
  CHECK(rows.size() >= 28000);
  CHECK(rows.size() <= 32500);
  auto counts = vessel_counts(rows);
  REQUIRE(counts.size() == 30);
  for (const auto& [vid, n] : counts) {
    CAPTURE(vid);
    CHECK(n >= 850);
    CHECK(n <= 1200);
  }
}

TEST_CASE("rows are globally time-ordered with 1..N object ids") {
  auto rows = generate(small5_scenario(2));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].object_id == static_cast<std::int64_t>(i + 1));
    if (i > 0) CHECK(rows[i].timestamp >= rows[i - 1].timestamp);
    CHECK(rows[i].complete());
    CHECK(rows[i].course >= 0.0);
    CHECK(rows[i].course < 360.0);
    CHECK(rows[i].speed >= 0.0);
  }
}

TEST_CASE("each recorded row describes the motion to the next row") {
  const ScenarioConfig cfg = small5_scenario(3);
  auto rows = generate(cfg);
  const double nm_lat = nm_per_deg_lat();
  const double nm_lon = nm_per_deg_lon(cfg.ref_lat);
  std::size_t checked = 0;
  for (const auto& [vid, n] : vessel_counts(rows)) {
    auto mine = vessel_rows(rows, vid);
    for (std::size_t i = 0; i + 1 < mine.size(); ++i) {
      const double dt = static_cast<double>(mine[i + 1].timestamp - mine[i].timestamp);
      REQUIRE(dt >= 20);
      REQUIRE(dt <= 40);
      const double dy = (mine[i + 1].lat - mine[i].lat) * nm_lat;
      const double dx = (mine[i + 1].lon - mine[i].lon) * nm_lon;
      const double implied_kn = std::sqrt(dx * dx + dy * dy) / (dt / 3600.0);
      const double recorded_kn = mine[i].speed / 10.0;  // wire unit: tenths of a knot
      CHECK(implied_kn == doctest::Approx(recorded_kn).epsilon(1e-6));
      const double implied_course = std::fmod(std::atan2(dx, dy) / kDegToRad + 360.0, 360.0);
      CHECK(std::abs(wrap180(implied_course - mine[i].course)) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 6000);
}

TEST_CASE("heading changes respect the per-report turn limit") {
  const ScenarioConfig cfg = small5_scenario(4);
  auto rows = generate(cfg);
  // Course = rate-limited heading + bounded noise, so consecutive courses can
  // differ by at most the turn limit plus twice the noise band.
  const double bound = 25.0 + 2.0 * 3.0 + 1e-9;
  for (const auto& [vid, n] : vessel_counts(rows)) {
    auto mine = vessel_rows(rows, vid);
    for (std::size_t i = 0; i + 1 < mine.size(); ++i) {
      CHECK(std::abs(wrap180(mine[i + 1].course - mine[i].course)) <= bound);
    }
  }
}

TEST_CASE("generated data flows through the csv and cleaning stages intact") {
  auto rows = generate(small5_scenario(5));
  std::istringstream in(rows_as_text(rows));
  ParseResult parsed = parse_csv(in);
  CHECK(parsed.rejects.empty());
  REQUIRE(parsed.records.size() == rows.size());
  CHECK(parsed.records[0].vessel_id == rows[0].vessel_id);
  CHECK(parsed.records[0].timestamp == rows[0].timestamp);
  CHECK(parsed.records[0].lat == doctest::Approx(rows[0].lat).epsilon(1e-9));

  CleanReport report;
  auto kept = clean_and_threshold(parsed.records, 50, &report);
  CHECK(kept.size() == parsed.records.size());
  CHECK(report.rows_missing == 0);
  CHECK(report.dropped_vessels.empty());
}

TEST_CASE("small5 vessels are separable by a nearest-centroid oracle") {
  auto rows = generate(small5_scenario(6));
  LabelMap labels = LabelMap::from_vessel_ids({"vessel 1", "vessel 2", "vessel 3", "vessel 4",
                                               "vessel 5"});
  // Train centroids on each vessel's first 70% of rows, score the rest.
  std::vector<double> sum_lat(5, 0), sum_lon(5, 0);
  std::vector<std::size_t> n_train(5, 0);
  std::vector<AisRecord> held;
  for (std::size_t k = 0; k < 5; ++k) {
    auto mine = vessel_rows(rows, labels.name(k));
    const std::size_t cut = mine.size() * 7 / 10;
    for (std::size_t i = 0; i < mine.size(); ++i) {
      if (i < cut) {
        sum_lat[k] += mine[i].lat;
        sum_lon[k] += mine[i].lon;
        ++n_train[k];
      } else {
        held.push_back(mine[i]);
      }
    }
  }
  std::size_t hits = 0;
  for (const AisRecord& r : held) {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t k = 0; k < 5; ++k) {
      const double dlat = r.lat - sum_lat[k] / double(n_train[k]);
      const double dlon = r.lon - sum_lon[k] / double(n_train[k]);
      const double d = dlat * dlat + dlon * dlon;
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    hits += labels.name(best) == r.vessel_id ? 1 : 0;
  }
  CHECK(double(hits) / double(held.size()) >= 0.99);
}

TEST_CASE("port30 lane mates overlap in position") {
  // Vessels 1..3 share the first corridor; their bounding boxes must overlap
  // heavily, otherwise the scenario would be trivially separable by position.
  auto rows = generate(port30_scenario(1));
  auto box = [&](const std::string& vid) {
    double lo_lat = 90, hi_lat = -90, lo_lon = 180, hi_lon = -180;
    for (const AisRecord& r : vessel_rows(rows, vid)) {
      lo_lat = std::min(lo_lat, r.lat);
      hi_lat = std::max(hi_lat, r.lat);
      lo_lon = std::min(lo_lon, r.lon);
      hi_lon = std::max(hi_lon, r.lon);
    }
    return std::array<double, 4>{lo_lat, hi_lat, lo_lon, hi_lon};
  };
  auto a = box("vessel 1");
  auto b = box("vessel 2");
  const double overlap_lat = std::min(a[1], b[1]) - std::max(a[0], b[0]);
  const double overlap_lon = std::min(a[3], b[3]) - std::max(a[2], b[2]);
  CHECK(overlap_lat > 0.8 * (a[1] - a[0]));
  CHECK(overlap_lon > 0.8 * (a[3] - a[2]));
}

TEST_CASE("scenario validation rejects degenerate configurations") {
  ScenarioConfig cfg = small5_scenario(1);
  cfg.vessels.clear();
  CHECK_THROWS_AS(generate(cfg), ArgumentError);

  cfg = small5_scenario(1);
  cfg.duration_s = 0;
  CHECK_THROWS_AS(generate(cfg), ArgumentError);

  cfg = small5_scenario(1);
  cfg.vessels[0].circuit.resize(1);
  CHECK_THROWS_AS(generate(cfg), ArgumentError);

  cfg = small5_scenario(1);
  cfg.vessels[0].min_interval_s = 30;
  cfg.vessels[0].max_interval_s = 20;
  CHECK_THROWS_AS(generate(cfg), ArgumentError);

  cfg = small5_scenario(1);
  cfg.vessels[0].base_speed_kn = 0.0;
  CHECK_THROWS_AS(generate(cfg), ArgumentError);
}

TEST_CASE("unknown scenario names list the available ones") {
  try {
    scenario_by_name("atlantic", 1);
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("atlantic") != std::string::npos);
    CHECK(msg.find("small5") != std::string::npos);
    CHECK(msg.find("port30") != std::string::npos);
  }
  CHECK(scenario_by_name("small5", 9).name == "small5");
  CHECK(scenario_by_name("port30", 9).name == "port30");
}

TEST_CASE("gap injection at probability zero is the identity") {
  auto rows = generate(small5_scenario(10));
  auto out = inject_gaps(rows, 0.0, 1, 5, 11);
  CHECK(rows_as_text(out) == rows_as_text(rows));
}

TEST_CASE("gap injection at probability one keeps only the endpoints") {
  auto rows = generate(small5_scenario(12));
  auto out = inject_gaps(rows, 1.0, 1, 1, 13);
  auto counts = vessel_counts(out);
  REQUIRE(counts.size() == 5);
  for (const auto& [vid, n] : counts) CHECK(n == 2);
  for (const auto& [vid, n] : counts) {
    auto all = vessel_rows(rows, vid);
    auto kept = vessel_rows(out, vid);
    CHECK(kept.front().timestamp == all.front().timestamp);
    CHECK(kept.back().timestamp == all.back().timestamp);
  }
}

TEST_CASE("gap injection removes close to the expected fraction") {
  auto rows = generate(small5_scenario(14));
  auto out = inject_gaps(rows, 0.1, 1, 1, 15);
  // Unit-length gaps make each interior row an independent 10% coin flip.
  const double interior = static_cast<double>(rows.size()) - 10.0;
  const double kept = static_cast<double>(out.size()) - 10.0;
  CHECK(kept / interior == doctest::Approx(0.9).epsilon(0.02));

  SUBCASE("deterministic in the seed") {
    auto again = inject_gaps(rows, 0.1, 1, 1, 15);
    CHECK(rows_as_text(again) == rows_as_text(out));
    auto other = inject_gaps(rows, 0.1, 1, 1, 16);
    CHECK(rows_as_text(other) != rows_as_text(out));
  }
}

TEST_CASE("gap injection validates its arguments") {
  auto rows = generate(small5_scenario(17));
  CHECK_THROWS_AS(inject_gaps(rows, -0.1, 1, 2, 1), ArgumentError);
  CHECK_THROWS_AS(inject_gaps(rows, 1.1, 1, 2, 1), ArgumentError);
  CHECK_THROWS_AS(inject_gaps(rows, 0.5, 0, 2, 1), ArgumentError);
  CHECK_THROWS_AS(inject_gaps(rows, 0.5, 3, 2, 1), ArgumentError);
}

TEST_CASE("longer gaps thin the data roughly by their expected burst size") {
  auto rows = generate(small5_scenario(18));
  auto out = inject_gaps(rows, 0.05, 3, 7, 19);
  // Each interior row starts a 5-row gap with p=0.05: renewal theory gives a
  // kept fraction of 0.95/(0.95 + 0.05*5) = 0.7917; allow a loose band.
  const double frac = static_cast<double>(out.size()) / static_cast<double>(rows.size());
  CHECK(frac > 0.74);
  CHECK(frac < 0.84);
}
