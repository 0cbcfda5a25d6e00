#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "seatrack/ais.hpp"
#include "seatrack/pipeline.hpp"
#include "seatrack/util.hpp"

using namespace seatrack;

namespace {

AisRecord rec(const std::string& vid, std::int64_t ts, double lat, double lon, double speed,
              double course) {
  AisRecord r;
  r.object_id = ts;  // any stable value
  r.vessel_id = vid;
  r.timestamp = ts;
  r.lat = lat;
  r.lon = lon;
  r.speed = speed;
  r.course = course;
  return r;
}

std::vector<AisRecord> n_complete(const std::string& vid, std::size_t n, std::int64_t t0 = 0) {
  std::vector<AisRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(rec(vid, t0 + static_cast<std::int64_t>(i), 37.0 + 0.001 * i, 23.0, 55.0, 180.0));
  }
  return out;
}

}  // namespace

TEST_CASE("a real-world sample row parses field for field") {
  std::string reason;
  auto r = parse_csv_row("1,vessel 1,2020-02-29T22:00:01Z,37.8567167,23.53735,0,0", &reason);
  REQUIRE(r.has_value());
  CHECK(r->object_id == 1);
  CHECK(r->vessel_id == "vessel 1");
  CHECK(r->timestamp == parse_iso8601("2020-02-29T22:00:01Z").value());
  CHECK(r->lat == doctest::Approx(37.8567167).epsilon(1e-12));
  CHECK(r->lon == doctest::Approx(23.53735).epsilon(1e-12));
  CHECK(r->speed == 0.0);
  CHECK(r->course == 0.0);
  CHECK(r->complete());
}

TEST_CASE("iso8601 round-trips and rejects sloppy shapes") {
  const std::string s = "2020-02-29T22:00:01Z";
  auto t = parse_iso8601(s);
  REQUIRE(t.has_value());
  CHECK(format_iso8601(*t) == s);
  CHECK_FALSE(parse_iso8601("2020-02-29 22:00:01").has_value());
  CHECK_FALSE(parse_iso8601("2020-2-29T22:00:01Z").has_value());
  CHECK_FALSE(parse_iso8601("2020-02-30T22:00:01Z").has_value());  // no Feb 30
  CHECK_FALSE(parse_iso8601("").has_value());
}

TEST_CASE("empty fields are missing values, not errors") {
  std::string reason;
  auto r = parse_csv_row("7,,2020-02-29T22:00:01Z,,23.5,,90", &reason);
  REQUIRE(r.has_value());
  CHECK(r->vessel_id.empty());
  CHECK(std::isnan(r->lat));
  CHECK(r->lon == 23.5);
  CHECK(std::isnan(r->speed));
  CHECK_FALSE(r->has_features());
  CHECK_FALSE(r->complete());
}

TEST_CASE("malformed rows are rejected with a reason") {
  std::string reason;
  CHECK_FALSE(parse_csv_row("8,v,2020-02-29T22:00:01Z,abc,23.5,0,0", &reason).has_value());
  CHECK(reason.find("LAT") != std::string::npos);
  CHECK_FALSE(parse_csv_row("8,v,2020-02-29T22:00:01Z,95.0,23.5,0,0", &reason).has_value());
  CHECK_FALSE(parse_csv_row("8,v,2020-02-29T22:00:01Z,37.0,181.0,0,0", &reason).has_value());
  CHECK_FALSE(parse_csv_row("8,v,2020-02-29T22:00:01Z,37.0,23.5,-1,0", &reason).has_value());
  CHECK_FALSE(parse_csv_row("8,v,not-a-time,37.0,23.5,0,0", &reason).has_value());
  CHECK_FALSE(parse_csv_row("8,v,2020-02-29T22:00:01Z,37.0,23.5,0", &reason).has_value());
  CHECK(reason.find("field") != std::string::npos);  // wrong column count
}

TEST_CASE("course is normalized into [0,360)") {
  std::string reason;
  auto r = parse_csv_row("9,v,2020-02-29T22:00:01Z,37.0,23.5,0,360", &reason);
  REQUIRE(r.has_value());
  CHECK(r->course == 0.0);
  r = parse_csv_row("9,v,2020-02-29T22:00:01Z,37.0,23.5,0,-90", &reason);
  REQUIRE(r.has_value());
  CHECK(r->course == 270.0);
}

TEST_CASE("parse_csv keeps good rows and lists rejects with line numbers") {
  std::istringstream in(
      "ID,VID,SEQUENCE_DTTM,LAT,LON,SPEED,COURSE\n"
      "1,v1,2020-02-29T22:00:01Z,37.0,23.5,12,90\n"
      "2,v1,2020-02-29T22:00:11Z,abc,23.5,12,90\n"
      "3,v2,2020-02-29T22:00:21Z,37.1,23.6,15,180\n");
  ParseResult res = parse_csv(in);
  CHECK(res.records.size() == 2);
  REQUIRE(res.rejects.size() == 1);
  CHECK(res.rejects[0].line == 3);
  CHECK(res.rejects[0].reason.find("LAT") != std::string::npos);
}

TEST_CASE("parse_csv refuses a wrong header or an empty stream") {
  std::istringstream bad("id,vid,time,lat,lon,speed,course\n1,v,2020-01-01T00:00:00Z,1,2,3,4\n");
  CHECK_THROWS_AS(parse_csv(bad), FormatError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty), FormatError);
}

TEST_CASE("csv rows round-trip through to_csv_row") {
  std::string reason;
  const std::string line = "1,vessel 1,2020-02-29T22:00:01Z,37.8567167,23.53735,0,0";
  auto r = parse_csv_row(line, &reason);
  REQUIRE(r.has_value());
  auto again = parse_csv_row(to_csv_row(*r), &reason);
  REQUIRE(again.has_value());
  CHECK(again->vessel_id == r->vessel_id);
  CHECK(again->timestamp == r->timestamp);
  CHECK(again->lat == r->lat);
  CHECK(again->lon == r->lon);
  CHECK(again->speed == r->speed);
  CHECK(again->course == r->course);
}

TEST_CASE("cleaning drops incomplete rows and under-observed vessels") {
  std::vector<AisRecord> records = n_complete("a", 60);
  auto b = n_complete("b", 50, 1000);
  auto c = n_complete("c", 10, 2000);
  records.insert(records.end(), b.begin(), b.end());
  records.insert(records.end(), c.begin(), c.end());
  AisRecord missing = rec("a", 5000, 37.0, 23.0, 55.0, 180.0);
  missing.lat = std::numeric_limits<double>::quiet_NaN();
  records.push_back(missing);

  CleanReport report;
  auto kept = clean_and_threshold(records, 50, &report);
  CHECK(report.rows_in == 121);
  CHECK(report.rows_missing == 1);
  REQUIRE(report.dropped_vessels.size() == 1);
  CHECK(report.dropped_vessels[0].first == "c");
  CHECK(report.dropped_vessels[0].second == 10);
  CHECK(kept.size() == 110);
  for (const auto& r : kept) CHECK(r.vessel_id != "c");

  SUBCASE("a vessel with exactly min_obs rows survives") {
    std::map<std::string, int> counts;
    for (const auto& r : kept) counts[r.vessel_id]++;
    CHECK(counts["b"] == 50);
  }
  SUBCASE("49 rows is one too few") {
    auto kept49 = clean_and_threshold(n_complete("x", 49), 49);
    CHECK(kept49.size() == 49);
    CHECK_THROWS_AS(clean_and_threshold(n_complete("x", 49), 50), PipelineError);
  }
  SUBCASE("cleaning is idempotent") {
    auto twice = clean_and_threshold(kept, 50);
    CHECK(twice.size() == kept.size());
  }
}

TEST_CASE("vessel selection honors the allowlist and the top-N cap") {
  std::vector<AisRecord> records = n_complete("big", 30);
  auto mid = n_complete("mid", 20, 1000);
  auto small = n_complete("small", 10, 2000);
  records.insert(records.end(), mid.begin(), mid.end());
  records.insert(records.end(), small.begin(), small.end());

  auto top2 = select_vessels(records, 2);
  std::map<std::string, int> counts;
  for (const auto& r : top2) counts[r.vessel_id]++;
  CHECK(counts.size() == 2);
  CHECK(counts.count("big") == 1);
  CHECK(counts.count("mid") == 1);

  auto listed = select_vessels(records, 0, {"small"});
  CHECK(listed.size() == 10);
  CHECK(listed[0].vessel_id == "small");

  auto uncapped = select_vessels(records, 0);
  CHECK(uncapped.size() == records.size());

  SUBCASE("count ties break lexicographically") {
    auto tied = n_complete("aaa", 10, 3000);
    records.insert(records.end(), tied.begin(), tied.end());
    auto top3 = select_vessels(records, 3);
    std::map<std::string, int> c3;
    for (const auto& r : top3) c3[r.vessel_id]++;
    CHECK(c3.count("aaa") == 1);  // beats "small" at equal count
    CHECK(c3.count("small") == 0);
  }
}

TEST_CASE("label map is lexicographic and rejects unknowns") {
  LabelMap map = LabelMap::from_vessel_ids({"vessel 9", "vessel 10", "vessel 9", "alpha"});
  REQUIRE(map.size() == 3);
  CHECK(map.name(0) == "alpha");
  CHECK(map.name(1) == "vessel 10");  // plain string order, not numeric
  CHECK(map.name(2) == "vessel 9");
  CHECK(map.index_of("alpha") == 0);
  CHECK(map.try_index("vessel 9") == 2);
  CHECK_FALSE(map.try_index("ghost").has_value());
  CHECK_THROWS_AS(map.index_of("ghost"), ArgumentError);
}

TEST_CASE("datasets are ordered by timestamp then object id") {
  std::vector<AisRecord> records;
  records.push_back(rec("b", 20, 1.0, 2.0, 3.0, 4.0));
  records.push_back(rec("a", 10, 5.0, 6.0, 7.0, 8.0));
  AisRecord tie = rec("a", 20, 9.0, 10.0, 11.0, 12.0);
  tie.object_id = 1;
  records.push_back(tie);
  records[0].object_id = 2;

  LabelMap map = LabelMap::from_vessel_ids({"a", "b"});
  Dataset d = make_dataset(records, map);
  REQUIRE(d.size() == 3);
  CHECK(d.features.shape() == Shape{3, 4});
  CHECK(d.features.at(0, 0) == 5.0f);  // t=10 first
  CHECK(d.labels[0] == 0);
  CHECK(d.timestamps == std::vector<std::int64_t>({10, 20, 20}));
  CHECK(d.features.at(1, 0) == 9.0f);  // t=20 tie: object 1 before object 2
  CHECK(d.labels[1] == 0);
  CHECK(d.labels[2] == 1);

  AisRecord unknown = rec("ghost", 30, 1.0, 1.0, 1.0, 1.0);
  records.push_back(unknown);
  CHECK_THROWS_AS(make_dataset(records, map), ArgumentError);

  records.pop_back();
  records[0].speed = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(make_dataset(records, map), PipelineError);
}

TEST_CASE("scaler standardizes to zero mean and unit spread") {
  Tensor x({3, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    x.at(0, j) = 1.0f;
    x.at(1, j) = 2.0f;
    x.at(2, j) = 3.0f;
  }
  ScalerParams s = fit_scaler(x);
  REQUIRE(s.mean.size() == 4);
  CHECK(s.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.stdev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  Tensor z = apply_scaler(s, x);
  const double r = std::sqrt(3.0 / 2.0);  // (1-2)/sqrt(2/3)
  CHECK(z.at(0, 0) == doctest::Approx(-r).epsilon(1e-6));
  CHECK(z.at(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.at(2, 0) == doctest::Approx(r).epsilon(1e-6));
}

TEST_CASE("scaled training features have mean 0 and stdev 1 per column") {
  Rng rng(41);
  Tensor x = rng_uniform<float>(rng, {500, 4}, -40.0, 120.0);
  ScalerParams s = fit_scaler(x);
  Tensor z = apply_scaler(s, x);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 500; ++i) mean += z.at(i, j);
    mean /= 500.0;
    for (std::size_t i = 0; i < 500; ++i) {
      const double d = z.at(i, j) - mean;
      var += d * d;
    }
    var /= 500.0;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-3);
  }
}

TEST_CASE("scaler round-trips within float precision") {
  Rng rng(42);
  Tensor x = rng_uniform<float>(rng, {50, 4}, -10.0, 10.0);
  ScalerParams s = fit_scaler(x);
  Tensor z = apply_scaler(s, x);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double back = z.at(i, j) * s.stdev[j] + s.mean[j];
      CHECK(back == doctest::Approx(x.at(i, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("scaler rejects constant columns and bad shapes") {
  Tensor flat({3, 4});
  for (std::size_t i = 0; i < 3; ++i) {
    flat.at(i, 0) = 5.0f;  // zero spread
    flat.at(i, 1) = static_cast<float>(i);
    flat.at(i, 2) = static_cast<float>(i);
    flat.at(i, 3) = static_cast<float>(i);
  }
  CHECK_THROWS_AS(fit_scaler(flat), PipelineError);
  CHECK_THROWS_AS(fit_scaler(Tensor({0, 4})), PipelineError);
  CHECK_THROWS_AS(fit_scaler(Tensor({3, 3})), DimensionError);
}

TEST_CASE("scaler fit on train does not recenter other splits") {
  Tensor train({2, 4});
  Tensor test({2, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    train.at(0, j) = 0.0f;
    train.at(1, j) = 2.0f;  // mean 1, stdev 1
    test.at(0, j) = 11.0f;
    test.at(1, j) = 13.0f;
  }
  ScalerParams s = fit_scaler(train);
  Tensor z = apply_scaler(s, test);
  // Shifted test data stays shifted: transform params must come from train.
  CHECK(z.at(0, 0) == doctest::Approx(10.0));
  CHECK(z.at(1, 0) == doctest::Approx(12.0));
}

TEST_CASE("stratified split hits 70:10:20 within one row per class") {
  Dataset d;
  const std::size_t n = 100;
  d.features = Tensor({n, 4});
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % 2));
    d.timestamps.push_back(static_cast<std::int64_t>(i));
    for (std::size_t j = 0; j < 4; ++j) d.features.at(i, j) = static_cast<float>(i);
  }
  Splits s = stratified_split(d, SplitRatios{}, 43);
  CHECK(s.train.size() == 70);
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 20);
  CHECK(s.train.split == "train");
  CHECK(s.val.split == "val");
  CHECK(s.test.split == "test");

  auto class_counts = [](const Dataset& ds) {
    std::map<int, std::size_t> c;
    for (int l : ds.labels) c[l]++;
    return c;
  };
  auto tc = class_counts(s.train);
  CHECK(tc[0] == 35);
  CHECK(tc[1] == 35);
  auto vc = class_counts(s.val);
  CHECK(vc[0] == 5);
  auto ec = class_counts(s.test);
  CHECK(ec[0] == 10);
}

TEST_CASE("stratified split partitions rows exactly once") {
  Dataset d;
  const std::size_t n = 97;  // awkward size, 3 classes
  d.features = Tensor({n, 4});
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % 3));
    d.timestamps.push_back(static_cast<std::int64_t>(i));
    d.features.at(i, 0) = static_cast<float>(i);  // unique marker
  }
  Splits s = stratified_split(d, SplitRatios{}, 44);
  CHECK(s.train.size() + s.val.size() + s.test.size() == n);
  std::vector<int> seen(n, 0);
  for (const Dataset* ds : {&s.train, &s.val, &s.test}) {
    for (std::size_t i = 0; i < ds->size(); ++i) {
      seen[static_cast<std::size_t>(ds->features.at(i, 0))]++;
    }
  }
  for (int c : seen) CHECK(c == 1);

  // Every class within one row of its exact share, and present in train.
  for (int cls = 0; cls < 3; ++cls) {
    const double total = std::count(d.labels.begin(), d.labels.end(), cls);
    const double train_n = std::count(s.train.labels.begin(), s.train.labels.end(), cls);
    const double val_n = std::count(s.val.labels.begin(), s.val.labels.end(), cls);
    const double test_n = std::count(s.test.labels.begin(), s.test.labels.end(), cls);
    CHECK(std::abs(train_n - 0.7 * total) <= 1.0);
    CHECK(std::abs(val_n - 0.1 * total) <= 1.0);
    CHECK(std::abs(test_n - 0.2 * total) <= 1.0);
    CHECK(train_n >= 1);
  }
}

TEST_CASE("stratified split is deterministic in its seed") {
  Dataset d;
  d.features = Tensor({40, 4});
  for (std::size_t i = 0; i < 40; ++i) {
    d.labels.push_back(static_cast<int>(i % 4));
    d.timestamps.push_back(static_cast<std::int64_t>(i));
    d.features.at(i, 0) = static_cast<float>(i);
  }
  Splits a = stratified_split(d, SplitRatios{}, 45);
  Splits b = stratified_split(d, SplitRatios{}, 45);
  Splits c = stratified_split(d, SplitRatios{}, 46);
  REQUIRE(a.train.size() == b.train.size());
  bool same_seed_equal = true, diff_seed_equal = true;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    same_seed_equal &= a.train.features.at(i, 0) == b.train.features.at(i, 0);
    diff_seed_equal &= a.train.features.at(i, 0) == c.train.features.at(i, 0);
  }
  CHECK(same_seed_equal);
  CHECK_FALSE(diff_seed_equal);
}

TEST_CASE("stratified split needs at least three rows per class") {
  Dataset d;
  d.features = Tensor({4, 4});
  d.labels = {0, 0, 0, 1};  // class 1 has 1 row
  d.timestamps = {0, 1, 2, 3};
  CHECK_THROWS_AS(stratified_split(d, SplitRatios{}, 47), PipelineError);

  SUBCASE("ratios must sum to 100") {
    Dataset ok;
    ok.features = Tensor({6, 4});
    ok.labels = {0, 0, 0, 0, 0, 0};
    ok.timestamps = {0, 1, 2, 3, 4, 5};
    CHECK_THROWS_AS(stratified_split(ok, SplitRatios{80, 10, 20}, 47), ArgumentError);
  }
}

TEST_CASE("stratified split holds at realistic scale") {
  Dataset d;
  const std::size_t n = 30000;
  d.features = Tensor({n, 4});
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % 30));
    d.timestamps.push_back(static_cast<std::int64_t>(i));
  }
  Splits s = stratified_split(d, SplitRatios{}, 48);
  CHECK(s.train.size() == 21000);
  CHECK(s.val.size() == 3000);
  CHECK(s.test.size() == 6000);
}

TEST_CASE("model input adds a trailing channel axis") {
  Tensor x({2, 4});
  float v = 0.0f;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = v++;
  }
  Tensor m = to_model_input(x);
  CHECK(m.shape() == Shape{2, 4, 1});
  CHECK(m.at(1, 2, 0) == 6.0f);
  CHECK(to_model_input(Tensor({0, 4})).shape() == Shape{0, 4, 1});
  CHECK_THROWS_AS(to_model_input(Tensor({2, 3})), DimensionError);
}
