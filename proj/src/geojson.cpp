#include "seatrack/geojson.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include <json.hpp>

#include "seatrack/ais.hpp"
#include "seatrack/error.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

namespace {

using nlohmann::json;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string to_csv_row(const AssociationOutput& a) {
  const std::string when =
      a.timestamp == kMissingTimestamp ? std::string() : format_iso8601(a.timestamp);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld,%s,%.6f,%s,%.7f,%.7f",
                static_cast<long long>(a.object_id), a.predicted_vid.c_str(), a.confidence,
                when.c_str(), a.lat, a.lon);
  return buf;
}

bool parse_association_row(const std::string& line, AssociationOutput* out,
                           std::string* reason) {
  auto fail = [&](const std::string& why) {
    if (reason != nullptr) *reason = why;
    return false;
  };
  std::string l = line;
  if (!l.empty() && l.back() == '\r') l.pop_back();
  const std::vector<std::string> f = split_fields(l);
  if (f.size() != 6) return fail("expected 6 fields, got " + std::to_string(f.size()));
  char* end = nullptr;
  out->object_id = std::strtoll(f[0].c_str(), &end, 10);
  if (f[0].empty() || end != f[0].c_str() + f[0].size()) {
    return fail("object_id '" + f[0] + "' is not an integer");
  }
  out->predicted_vid = f[1];
  out->confidence = std::strtod(f[2].c_str(), &end);
  if (f[2].empty() || end != f[2].c_str() + f[2].size()) {
    return fail("confidence '" + f[2] + "' is not a number");
  }
  if (f[3].empty()) {
    out->timestamp = kMissingTimestamp;
  } else {
    const auto t = parse_iso8601(f[3]);
    if (!t) return fail("timestamp '" + f[3] + "' is not ISO-8601 Zulu");
    out->timestamp = *t;
  }
  out->lat = std::strtod(f[4].c_str(), &end);
  if (f[4].empty() || end != f[4].c_str() + f[4].size()) {
    return fail("lat '" + f[4] + "' is not a number");
  }
  out->lon = std::strtod(f[5].c_str(), &end);
  if (f[5].empty() || end != f[5].c_str() + f[5].size()) {
    return fail("lon '" + f[5] + "' is not a number");
  }
  return true;
}

std::string tracks_to_geojson(const std::vector<AssociationOutput>& rows) {
  // Group track rows per vessel in first-appearance order; below-threshold
  // rows stay individual points.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AssociationOutput*>> tracks;
  std::vector<const AssociationOutput*> unknowns;
  for (const AssociationOutput& r : rows) {
    if (r.predicted_vid == kUnknownVessel) {
      unknowns.push_back(&r);
      continue;
    }
    if (tracks.find(r.predicted_vid) == tracks.end()) order.push_back(r.predicted_vid);
    tracks[r.predicted_vid].push_back(&r);
  }
  json features = json::array();
  for (const std::string& vid : order) {
    const auto& pts = tracks[vid];
    json f;
    f["type"] = "Feature";
    json props;
    props["vessel_id"] = vid;
    props["points"] = pts.size();
    f["properties"] = props;
    if (pts.size() == 1) {
      f["geometry"]["type"] = "Point";
      f["geometry"]["coordinates"] = json::array({pts[0]->lon, pts[0]->lat});
    } else {
      f["geometry"]["type"] = "LineString";
      json coords = json::array();
      for (const AssociationOutput* p : pts) {
        coords.push_back(json::array({p->lon, p->lat}));
      }
      f["geometry"]["coordinates"] = coords;
    }
    features.push_back(f);
  }
  for (const AssociationOutput* p : unknowns) {
    json f;
    f["type"] = "Feature";
    json props;
    props["vessel_id"] = kUnknownVessel;
    props["confidence"] = p->confidence;
    f["properties"] = props;
    f["geometry"]["type"] = "Point";
    f["geometry"]["coordinates"] = json::array({p->lon, p->lat});
    features.push_back(f);
  }
  json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = features;
  return fc.dump();
}

}  // namespace seatrack
