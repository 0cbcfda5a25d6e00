#pragma once

// Association results (one scored observation per row) and their GeoJSON
// track form: one LineString per predicted vessel, Points for rows that fell
// under the confidence floor.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace seatrack {

inline const char* const kUnknownVessel = "unknown";

struct AssociationOutput {
  std::int64_t object_id = 0;
  std::string predicted_vid;  // kUnknownVessel when below the confidence floor
  double confidence = 0.0;
  std::int64_t timestamp = 0;  // kMissingTimestamp renders as an empty field
  double lat = 0.0;  // carried through so tracks can be drawn downstream
  double lon = 0.0;
};

inline const char* const kAssociationCsvHeader =
    "object_id,predicted_vid,confidence,timestamp,lat,lon";

std::string to_csv_row(const AssociationOutput& a);
bool parse_association_row(const std::string& line, AssociationOutput* out,
                           std::string* reason);

// GeoJSON FeatureCollection: vessels ordered by first appearance; a vessel
// with a single point degrades to a Point feature (a one-coordinate
// LineString would not be valid GeoJSON).
std::string tracks_to_geojson(const std::vector<AssociationOutput>& rows);

}  // namespace seatrack
