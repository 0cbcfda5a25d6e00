#pragma once

// AIS observation records and the CSV wire format:
//   ID,VID,SEQUENCE_DTTM,LAT,LON,SPEED,COURSE
// One row per received report. Missing values are empty fields; syntactically
// broken rows are rejected with a line number rather than patched up.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace seatrack {

inline constexpr std::int64_t kMissingTimestamp = std::numeric_limits<std::int64_t>::min();
inline const char* const kCsvHeader = "ID,VID,SEQUENCE_DTTM,LAT,LON,SPEED,COURSE";

struct AisRecord {
  std::int64_t object_id = 0;
  std::string vessel_id;  // empty means unlabeled
  std::int64_t timestamp = kMissingTimestamp;  // epoch seconds, UTC
  double lat = std::numeric_limits<double>::quiet_NaN();
  double lon = std::numeric_limits<double>::quiet_NaN();
  double speed = std::numeric_limits<double>::quiet_NaN();    // knots * 10
  double course = std::numeric_limits<double>::quiet_NaN();   // degrees, [0,360)

  bool has_features() const;
  bool complete() const;  // features + vessel id + timestamp
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based, counting the header as line 1
  std::string reason;
};

struct ParseResult {
  std::vector<AisRecord> records;
  std::vector<RejectedRow> rejects;
};

// Header must match kCsvHeader exactly (module column order is part of the
// contract); returns false with a reason otherwise.
bool parse_csv_header(const std::string& line, std::string* reason);

// One data row; nullopt plus a reason for anything unparseable or out of
// range (|lat|>90, |lon|>180, speed<0, non-finite). Empty numeric fields are
// missing values, an empty VID is an unlabeled row. Course is normalized
// into [0,360).
std::optional<AisRecord> parse_csv_row(const std::string& line, std::string* reason);

ParseResult parse_csv(std::istream& in);
ParseResult parse_csv(const std::filesystem::path& path);  // IoError if unreadable

std::string to_csv_row(const AisRecord& r);
void write_csv(const std::vector<AisRecord>& records, std::ostream& out);
void write_csv(const std::vector<AisRecord>& records, const std::filesystem::path& path);
void write_rejects_csv(const std::vector<RejectedRow>& rejects, std::ostream& out);

}  // namespace seatrack
