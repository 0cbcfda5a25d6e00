#include "seatrack/ais.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seatrack/error.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

namespace {

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

std::string strip_cr(const std::string& s) {
  if (!s.empty() && s.back() == '\r') return s.substr(0, s.size() - 1);
  return s;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

bool parse_f64(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

// Trailing zeros add nothing and the reference rows do not carry them.
std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7f", v);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  std::string s(buf);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.erase(s.size() - 2);
  return s;
}

}  // namespace

bool AisRecord::has_features() const {
  return std::isfinite(lat) && std::isfinite(lon) && std::isfinite(speed) &&
         std::isfinite(course);
}

bool AisRecord::complete() const {
  return has_features() && !vessel_id.empty() && timestamp != kMissingTimestamp;
}

bool parse_csv_header(const std::string& line, std::string* reason) {
  std::string h = strip_cr(line);
  if (!h.empty() && static_cast<unsigned char>(h[0]) == 0xEF && h.size() >= 3 &&
      static_cast<unsigned char>(h[1]) == 0xBB && static_cast<unsigned char>(h[2]) == 0xBF) {
    h = h.substr(3);  // tolerate a UTF-8 BOM
  }
  if (h == kCsvHeader) return true;
  if (reason != nullptr) {
    *reason = "header must be exactly '" + std::string(kCsvHeader) + "', got '" + h + "'";
  }
  return false;
}

std::optional<AisRecord> parse_csv_row(const std::string& line, std::string* reason) {
  auto fail = [&](const std::string& why) -> std::optional<AisRecord> {
    if (reason != nullptr) *reason = why;
    return std::nullopt;
  };
  const std::vector<std::string> f = split_fields(strip_cr(line));
  if (f.size() != 7) {
    return fail("expected 7 fields, got " + std::to_string(f.size()));
  }
  AisRecord r;
  if (!parse_i64(f[0], r.object_id)) return fail("ID '" + f[0] + "' is not an integer");
  r.vessel_id = f[1];
  if (!f[2].empty()) {
    const auto t = parse_iso8601(f[2]);
    if (!t) return fail("SEQUENCE_DTTM '" + f[2] + "' is not an ISO-8601 Zulu timestamp");
    r.timestamp = *t;
  }
  struct FieldSpec {
    const char* name;
    double* dst;
  };
  const FieldSpec nums[4] = {
      {"LAT", &r.lat}, {"LON", &r.lon}, {"SPEED", &r.speed}, {"COURSE", &r.course}};
  for (int i = 0; i < 4; ++i) {
    const std::string& s = f[3 + i];
    if (s.empty()) continue;  // missing value
    double v;
    if (!parse_f64(s, v) || !std::isfinite(v)) {
      return fail(std::string(nums[i].name) + " '" + s + "' is not a finite number");
    }
    *nums[i].dst = v;
  }
  if (std::isfinite(r.lat) && (r.lat < -90.0 || r.lat > 90.0)) {
    return fail("LAT " + f[3] + " outside [-90,90]");
  }
  if (std::isfinite(r.lon) && (r.lon < -180.0 || r.lon > 180.0)) {
    return fail("LON " + f[4] + " outside [-180,180]");
  }
  if (std::isfinite(r.speed) && r.speed < 0.0) {
    return fail("SPEED " + f[5] + " is negative");
  }
  if (std::isfinite(r.course)) {
    r.course = std::fmod(r.course, 360.0);
    if (r.course < 0.0) r.course += 360.0;
  }
  return r;
}

ParseResult parse_csv(std::istream& in) {
  ParseResult res;
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("csv: empty input, expected a header row");
  }
  std::string reason;
  if (!parse_csv_header(line, &reason)) throw FormatError("csv: " + reason);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto rec = parse_csv_row(line, &reason);
    if (rec) {
      res.records.push_back(std::move(*rec));
    } else {
      res.rejects.push_back({lineno, reason});
    }
  }
  return res;
}

ParseResult parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in);
}

std::string to_csv_row(const AisRecord& r) {
  std::ostringstream os;
  os << r.object_id << ',' << r.vessel_id << ',';
  if (r.timestamp != kMissingTimestamp) os << format_iso8601(r.timestamp);
  os << ',';
  if (std::isfinite(r.lat)) os << fmt_coord(r.lat);
  os << ',';
  if (std::isfinite(r.lon)) os << fmt_coord(r.lon);
  os << ',';
  if (std::isfinite(r.speed)) os << fmt_short(r.speed);
  os << ',';
  if (std::isfinite(r.course)) os << fmt_short(r.course);
  return os.str();
}

void write_csv(const std::vector<AisRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const AisRecord& r : records) out << to_csv_row(r) << '\n';
}

void write_csv(const std::vector<AisRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(records, out);
  if (!out.good()) throw IoError("failed while writing '" + path.string() + "'");
}

void write_rejects_csv(const std::vector<RejectedRow>& rejects, std::ostream& out) {
  out << "line,reason\n";
  for (const RejectedRow& r : rejects) {
    std::string quoted = r.reason;
    // Reasons may contain commas; CSV-quote them.
    std::string escaped = "\"";
    for (char c : quoted) {
      if (c == '"') escaped += "\"\"";
      else escaped += c;
    }
    escaped += '"';
    out << r.line << ',' << escaped << '\n';
  }
}

}  // namespace seatrack
