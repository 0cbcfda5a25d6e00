#include "seatrack/util.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace seatrack {

namespace {

LogLevel parse_level(const char* v) {
  if (v == nullptr) return LogLevel::warn;
  std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::quiet;
  if (s == "warn" || s == "1") return LogLevel::warn;
  if (s == "info" || s == "2") return LogLevel::info;
  if (s == "debug" || s == "3") return LogLevel::debug;
  return LogLevel::warn;
}

void emit(const char* tag, const std::string& msg) {
  std::cerr << tag << msg << '\n';
}

// Days since 1970-01-01 for a proleptic Gregorian date. Standard
// era/day-of-era arithmetic, exact over the whole int range.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool all_digits(const std::string& s, std::size_t lo, std::size_t n) {
  for (std::size_t i = lo; i < lo + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

int num(const std::string& s, std::size_t lo, std::size_t n) {
  int v = 0;
  for (std::size_t i = lo; i < lo + n; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static const unsigned k[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2) {
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return k[m - 1];
}

}  // namespace

LogLevel log_level() {
  static const LogLevel lvl = parse_level(std::getenv("SEATRACK_LOG"));
  return lvl;
}

void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::warn) emit("warning: ", msg);
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) emit("info: ", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) emit("debug: ", msg);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 over the pair; cheap, well mixed, and stable across platforms.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::optional<std::int64_t> parse_iso8601(const std::string& s) {
  // Exactly "YYYY-MM-DDThh:mm:ssZ".
  if (s.size() != 20) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
    return std::nullopt;
  }
  if (!all_digits(s, 0, 4) || !all_digits(s, 5, 2) || !all_digits(s, 8, 2) ||
      !all_digits(s, 11, 2) || !all_digits(s, 14, 2) || !all_digits(s, 17, 2)) {
    return std::nullopt;
  }
  const int y = num(s, 0, 4), mo = num(s, 5, 2), d = num(s, 8, 2);
  const int h = num(s, 11, 2), mi = num(s, 14, 2), se = num(s, 17, 2);
  if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || se > 59) return std::nullopt;
  if (static_cast<unsigned>(d) > days_in_month(y, static_cast<unsigned>(mo))) return std::nullopt;
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + se;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  std::int64_t y;
  unsigned mo, d;
  civil_from_days(days, y, mo, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), mo, d, static_cast<long long>(sod / 3600),
                static_cast<long long>((sod / 60) % 60), static_cast<long long>(sod % 60));
  return buf;
}

}  // namespace seatrack
