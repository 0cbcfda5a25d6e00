#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace seatrack {

// Log verbosity, controlled by the SEATRACK_LOG environment variable:
// "quiet" (or "0") silences everything, unset/"warn" prints warnings,
// "info" and "debug" add progressively more.
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Deterministic sub-stream derivation so independent consumers (weight init,
// shuffling, dropout, per-vessel noise) never share a generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

// ISO-8601 Zulu timestamps with whole seconds, e.g. "2020-02-29T22:00:01Z".
// parse returns nullopt for anything that deviates from that exact shape.
std::optional<std::int64_t> parse_iso8601(const std::string& s);
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace seatrack
