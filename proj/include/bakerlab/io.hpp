#pragma once

// Output plumbing shared by the CLI and the acceptance driver: metadata block,
// determinism hash, flat CSV rendering of a report.

#include <cstdint>
#include <string>

#include <json.hpp>

namespace bakerlab::io {

using Json = nlohmann::ordered_json;

std::string version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t h);

struct RunClock {
  RunClock();
  std::string started_utc;
  double elapsed() const;

 private:
  double t0_;
};

/// Wraps a report as {"meta": {...}, "report": body}. The meta block holds the
/// config echo, version, seed, wall clock and a hash of everything except the
/// wall clock.
Json with_metadata(const Json& body, const Json& config, std::uint64_t seed, const RunClock& clock);
/// Hash of the document with meta.wall_clock and meta.determinism_hash removed.
std::string determinism_hash(const Json& doc);

/// "key,value" rows, nested keys joined with '.', arrays indexed.
std::string flatten_csv(const Json& doc);

/// Writes text to path, or to stdout for "-" or an empty path.
void write_text(const std::string& path, const std::string& text);

}  // namespace bakerlab::io
