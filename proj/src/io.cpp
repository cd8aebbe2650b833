#include "bakerlab/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bakerlab/types.hpp"

#ifndef BAKERLAB_VERSION
#define BAKERLAB_VERSION "0.0.0"
#endif

namespace bakerlab::io {

std::string version() { return BAKERLAB_VERSION; }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
double steady_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}
}  // namespace

RunClock::RunClock() : t0_(steady_now()) {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  started_utc = buf;
}

double RunClock::elapsed() const { return steady_now() - t0_; }

std::string determinism_hash(const Json& doc) {
  Json copy = doc;
  if (copy.contains("meta")) {
    copy["meta"].erase("wall_clock");
    copy["meta"].erase("determinism_hash");
  }
  return hex64(fnv1a(copy.dump()));
}

Json with_metadata(const Json& body, const Json& config, std::uint64_t seed, const RunClock& clock) {
  Json doc;
  Json meta;
  meta["version"] = version();
  meta["seed"] = seed;
  meta["config"] = config;
  meta["wall_clock"] = {{"started_utc", clock.started_utc}, {"elapsed_s", clock.elapsed()}};
  doc["meta"] = meta;
  doc["report"] = body;
  doc["meta"]["determinism_hash"] = determinism_hash(doc);
  return doc;
}

namespace {
void flatten(const Json& j, const std::string& key, std::ostringstream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), key.empty() ? it.key() : key + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], key + "." + std::to_string(i), out);
  } else if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
      s = q + "\"";
    }
    out << key << ',' << s << '\n';
  } else {
    out << key << ',' << j.dump() << '\n';
  }
}
}  // namespace

std::string flatten_csv(const Json& doc) {
  std::ostringstream out;
  out << "key,value\n";
  flatten(doc, "", out);
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file '" + path + "'");
  f << text;
}

}  // namespace bakerlab::io
