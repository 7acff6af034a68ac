// Output plumbing: CSV, JSON, checkpoints, config hashing.
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace shocklab {

using json = nlohmann::json;

inline constexpr const char* kArtifactName = "shocklab";
inline constexpr const char* kArtifactVersion = "1.0.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Minimal CSV table: header plus rows of doubles, round-trip formatting.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& r) {
    if (r.size() != header_.size()) throw IoError("csv: row width mismatch");
    rows_.push_back(r);
  }
  std::string str() const {
    std::string out;
    for (std::size_t k = 0; k < header_.size(); ++k) {
      if (k) out += ',';
      out += header_[k];
    }
    out += '\n';
    for (const auto& r : rows_) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (k) out += ',';
        out += fmt17(r[k]);
      }
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  f << s;
  if (!f) throw IoError("write failed: " + p.string());
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Hash of the canonical (sorted-key, compact) serialization.
inline std::string config_hash(const json& cfg) { return hex64(fnv1a64(cfg.dump())); }

inline json provenance(const json& cfg, const std::string& command) {
  return {{"artifact", kArtifactName},
          {"version", kArtifactVersion},
          {"command", command},
          {"config_hash", config_hash(cfg)}};
}

// Checkpoint: <stem>.json header and <stem>.bin little-endian doubles.
inline void write_checkpoint(const std::filesystem::path& stem, const json& header,
                             const std::vector<double>& u) {
  json h = header;
  h["count"] = u.size();
  h["encoding"] = "float64-le";
  h["data_file"] = stem.filename().string() + ".bin";
  write_json(stem.string() + ".json", h);
  std::string bytes(u.size() * 8, '\0');
  for (std::size_t k = 0; k < u.size(); ++k) {
    std::uint64_t b = std::bit_cast<std::uint64_t>(u[k]);
    for (int q = 0; q < 8; ++q) bytes[8 * k + q] = static_cast<char>((b >> (8 * q)) & 0xff);
  }
  write_text(stem.string() + ".bin", bytes);
}

inline std::vector<double> read_checkpoint(const std::filesystem::path& stem, json* header = nullptr) {
  json h = json::parse(read_text(stem.string() + ".json"));
  std::string bytes = read_text(stem.string() + ".bin");
  std::size_t n = h.at("count").get<std::size_t>();
  if (bytes.size() != 8 * n) throw IoError("checkpoint: size mismatch");
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t b = 0;
    for (int q = 0; q < 8; ++q)
      b |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * k + q])) << (8 * q);
    u[k] = std::bit_cast<double>(b);
  }
  if (header) *header = h;
  return u;
}

}  // namespace shocklab
