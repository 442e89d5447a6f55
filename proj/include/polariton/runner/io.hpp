// runner/io.hpp - CSV tables, atomic file writes, checksums, run manifest
#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "polariton/errors.hpp"

namespace polariton::runner {

namespace fs = std::filesystem;

inline constexpr const char* kCodeVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.txt";

// Fixed 17-significant-digit scientific notation; identical bits give identical text.
inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != header.size()) throw ConfigurationError("CsvTable: row width differs from header");
    rows.push_back(std::move(row));
  }
  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_number(r[i]);
      os << '\n';
    }
    return os.str();
  }
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Writes to a sibling temporary and renames it into place.
inline void atomic_write(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, p);
}

struct RunManifest {
  std::string config;  // canonical resolved configuration
  std::string code_version = kCodeVersion;
  std::uint64_t seed = 0;
  double wall_clock_s = 0;
  std::map<std::string, std::string> checksums;  // file name -> sha256

  std::string str() const {
    std::ostringstream os;
    os << "[manifest]\n";
    os << "code_version = " << code_version << "\n";
    os << "seed = " << seed << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3f", wall_clock_s);
    os << "wall_clock_s = " << buf << "\n";
    os << "\n[checksums]\n";
    for (const auto& [name, sum] : checksums) os << name << " = sha256:" << sum << "\n";
    os << "\n[config]\n";
    std::istringstream cfg(config);
    std::string line, section;
    while (std::getline(cfg, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2) + ".";
        continue;
      }
      os << section << line << "\n";
    }
    return os.str();
  }
};

// Data files produced by one run, written by the orchestrator only.
class OutputWriter {
 public:
  explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }

  // A stale manifest is removed before any data file changes.
  void begin() {
    fs::create_directories(dir_);
    std::error_code ec;
    fs::remove(dir_ / kManifestName, ec);
  }

  void write(const std::string& name, const std::string& content) {
    atomic_write(dir_ / name, content);
    written_.push_back(name);
    checksums_[name] = sha256_hex(content);
  }

  void commit(RunManifest m) {
    m.checksums = checksums_;
    atomic_write(dir_ / kManifestName, m.str());
  }

  // Removes every data file of this run.
  void discard() {
    std::error_code ec;
    for (const auto& name : written_) {
      fs::remove(dir_ / name, ec);
      fs::remove(dir_ / (name + ".partial"), ec);
    }
    written_.clear();
    checksums_.clear();
  }

  const std::map<std::string, std::string>& checksums() const { return checksums_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
  std::map<std::string, std::string> checksums_;
};

}  // namespace polariton::runner
