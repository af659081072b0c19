#pragma once

#include "grid.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lagshrink {

struct Snapshot {
  TorusMap map;
  ConformalStructure tau;
  double time = 0.0;
};

void write_snapshot(const std::string& path, const TorusMap& u, const ConformalStructure& tau = {}, double time = 0.0);
Snapshot read_snapshot(const std::string& path);

// Flat key = value configuration with a fixed key set and defaults.
class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::string& path);
  void parse(const std::string& text, const std::string& origin = "<config>");
  void set(const std::string& key, const std::string& value);

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;

  // key = value lines in key order
  std::string echo() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Counter-based generator: output k of stream s is a hash of (seed, s, k).
class CounterRng {
 public:
  using result_type = std::uint64_t;
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()();
  double uniform();  // [0, 1)
  double normal();

 private:
  std::uint64_t seed_, stream_, counter_ = 0;
};

// Random trigonometric polynomial with frequencies |m| <= band, unit max amplitude scale.
Scalar random_bandlimited(const GridSpec& grid, int band, CounterRng& rng);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace lagshrink
