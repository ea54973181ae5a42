#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mpx {

/// Flat key=value configuration, one pair per line, '#' comments. Lookups
/// with no default throw std::runtime_error naming the missing key.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> kv_;
};

} // namespace mpx
