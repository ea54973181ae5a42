#include "mpx/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpx {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_string(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    }
    c.kv_[key] = val;
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

long Config::get_int(const std::string& key) const {
  try {
    return std::stol(get_string(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  }
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(get_string(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config: key '" + key + "' is not an unsigned integer");
  }
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(get_string(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config: key '" + key + "' is not a number");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::string v = get_string(key);
  std::vector<int> out;
  std::istringstream is(v);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' is not a comma-separated integer list");
    }
  }
  if (out.empty()) throw std::runtime_error("config: key '" + key + "' is empty");
  return out;
}

} // namespace mpx
