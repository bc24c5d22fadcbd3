#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kinlab::expt {

/// Flat key = value configuration (UTF-8, '#' comments). Values are kept as
/// strings; typed getters parse on demand. serialize() emits sorted keys so
/// parse(serialize(c)) == c and the config hash is stable.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  std::string serialize() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical serialization

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_long(const std::string& key, long value);
  void set_list(const std::string& key, const std::vector<double>& values);

  bool operator==(const Config& o) const { return kv_ == o.kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace kinlab::expt
