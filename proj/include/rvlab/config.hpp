#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rvlab {

// Flat key=value configuration with dotted namespaces ("vlasov.dt=0.001").
// '#' starts a comment. Later assignments win.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  // Applies a "key=value" override and records it.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::vector<std::string>& overrides() const { return overrides_; }

  // Throws ConfigError naming the first key not present in `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> overrides_;
};

}  // namespace rvlab
