#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace betazero::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `[section]` / `key = value` file. Keys are addressed as
/// "section.key". Every key must be read exactly once by the consumer;
/// anything left over is reported as unknown.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "config");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string getString(const std::string& key) const;
  double getDouble(const std::string& key) const;
  long getInt(const std::string& key) const;
  bool getBool(const std::string& key) const;
  std::vector<int> getIntList(const std::string& key) const;
  std::vector<std::string> getStringList(const std::string& key) const;

  /// Throws ConfigError naming the first key that was never read.
  void rejectUnused() const;

  const std::string& text() const noexcept { return text_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string text_;
  std::string origin_;
};

}  // namespace betazero::cli
