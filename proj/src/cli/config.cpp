#include "betazero/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace betazero::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string stripComment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> splitList(const std::string& v) {
  std::string body = trim(v);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']')
    body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"')
      item = item.substr(1, item.size() - 2);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.text_ = text;
  cfg.origin_ = origin;
  std::stringstream in(text);
  std::string line, section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(stripComment(line));
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineNo);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const auto full = section.empty() ? key : section + "." + key;
    if (!cfg.values_.emplace(full, value).second)
      throw ConfigError(where + ": duplicate key '" + full + "'");
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string Config::getString(const std::string& key) const { return raw(key); }

double Config::getDouble(const std::string& key) const {
  const auto& v = raw(key);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' is not a number: " + v);
}

long Config::getInt(const std::string& key) const {
  const auto& v = raw(key);
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' is not an integer: " + v);
}

bool Config::getBool(const std::string& key) const {
  const auto& v = raw(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config key '" + key + "' must be true or false: " + v);
}

std::vector<int> Config::getIntList(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : splitList(raw(key))) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has a non-integer entry: " + item);
    }
  }
  return out;
}

std::vector<std::string> Config::getStringList(const std::string& key) const {
  return splitList(raw(key));
}

void Config::rejectUnused() const {
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace betazero::cli
