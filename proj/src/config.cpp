#include "qplab/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qplab/errors.hpp"

namespace qp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

nlohmann::json parse_value(const std::string& raw) {
  const std::string v = trim(raw);
  try {
    return nlohmann::json::parse(v);
  } catch (const nlohmann::json::exception&) {
    return v;
  }
}

int bracket_balance(const std::string& s) {
  int b = 0;
  bool in_str = false;
  for (char c : s) {
    if (c == '"') in_str = !in_str;
    if (in_str) continue;
    if (c == '[') ++b;
    if (c == ']') --b;
  }
  return b;
}

} // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("empty section name on line " + std::to_string(lineno));
      if (!cfg.data_.contains(section)) cfg.data_[section] = nlohmann::json::object();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value on line " + std::to_string(lineno));
    if (section.empty())
      throw ConfigError("key outside of any section on line " + std::to_string(lineno));
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    while (bracket_balance(value) > 0 && std::getline(in, line)) {
      ++lineno;
      value += " " + trim(line);
    }
    cfg.data_[section][key] = parse_value(value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like section.key=value");
  const std::string lhs = trim(assignment.substr(0, eq));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
    throw ConfigError("override key must be section.key: " + lhs);
  set(lhs.substr(0, dot), lhs.substr(dot + 1), parse_value(assignment.substr(eq + 1)));
}

void Config::set(const std::string& section, const std::string& key, nlohmann::json value) {
  data_[section][key] = std::move(value);
}

bool Config::has(const std::string& section, const std::string& key) const {
  return data_.contains(section) && data_[section].contains(key);
}

const nlohmann::json& Config::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError("missing key " + section + "." + key);
  return data_[section][key];
}

double Config::number(const std::string& section, const std::string& key) const {
  const auto& v = get(section, key);
  if (!v.is_number()) throw ConfigError(section + "." + key + " must be a number");
  return v.get<double>();
}

double Config::number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

long Config::integer(const std::string& section, const std::string& key, long fallback) const {
  if (!has(section, key)) return fallback;
  const auto& v = get(section, key);
  if (!v.is_number()) throw ConfigError(section + "." + key + " must be a number");
  return v.get<long>();
}

std::string Config::string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  const auto& v = get(section, key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key) const {
  const auto& v = get(section, key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(section + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(section + "." + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string Config::canonical() const {
  std::ostringstream o;
  for (const auto& [section, kv] : data_.items()) {
    o << '[' << section << "]\n";
    for (const auto& [k, v] : kv.items()) o << k << " = " << v.dump() << '\n';
  }
  return o.str();
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

} // namespace qp
