#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qp {

// Sectioned text configuration:
//
//   [model]
//   epsilon = 1e-3
//   [frequency]
//   omega = [0.6180339887498949]
//
// Values are JSON literals (numbers, arrays, quoted strings, true/false);
// anything that does not parse as JSON is kept as a bare string. An
// unbalanced '[' continues the value onto following lines. Lines starting
// with '#' or ';' are comments.
class Config {
public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  // "section.key=value" override, same value syntax as the file.
  void set(const std::string& assignment);
  void set(const std::string& section, const std::string& key, nlohmann::json value);

  bool has(const std::string& section, const std::string& key) const;
  const nlohmann::json& get(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  long integer(const std::string& section, const std::string& key, long fallback) const;
  std::string string(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;

  // Sorted, whitespace-normalized rendering; the hash is taken over this.
  std::string canonical() const;
  std::string hash() const;
  const nlohmann::json& data() const { return data_; }

private:
  nlohmann::json data_ = nlohmann::json::object();
};

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

} // namespace qp
