#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qplab/lattice.hpp"
#include "qplab/msa.hpp"
#include "qplab/opalgebra.hpp"

namespace qp {

using json = nlohmann::ordered_json;

// Shortest round-trip text for a double: 17 significant digits, '.' decimal.
std::string format_double(double x);

struct RunManifest {
  std::string config_path;
  std::string subcommand;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string timestamp;    // UTC, ISO 8601
  std::string config_hash;  // fnv1a of the canonical config after overrides

  json to_json() const;
  static RunManifest from_json(const json& j);
};

std::string utc_timestamp();

// Writes <dir>/manifest.json; creates dir.
void write_manifest(const RunManifest& m);
// Reads the manifest back and checks its hash against `expected_hash`.
RunManifest load_manifest(const std::string& dir, const std::string& expected_hash);

// RFC-4180 CSV. Line 1: "# config_hash=H seed=S". Line 2: "# timestamp=T",
// the only line allowed to differ between reruns. Then the column header.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string, bool>;

  CsvWriter(const std::string& path, const RunManifest& m, const std::vector<std::string>& columns);
  void row(const std::vector<Cell>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
};

// Lines of a CSV written by CsvWriter minus the timestamp comment.
std::string csv_body(const std::string& path);

// JSON file whose first member is config_hash, then seed.
void write_json(const std::string& path, const RunManifest& m, const json& payload);

json to_json(const Site& s);
json to_json(const SiteSet& s);
json to_json(cplx z);
json to_json(const LatticeOperator& op);  // {rows, cols, entries: [[re, im], ...]} row-major
LatticeOperator operator_from_json(const json& j, const SiteSet& rows, const SiteSet& cols);
json to_json(const GenerationState& g);
json to_json(const MsaRun& run);

} // namespace qp
