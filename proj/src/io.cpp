#include "qplab/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "qplab/errors.hpp"

namespace qp {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // no signed zero in tables
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["config_path"] = config_path;
  j["subcommand"] = subcommand;
  j["overrides"] = overrides;
  j["out_dir"] = out_dir;
  j["timestamp"] = timestamp;
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_path = j.at("config_path").get<std::string>();
  m.subcommand = j.at("subcommand").get<std::string>();
  m.overrides = j.at("overrides").get<std::vector<std::string>>();
  m.out_dir = j.at("out_dir").get<std::string>();
  m.timestamp = j.at("timestamp").get<std::string>();
  return m;
}

void write_manifest(const RunManifest& m) {
  std::filesystem::create_directories(m.out_dir);
  std::ofstream f(std::filesystem::path(m.out_dir) / "manifest.json");
  if (!f) throw ConfigError("cannot write manifest in " + m.out_dir);
  f << m.to_json().dump(2) << '\n';
}

RunManifest load_manifest(const std::string& dir, const std::string& expected_hash) {
  std::ifstream f(std::filesystem::path(dir) / "manifest.json");
  if (!f) throw ConfigError("no manifest in " + dir);
  const RunManifest m = RunManifest::from_json(json::parse(f));
  if (m.config_hash != expected_hash)
    throw ConfigError("manifest hash " + m.config_hash + " does not match config hash " + expected_hash);
  return m;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

} // namespace

CsvWriter::CsvWriter(const std::string& path, const RunManifest& m, const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary), width_(columns.size()) {
  if (!out_) throw ConfigError("cannot write " + path);
  out_ << "# config_hash=" << m.config_hash << " seed=" << m.seed << "\r\n";
  out_ << "# timestamp=" << m.timestamp << "\r\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << quote(columns[i]);
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw DomainError("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) out_ << format_double(v);
          else if constexpr (std::is_same_v<T, bool>) out_ << (v ? "true" : "false");
          else if constexpr (std::is_same_v<T, std::string>) out_ << quote(v);
          else out_ << v;
        },
        cells[i]);
  }
  out_ << "\r\n";
  out_.flush();
}

std::string csv_body(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path);
  std::string line, body;
  while (std::getline(f, line))
    if (line.rfind("# timestamp=", 0) != 0) body += line + '\n';
  return body;
}

void write_json(const std::string& path, const RunManifest& m, const json& payload) {
  json j;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  for (auto it = payload.begin(); it != payload.end(); ++it) j[it.key()] = it.value();
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(2) << '\n';
}

json to_json(const Site& s) { return s.twice; }

json to_json(const SiteSet& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back(to_json(x));
  return a;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const LatticeOperator& op) {
  json j;
  j["rows"] = op.n_rows();
  j["cols"] = op.n_cols();
  json e = json::array();
  for (Eigen::Index i = 0; i < op.n_rows(); ++i)
    for (Eigen::Index k = 0; k < op.n_cols(); ++k) e.push_back(to_json(op.mat(i, k)));
  j["entries"] = std::move(e);
  j["row_sites"] = to_json(op.rows);
  j["col_sites"] = to_json(op.cols);
  return j;
}

LatticeOperator operator_from_json(const json& j, const SiteSet& rows, const SiteSet& cols) {
  const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  if (r != static_cast<Eigen::Index>(rows.size()) || c != static_cast<Eigen::Index>(cols.size()))
    throw DomainError("operator shape does not match its index sets");
  LatticeOperator op(rows, cols);
  const json& e = j.at("entries");
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) {
      const json& z = e.at(static_cast<std::size_t>(i * c + k));
      op.mat(i, k) = cplx(z.at(0).get<double>(), z.at(1).get<double>());
    }
  return op;
}

json to_json(const GenerationState& g) {
  json j;
  j["s"] = g.s;
  j["case"] = to_string(g.case_tag);
  j["l_s"] = to_json(g.l);
  j["theta_s"] = to_json(g.theta_s);
  j["N"] = g.N;
  j["log10_delta"] = g.log10_delta;
  j["P_s"] = to_json(g.P);
  j["Q_s"] = to_json(g.Q);
  json blocks = json::array();
  for (const auto& [k, b] : g.blocks) {
    json x;
    x["k"] = to_json(k);
    x["omega_size"] = b.omega.size();
    x["omega_tilde_size"] = b.omega_tilde.size();
    x["A"] = to_json(b.a);
    x["truncated"] = b.truncated;
    blocks.push_back(std::move(x));
  }
  j["blocks"] = std::move(blocks);
  json cert = json::object();
  if (g.root) {
    const RootCertificate& r = *g.root;
    cert["theta"] = to_json(r.theta);
    cert["center"] = to_json(r.center);
    cert["contour_radius"] = r.contour_radius;
    cert["winding"] = r.winding;
    cert["residual"] = r.residual;
    cert["paired"] = r.paired;
    cert["quadrature_points"] = r.quadrature_points;
    if (!r.alternative.empty()) cert["alternative"] = r.alternative;
  }
  j["certificates"] = std::move(cert);
  return j;
}

json to_json(const MsaRun& run) {
  json j;
  j["theta"] = run.theta;
  j["stopped"] = run.stopped;
  json g = json::array();
  for (const auto& x : run.generations) g.push_back(to_json(x));
  j["generations"] = std::move(g);
  return j;
}

} // namespace qp
