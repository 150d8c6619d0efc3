#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qplab/errors.hpp"
#include "qplab/io.hpp"
#include "qplab/verify.hpp"

using namespace qp;

namespace {

std::string scratch(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / "qplab_test_io";
  std::filesystem::create_directories(d);
  return (d / name).string();
}

RunManifest manifest(const std::string& stamp) {
  RunManifest m;
  m.config_hash = "0123456789abcdef";
  m.seed = 7;
  m.subcommand = "test";
  m.out_dir = scratch("");
  m.timestamp = stamp;
  return m;
}

} // namespace

TEST_CASE("doubles print with 17 significant digits and round-trip") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  for (double x : {1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("csv bodies ignore only the timestamp line") {
  const std::string a = scratch("a.csv"), b = scratch("b.csv");
  for (const auto& [path, stamp] : {std::pair{a, std::string("t1")}, std::pair{b, std::string("t2")}}) {
    CsvWriter w(path, manifest(stamp), {"x", "label", "ok"});
    w.row({0.25, std::string("has,comma \"q\""), true});
    w.row({1LL, std::string("plain"), false});
  }
  CHECK(csv_body(a) == csv_body(b));
  std::ifstream f(a);
  std::string first, second, header, row;
  std::getline(f, first);
  std::getline(f, second);
  std::getline(f, header);
  std::getline(f, row);
  CHECK(first.rfind("# config_hash=0123456789abcdef seed=7", 0) == 0);
  CHECK(second.rfind("# timestamp=t1", 0) == 0);
  CHECK(row == "0.25,\"has,comma \"\"q\"\"\",true\r");
  CHECK_THROWS_AS(CsvWriter(a, manifest("t"), {"x"}).row({1.0, 2.0}), DomainError);
}

TEST_CASE("operator json round-trips and manifest hashes are checked") {
  const SiteSet s = box(Site::zero(1), 1);
  LatticeOperator op(s, s);
  op.mat(0, 2) = cplx(1.5, -2.0);
  op.mat(1, 1) = 3.0;
  const json j = to_json(op);
  CHECK(j["rows"] == 3);
  CHECK(j["entries"][2][0] == 1.5);
  CHECK(j["entries"][2][1] == -2.0);
  CHECK(j["entries"][4][0] == 3.0);
  CHECK(operator_from_json(j, s, s).mat == op.mat);

  RunManifest m = manifest("now");
  m.out_dir = scratch("run");
  write_manifest(m);
  CHECK(load_manifest(m.out_dir, m.config_hash).seed == 7);
  CHECK_THROWS_AS(load_manifest(m.out_dir, "ffffffffffffffff"), ConfigError);
}

TEST_CASE("verify suites pass, zero instances are vacuous, halved K is caught") {
  VerifyOptions opt;
  opt.instances = 60;
  const VerifyReport ok = run_verify(opt);
  CHECK(ok.suites.size() == 7);
  for (const auto& s : ok.suites) {
    INFO(s.name);
    CHECK(s.failures == 0);
    CHECK(s.checks > 0);
  }
  CHECK(ok.pass());

  opt.instances = 0;
  const VerifyReport empty = run_verify(opt);
  CHECK(empty.pass());
  CHECK(empty.rows.empty());

  opt.instances = 60;
  opt.tame_scale = 0.5;
  const VerifyReport bad = run_verify(opt);
  CHECK_FALSE(bad.pass());
  CHECK(bad.suites[0].name == "tame");
  CHECK(bad.suites[0].failures > 0);
  CHECK(bad.suites[0].counterexample["suite"] == "tame");
  for (std::size_t k = 1; k < bad.suites.size(); ++k) CHECK(bad.suites[k].failures == 0);
}
