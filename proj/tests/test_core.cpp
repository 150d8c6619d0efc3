#include <doctest.h>

#include <cmath>
#include <map>

#include "qplab/config.hpp"
#include "qplab/errors.hpp"
#include "qplab/lattice.hpp"
#include "qplab/opalgebra.hpp"
#include "qplab/rng.hpp"

using namespace qp;

namespace {

SiteSet line(int a, int b) {
  std::vector<Site> s;
  for (int i = a; i <= b; ++i) s.push_back(Site::integer({i}));
  return SiteSet(std::move(s));
}

LatticeOperator random_op(const SiteSet& s, Rng& rng, double decay = 2.0) {
  LatticeOperator m(s, s);
  for (Eigen::Index i = 0; i < m.n_rows(); ++i)
    for (Eigen::Index j = 0; j < m.n_cols(); ++j)
      m.mat(i, j) = cplx(rng.normal(), rng.normal()) *
                    std::pow(1.0 + std::abs(double(i - j)), -decay);
  return m;
}

// Oracle: sup per diagonal via an ordered map keyed on the offset.
double brute_norm(const LatticeOperator& m, double alpha) {
  std::map<Site, double> sup;
  for (Eigen::Index i = 0; i < m.n_rows(); ++i)
    for (Eigen::Index j = 0; j < m.n_cols(); ++j) {
      auto& v = sup[m.rows[i] - m.cols[j]];
      v = std::max(v, std::abs(m.mat(i, j)));
    }
  double s = 0.0;
  for (const auto& [k, v] : sup) s += v * std::pow(1.0 + sup_norm(k), alpha);
  return s;
}

} // namespace

TEST_CASE("site arithmetic is exact on half-integers") {
  const Site h({1, -3});
  CHECK(!h.is_integer());
  CHECK((h + h).is_integer());
  CHECK(sup_norm(h) == doctest::Approx(1.5));
  CHECK(-(-h) == h);
}

TEST_CASE("box, distance and diameter") {
  const SiteSet b = box(Site::zero(2), 2);
  CHECK(b.size() == 25);
  CHECK(diam(b) == doctest::Approx(4.0));
  const SiteSet far = box(Site::integer({10, 0}), 1);
  CHECK(dist(b, far) == doctest::Approx(7.0));
  CHECK(b.symmetric_about(Site::zero(2)));
  CHECK_THROWS_AS(diam(SiteSet()), DomainError);
}

TEST_CASE("align_enlarge absorbs touching blocks to a fixpoint") {
  const SiteSet base = line(0, 3);
  std::vector<Block> blocks{{line(3, 6), 1}, {line(6, 8), 1}, {line(20, 22), 1}};
  const SiteSet e = align_enlarge(base, blocks);
  CHECK(e == line(0, 8));
  for (const auto& bl : blocks) CHECK((bl.set.subset_of(e) || !bl.set.intersects(e)));
  CHECK_THROWS_AS(align_enlarge(base, blocks, 2.0), GeometryViolation);
}

TEST_CASE("sobolev norm matches the brute-force diagonal sum") {
  Rng rng(7);
  const SiteSet s = box(Site::zero(2), 2);
  const LatticeOperator m = random_op(s, rng);
  for (double a : {0.0, 1.0, 3.5}) CHECK(sobolev_norm(m, a) == doctest::Approx(brute_norm(m, a)).epsilon(1e-13));
  CHECK(log10_sobolev_norm(m, 3.5) == doctest::Approx(std::log10(brute_norm(m, 3.5))).epsilon(1e-12));
}

TEST_CASE("rows constant agrees with direct lattice summation") {
  // d = 1: 1 + 2 sum_{k>=1} (1+k)^-a, summed directly with an integral tail
  for (double a : {2.5, 3.0, 4.0}) {
    double s = 1.0;
    const int K = 2000000;
    for (int k = 1; k <= K; ++k) s += 2.0 * std::pow(1.0 + k, -a);
    s += 2.0 * std::pow(K + 1.5, 1.0 - a) / (a - 1.0);
    CHECK(rows_constant(1, a) == doctest::Approx(s).epsilon(1e-9));
  }
  // d = 2: shells of 8k sites
  double s = 1.0;
  for (int k = 1; k <= 200000; ++k) s += 8.0 * k * std::pow(1.0 + k, -4.0);
  s += 8.0 * (1.0 / (2.0 * std::pow(200001.5, 2.0)) - 1.0 / (3.0 * std::pow(200001.5, 3.0)));
  CHECK(rows_constant(2, 4.0) == doctest::Approx(s).epsilon(1e-8));
  CHECK_THROWS_AS(rows_constant(2, 2.0), DomainError);
}

TEST_CASE("tame inequality holds on random operators") {
  Rng rng(11);
  const SiteSet s = line(-6, 6);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_op(s, rng), b = random_op(s, rng);
    const auto ab = compose(a, b);
    for (double al : {0.0, 1.0, 2.0, 4.0}) {
      const double rhs = tame_constant(2, al) *
                         (sobolev_norm(a, al) * sobolev_norm(b, 0) + sobolev_norm(a, 0) * sobolev_norm(b, al));
      CHECK(sobolev_norm(ab, al) <= rhs * (1 + 1e-12));
    }
  }
}

TEST_CASE("inverse and log determinant match Eigen oracles") {
  Rng rng(3);
  const SiteSet s = line(0, 9);
  auto m = random_op(s, rng);
  m.mat += 3.0 * Eigen::MatrixXcd::Identity(10, 10);
  const Inverse inv = invert(m);
  CHECK((inv.inverse.mat * m.mat - Eigen::MatrixXcd::Identity(10, 10)).norm() < 1e-12);
  const cplx det = m.mat.determinant();
  CHECK(std::abs(inv.log_det.value() - det) < 1e-10 * std::abs(det));
  LatticeOperator z(s, s);
  CHECK_THROWS_AS(invert(z), NearResonance);
}

TEST_CASE("adjugate satisfies adj(M) M = det(M) I") {
  Rng rng(5);
  const SiteSet s = line(0, 5);
  const auto m = random_op(s, rng);
  const auto adj = adjugate(m);
  const cplx det = m.mat.determinant();
  CHECK((adj.mat * m.mat - det * Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-10 * (1 + std::abs(det)));
  CHECK_THROWS_AS(adjugate(random_op(line(0, 20), rng)), ComplexityRefusal);
}

TEST_CASE("schur complement factorizes the determinant and the inverse") {
  Rng rng(9);
  const SiteSet s = line(-4, 4);
  auto m = random_op(s, rng);
  m.mat += 2.0 * Eigen::MatrixXcd::Identity(9, 9);
  const SchurData sd = schur(m, line(-1, 1));
  const LogDet full = log_det(m);
  CHECK(relative_gap(sd.log_det_a + sd.log_det_s, full) < 1e-10);
  CHECK((schur_inverse(sd).mat - m.mat.inverse()).norm() < 1e-10);
}

TEST_CASE("perturbed left inverse keeps the zero norm within a factor two") {
  Rng rng(13);
  const SiteSet s = line(0, 7);
  for (int t = 0; t < 20; ++t) {
    const auto n = random_op(s, rng);
    auto p = random_op(s, rng);
    p.mat *= 0.45 / (sobolev_norm(n, 0) * sobolev_norm(p, 0));
    const auto np = perturb_left_inverse(n, p);
    CHECK(sobolev_norm(np, 0) <= 2.0 * sobolev_norm(n, 0) * (1 + 1e-12));
    // oracle: direct dense solve
    const Eigen::MatrixXcd ref = (Eigen::MatrixXcd::Identity(8, 8) + n.mat * p.mat).inverse() * n.mat;
    CHECK((np.mat - ref).norm() < 1e-10 * ref.norm());
  }
}

TEST_CASE("config parses JSON values, overrides and hashes canonically") {
  Config a = Config::parse("[model]\nepsilon = 1e-3\n# c\n[frequency]\nomega = [0.5,\n 0.25]\nname = golden\n");
  CHECK(a.number("model", "epsilon") == 1e-3);
  CHECK(a.numbers("frequency", "omega").size() == 2);
  CHECK(a.string("frequency", "name", "") == "golden");
  Config b = Config::parse("[frequency]\nname=golden\nomega=[0.5,0.25]\n[model]\nepsilon=0.001\n");
  CHECK(a.hash() == b.hash());
  b.set("model.epsilon=2e-3");
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK_THROWS_AS(Config::parse("x = 1\n"), ConfigError);
}
