#include <doctest.h>

#include <cmath>

#include "qplab/errors.hpp"
#include "qplab/model.hpp"
#include "qplab/rng.hpp"

using namespace qp;

namespace {

ModelConfig base_model() {
  ModelConfig m;
  m.d = 1;
  m.epsilon = 0.05;
  m.omega = Eigen::VectorXd::Constant(1, 0.5 * (std::sqrt(5.0) - 1.0));
  m.potential.R = 0.05;
  return m;
}

} // namespace

TEST_CASE("cosine certificate sits inside the cosine-type bounds") {
  PotentialSpec v;
  v.R = 0.05;
  const auto c = certify_potential(v, 64);
  CHECK(c.kappa1 >= 2.0 * (1 - 1e-9));
  CHECK(c.kappa2 <= 32.0 * (1 + 1e-9));
  CHECK(c.pairs > 0);
}

TEST_CASE("polynomial and perturbed-cosine families certify within their ranges") {
  PotentialSpec v1;
  v1.kind = PotentialSpec::Kind::Polynomial;
  v1.R = 0.05;
  v1.lambda = {0.2, 0.05};
  const auto c1 = certify_potential(v1, 64);
  CHECK(c1.kappa1 > 0.0);
  CHECK(c1.kappa2 <= 64.0);

  PotentialSpec v2;
  v2.kind = PotentialSpec::Kind::CosinePlusEven;
  v2.R = 0.05;
  v2.eps_f = 0.01;
  v2.f_cos = {0.0, 0.0, 1.0};
  const auto c2 = certify_potential(v2, 64);
  CHECK(c2.kappa1 >= 1.0);
  CHECK(c2.kappa2 <= 48.0);

  v1.lambda = {0.6};
  CHECK_THROWS_AS(v1.validate(), DomainError);
}

TEST_CASE("derivative agrees with a central difference") {
  PotentialSpec v;
  v.kind = PotentialSpec::Kind::Polynomial;
  v.lambda = {0.1, -0.05};
  const cplx z(0.137, 0.02);
  const double h = 1e-6;
  const cplx fd = (v.value(z + h) - v.value(z - h)) / (2 * h);
  CHECK(std::abs(fd - v.derivative(z)) < 1e-7);
}

TEST_CASE("theta0 solves v(theta0) = E in the normalized range") {
  PotentialSpec v;
  v.R = 0.1;
  for (double e : {-0.9, 0.0, 0.3, 0.99}) {
    const cplx t = solve_theta0(v, e);
    CHECK(std::abs(v.value(t) - e) < 1e-12);
    CHECK(t.real() >= 0.0);
    CHECK(t.real() <= 0.5);
  }
  CHECK_THROWS_AS(solve_theta0(v, 5.0), EnergyOutOfRange);
}

TEST_CASE("determinant is even in z for even potentials and any hopping") {
  ModelConfig m = base_model();
  Rng rng(21);
  for (int n = -3; n <= 3; ++n)
    if (n != 0) m.hopping.table[{n}] = cplx(rng.normal(), rng.normal()) * 0.1;
  for (const Site& c : {Site::zero(1), Site({1})}) {
    const SiteSet s = coset_box(c, 4);
    if (!s.symmetric_about(Site::zero(1))) continue;
    const cplx z(0.21, 0.01);
    const LogDet a = log_det(assemble(s, m, z)), b = log_det(assemble(s, m, -z));
    CHECK(relative_gap(a, b) < 1e-10);
  }
}

TEST_CASE("assembled operator has the expected entries") {
  ModelConfig m = base_model();
  m.energy = 0.2;
  const SiteSet s = coset_box(Site::zero(1), 3);
  const auto t = assemble(s, m, 0.1);
  const long i = s.index_of(Site::integer({2})), j = s.index_of(Site::integer({-1}));
  CHECK(std::abs(t.mat(i, i) - (std::cos(6.283185307179586 * (0.1 + 2 * m.omega[0])) - 0.2)) < 1e-14);
  CHECK(std::abs(t.mat(i, j) - m.epsilon * std::pow(4.0, -m.hopping.alpha_decay)) < 1e-15);
}

TEST_CASE("dual coefficients of the cosine are one half at +-1") {
  const ModelConfig m = base_model();
  const DualModel dm = aubry_dual(m, 3);
  CHECK(std::abs(dm.vhat[3 + 1] - 0.5) < 1e-13);
  CHECK(std::abs(dm.vhat[3 - 1] - 0.5) < 1e-13);
  CHECK(std::abs(dm.vhat[3]) < 1e-13);
  ModelConfig p = base_model();
  p.potential.kind = PotentialSpec::Kind::Polynomial;
  p.potential.lambda = {0.1, 0.1, 0.05};
  CHECK_THROWS_AS(aubry_dual(p, 2), BandCutTooSmall);
  CHECK_NOTHROW(aubry_dual(p, 4));
}

TEST_CASE("diophantine check finds the worst resonance") {
  Eigen::VectorXd golden = Eigen::VectorXd::Constant(1, 0.5 * (std::sqrt(5.0) - 1.0));
  CHECK(certify_diophantine(golden, 0.3, 1.5, 200).pass);
  Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
  const auto c = certify_diophantine(half, 0.1, 1.5, 10);
  CHECK(!c.pass);
  CHECK(c.worst == std::vector<int>{-2});
}
