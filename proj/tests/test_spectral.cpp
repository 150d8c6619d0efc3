#include <doctest.h>

#include <cmath>

#include "qplab/errors.hpp"
#include "qplab/rng.hpp"
#include "qplab/spectral.hpp"

using namespace qp;

namespace {

const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

ModelConfig model(double eps) {
  ModelConfig m;
  m.d = 1;
  m.epsilon = eps;
  m.omega = Eigen::VectorXd::Constant(1, kGolden);
  m.hopping.alpha_decay = 6.0;
  m.hopping.table[{1}] = 1.0;
  m.hopping.table[{-1}] = 1.0;
  return m;
}

LatticeOperator two_site(double a, double b, double g) {
  const SiteSet s({Site::integer({0}), Site::integer({1})});
  Eigen::MatrixXcd h(2, 2);
  h << a, g, g, b;
  return LatticeOperator(s, s, h);
}

} // namespace

TEST_CASE("two-site eigenvalues follow the quadratic formula") {
  const double a = 0.3, b = -0.7, g = 0.25;
  const EigenSystem es = eigensolve(two_site(a, b, g));
  const double disc = std::sqrt((a - b) * (a - b) + 4 * g * g);
  CHECK(es.values[0] == doctest::Approx((a + b - disc) / 2).epsilon(1e-14));
  CHECK(es.values[1] == doctest::Approx((a + b + disc) / 2).epsilon(1e-14));
}

TEST_CASE("random Hermitian spectrum reproduces the trace power sums") {
  Rng rng(17);
  const int n = 20;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  std::vector<Site> v;
  for (int i = 0; i < n; ++i) v.push_back(Site::integer({i}));
  const SiteSet s(v);
  const EigenSystem es = eigensolve(LatticeOperator(s, s, h));
  CHECK(es.residual < 1e-9);
  CHECK(es.gram < 1e-9);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= 6; ++k) {
    p = p * h;
    const double tr = p.trace().real();
    const double sum = es.values.array().pow(k).sum();
    CHECK(std::abs(tr - sum) < 1e-8 * std::max(1.0, std::abs(tr)));
  }
  Eigen::MatrixXcd bad = h;
  bad(0, 1) += 0.1;
  CHECK_THROWS_AS(eigensolve(LatticeOperator(s, s, bad)), WrongPath);
}

TEST_CASE("eps = 0 gives sorted diagonal, delta eigenvectors and a constant moment") {
  const ModelConfig m = model(0.0);
  const SiteSet s = box(Site::zero(1), 10);
  const EigenSystem es = eigensolve(hamiltonian(s, m, 0.3));
  for (Eigen::Index q = 1; q < es.values.size(); ++q) CHECK(es.values[q - 1] <= es.values[q]);
  const MomentResult mr = dynamics_moment(es, Site::zero(1), 2.0, 50.0, 64);
  for (const auto& p : mr.series) CHECK(p.moment == 1.0);
  const DecayFit f = fit_decay(es.vectors.col(3), s, 2.0, 1e-14);
  CHECK(std::isinf(f.exponent));
}

TEST_CASE("two-site dynamics match the closed-form Rabi amplitudes") {
  const double a = 0.1, b = 0.6, g = 0.3;
  const EigenSystem es = eigensolve(two_site(a, b, g));
  const MomentResult mr = dynamics_moment(es, Site::integer({0}), 1.0, 20.0, 128, 1e-3);
  const double W = std::sqrt((a - b) * (a - b) + 4 * g * g);
  for (const auto& p : mr.series) {
    const double s1 = 2 * g / W * std::abs(std::sin(W * p.t / 2));
    const double expected = std::sqrt(1 - s1 * s1) + 2.0 * s1;
    CHECK(std::abs(p.moment - expected) < 1e-10);
    CHECK(p.unitarity_error < 1e-10);
  }
}

TEST_CASE("poisson identity holds for exact eigenpairs and degrades linearly") {
  const ModelConfig m = model(1e-2);
  const double theta = 0.21;
  const SiteSet outer = box(Site::zero(1), 60), inner = box(Site::zero(1), 30);
  const EigenSystem es = eigensolve(hamiltonian(outer, m, theta));
  // the identity is used with the localization centre outside the inner box;
  // centres inside make E nearly an eigenvalue of the inner restriction
  int used = 0, first_shell = -1;
  for (Eigen::Index q = 0; q < es.vectors.cols(); ++q) {
    Eigen::Index peak;
    es.vectors.col(q).cwiseAbs().maxCoeff(&peak);
    if (sup_norm(outer[peak]) < 45) continue;
    if (first_shell < 0) first_shell = static_cast<int>(q);
    const Eigen::VectorXcd psi = es.vectors.col(q);
    CHECK(poisson_residual(psi, es.values[q], inner, outer, m, theta) < 1e-8);
    ++used;
  }
  CHECK(used > 10);
  Rng rng(3);
  Eigen::VectorXcd noise(es.vectors.rows());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  const Eigen::VectorXcd psi = es.vectors.col(first_shell);
  const double E = es.values[first_shell];
  const double r1 = poisson_residual(psi + 1e-3 * noise, E, inner, outer, m, theta);
  const double r2 = poisson_residual(psi + 2e-3 * noise, E, inner, outer, m, theta);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("ids at eps = 0 equals direct counting and the modulus is monotone") {
  const ModelConfig m = model(0.0);
  const int N = 40;
  const double theta = 0.17;
  const EigenSystem es = eigensolve(hamiltonian(box(Site::zero(1), N), m, theta));
  std::vector<double> E;
  for (int i = 0; i <= 40; ++i) E.push_back(-1.1 + 2.2 * i / 40);
  const IdsCurve c = ids_curve(es.values, N, E);
  for (std::size_t i = 0; i < E.size(); ++i) {
    int count = 0;
    for (int n = -N; n <= N; ++n) count += std::cos(6.283185307179586 * (theta + n * kGolden)) <= E[i];
    CHECK(c.values[i] == static_cast<double>(count) / (2 * N + 1));
  }
  CHECK(c.values.front() == 0.0);
  CHECK(c.values.back() == 1.0);
  const HolderFit h = holder_modulus(es.values, {0.001, 0.002, 0.004, 0.01, 0.05, 0.1});
  for (std::size_t i = 1; i < h.modulus.size(); ++i) CHECK(h.modulus[i - 1] <= h.modulus[i]);
}

TEST_CASE("decay fits are translation covariant and localized at small eps") {
  const ModelConfig m = model(1e-2);
  const int N = 60, shift = 7;
  const double theta = 0.3;
  LocalizationOptions opt;
  opt.floor = 1e-10;  // tails below this move with roundoff in theta + shift omega
  const auto a = localization_scan(m, N, {theta}, opt);
  // theta + shift omega on the box centred at -shift is the same matrix
  const SiteSet moved = box(Site::integer({-shift}), N);
  const EigenSystem es = eigensolve(hamiltonian(moved, m, theta + shift * kGolden));
  std::vector<double> ex;
  for (Eigen::Index q = 0; q < es.vectors.cols(); ++q)
    ex.push_back(fit_decay(es.vectors.col(q), moved, 0.2 * N, opt.floor).exponent);
  std::sort(ex.begin(), ex.end());
  const double med = 0.5 * (ex[ex.size() / 2 - 1] + ex[ex.size() / 2]);
  // near-degenerate distant pairs rotate under roundoff, so only the spectrum is exact
  const EigenSystem base = eigensolve(hamiltonian(box(Site::zero(1), N), m, theta));
  CHECK((base.values - es.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(med == doctest::Approx(a[0].median_exponent).epsilon(0.02));
  CHECK(a[0].median_exponent >= 2.0);
}

TEST_CASE("dual at eps = 0 is a Laurent operator with delocalized vectors") {
  ModelConfig m = model(0.0);
  m.hopping.table.clear();
  m.hopping.radius = 2;
  const DualModel dm = aubry_dual(m, 3);
  const auto rows = dual_localization_proxy(dm, {50, 100}, {0.1});
  for (const auto& r : rows) {
    CHECK(r.self_adjoint);
    CHECK(r.median_ipr < 5.0 / (2 * r.M + 1));
    CHECK(r.median_boundary_weight > 0.3);
  }
}

TEST_CASE("envelope fit recovers an exact power law and ignores inner dips") {
  const SiteSet s = box(Site::zero(1), 200);
  Eigen::VectorXcd psi(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) psi[i] = std::pow(1.0 + sup_norm(s[i]), -3.0);
  DecayFit f = fit_decay(psi, s, 40.0, 0.0);
  CHECK(f.exponent == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.points == 161);
  // a dip at one site leaves the envelope unchanged (its mirror carries the shell)
  psi[s.index_of(Site::integer({70}))] *= 1e-3;
  f = fit_decay(psi, s, 40.0, 0.0);
  CHECK(f.exponent == doctest::Approx(3.0).epsilon(1e-12));
}
