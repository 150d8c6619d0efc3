#include <doctest.h>

#include <cmath>

#include "qplab/errors.hpp"
#include "qplab/msa.hpp"

using namespace qp;

namespace {

const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

ModelConfig amo(double eps, double theta0) {
  ModelConfig m;
  m.d = 1;
  m.epsilon = eps;
  m.omega = Eigen::VectorXd::Constant(1, kGolden);
  m.potential.R = 0.1;
  m.energy = std::cos(6.283185307179586 * theta0);
  m.hopping.alpha_decay = 6.0;
  return m;
}

SiteSet window(int r) { return box(Site::zero(1), r); }

} // namespace

TEST_CASE("paper schedule follows the log recursion exactly") {
  CHECK(log10_delta0_from_epsilon0(1e-90) == doctest::Approx(-3.0));
  const ScaleSchedule s = paper_schedule(1.0, 2.0, -3.0, 3);
  CHECK(s.at(1).N == 1.0);
  CHECK(s.at(1).log10_delta == -90.0);
  CHECK(s.at(2).N == std::floor(std::pow(10.0, 90.0 / 60.0)));
  CHECK(s.at(2).log10_delta == -2700.0);
  CHECK(s.at(3).log10_delta == -81000.0);
  for (int k = 0; k < 3; ++k)
    CHECK(-s.at(k + 1).log10_delta == doctest::Approx(30.0 * -s.at(k).log10_delta));
}

TEST_CASE("exploration schedule rejects nonmonotone tables") {
  CHECK_NOTHROW(exploration_schedule(1, 2, {2, 3}, {-3, -7, -12}));
  CHECK_THROWS_AS(exploration_schedule(1, 2, {3, 2}, {-3, -7, -12}), ScheduleInvalid);
  CHECK_THROWS_AS(exploration_schedule(1, 2, {2, 3}, {-3, -2, -12}), ScheduleInvalid);
  CHECK_THROWS_AS(exploration_schedule(1, 2, {2}, {0.5, -7}), ScheduleInvalid);
}

TEST_CASE("coset balls are symmetric and lie on the requested coset") {
  const SiteSet h = coset_ball(Site({1}), 2.0);  // {-1.5, -0.5, 0.5, 1.5}
  CHECK(h.size() == 4);
  CHECK(h.symmetric_about(Site::zero(1)));
  for (const auto& x : h) CHECK(!x.is_integer());
  CHECK(coset_ball(Site::zero(2), 1.0).size() == 9);
}

TEST_CASE("initial resonant set matches an exhaustive torus scan") {
  const double t0 = 0.2;
  ModelConfig m = amo(1e-3, t0);
  const double theta = 0.4137;
  const SiteSet w = window(50);
  const GenerationState g = initial_generation(m, w, theta, t0, std::log10(0.05));
  std::vector<Site> scan;
  for (int k = -50; k <= 50; ++k) {
    const double x = theta + k * kGolden;
    auto dd = [](double y) { return std::abs(y - std::round(y)); };
    if (std::min(dd(x - t0), dd(x + t0)) < 0.05) scan.push_back(Site::integer({k}));
  }
  CHECK(g.Q == SiteSet(scan));
  CHECK(!g.Q.empty());
  const GenerationState g0 = initial_generation(m, w, t0, t0, -3.0);
  CHECK(g0.Qminus.contains(Site::zero(1)));
}

TEST_CASE("root at eps = 0 is theta0 and small eps moves it by less than eps") {
  const double t0 = 0.2;
  const ScaleSchedule sc = exploration_schedule(1, 2, {2}, {-3, -7});
  for (double eps : {0.0, 1e-4, 1e-3}) {
    const ModelConfig m = amo(eps, t0);
    const MsaRun run = run_msa(m, sc, window(60), t0 + 3e-4, t0);
    REQUIRE(run.generations.size() == 2);
    const GenerationState& g = run.generations[1];
    CHECK(g.case_tag == CaseTag::C1);
    REQUIRE(g.root);
    CHECK(g.root->winding == 1);
    CHECK(g.root->paired);
    if (eps == 0.0)
      CHECK(std::abs(g.theta_s - cplx(t0)) < 1e-12);
    else
      CHECK(std::abs(g.theta_s - cplx(t0)) < eps);
    CHECK(g.omega_shape.size() == 5);
    CHECK(g.omega_tilde_shape.size() == 17);
  }
}

TEST_CASE("engineered double resonance goes to C2 with a symmetric two-point A") {
  // theta0 = -3 omega / 2 mod 1/2 puts 0 in Q^- and 3 in Q^+ for theta = theta0
  double t0 = -1.5 * kGolden;
  t0 -= 0.5 * std::floor(2.0 * t0);
  const ModelConfig m = amo(1e-4, t0);
  const ScaleSchedule sc = exploration_schedule(1, 2, {2}, {-3, -7});
  const MsaRun run = run_msa(m, sc, window(60), t0, t0);
  REQUIRE(run.generations.size() == 2);
  const GenerationState& g = run.generations[1];
  CHECK(g.case_tag == CaseTag::C2);
  CHECK(g.l == Site::integer({3}));
  CHECK(g.P.contains(Site({3})));  // midpoint 3/2
  CHECK(g.a_shape.size() == 2);
  CHECK(g.a_shape.symmetric_about(Site::zero(1)));
  REQUIRE(g.root);
  CHECK(g.root->winding == 2);
  CHECK(g.root->alternative == "l01");
  CHECK(g.root->paired);
}

TEST_CASE("classification distances are symmetric in the sign") {
  const ModelConfig m = amo(1e-3, 0.2);
  for (double theta : {0.05, 0.31, 0.77}) {
    GenerationState g = initial_generation(m, window(80), theta, 0.2, -1.5);
    GenerationState r = g;
    std::swap(r.Qplus, r.Qminus);
    std::swap(r.Qtilde_plus, r.Qtilde_minus);
    const double a = classify_case(g, 2).distance, b = classify_case(r, 2).distance;
    if (std::isfinite(a) && std::isfinite(b)) CHECK(std::abs(a - b) <= 1.0);
  }
}

TEST_CASE("determinant factorizes along the block partition") {
  const double t0 = 0.2;
  const ModelConfig m = amo(1e-3, t0);
  const ScaleSchedule sc = exploration_schedule(1, 2, {2}, {-3, -7});
  const MsaRun run = run_msa(m, sc, window(60), t0 + 3e-4, t0);
  const GenerationState& g = run.generations[1];
  const cplx z = g.theta_s + cplx(1e-4, 2e-5);
  const LatticeOperator M = translated_operator(g.omega_tilde_shape, m, z);
  const SchurData sd = schur(M, g.a_shape);
  const double lhs = log_det(M).log_abs;
  CHECK(std::abs(lhs - (sd.log_det_a.log_abs + sd.log_det_s.log_abs)) < 1e-8);
  // winding of det S over the root disc equals the certified root count
  const WindingResult w = contour_count(g.omega_tilde_shape, m, g.theta_s, 1e-3);
  CHECK(w.winding == 1);
}

TEST_CASE("goodness clauses detect a missing parent block") {
  const double t0 = 0.2;
  const ModelConfig m = amo(1e-3, t0);
  const ScaleSchedule sc = exploration_schedule(1, 2, {2}, {-3, -7});
  const MsaRun run = run_msa(m, sc, window(60), t0 + 3e-4, t0);
  const auto& gens = run.generations;
  CHECK(!is_good(window(3), gens, 0).good);
  const GoodCertificate c = is_good(window(3), gens, 1);
  CHECK(!c.good);
  CHECK(c.clause == 1);
  CHECK(is_good(window(40), gens, 1).good);
  CHECK(is_good(box(Site::integer({30}), 5), gens, 0).good);
  CHECK(fs_violations(gens[1], window(60), t0 + 3e-4, m.omega).empty());
}

TEST_CASE("schur-assembled green function equals the dense inverse") {
  ModelConfig m = amo(1e-2, 0.2);
  m.theta = 0.123;
  const SiteSet lam = window(20);
  const GreenResult g = green(lam, m, {1.0, 3.0});
  const LatticeOperator s = green_schur(lam, m, window(4));
  const double scale = (g.inv.inverse.mat.cwiseAbs().maxCoeff()) * g.inv.cond;
  CHECK((s.mat - g.inv.inverse.mat).cwiseAbs().maxCoeff() < 1e-9 * scale);
  CHECK(g.norms.size() == 3);
  // eps = 0: diagonal inverse with ||T^{-1}||_0 = max 1/|v - E|
  ModelConfig z = m;
  z.epsilon = 0.0;
  const GreenResult d = green(lam, z, {});
  double mx = 0.0;
  for (const auto& k : lam)
    mx = std::max(mx, 1.0 / std::abs(z.potential.value(z.theta + dot(k, z.omega)) - z.energy));
  CHECK(d.norms[0].second == doctest::Approx(mx).epsilon(1e-12));
}

TEST_CASE("bound audit at eps = 0 passes the block and good-set forms") {
  const double t0 = 0.2;
  const ModelConfig m = amo(0.0, t0);
  const ScaleSchedule sc = exploration_schedule(1, 2, {2}, {-3, -7});
  const MsaRun run = run_msa(m, sc, window(60), t0 + 3e-4, t0);
  const auto rows = audit_bounds(run, m, {window(60), window(40)});
  int tb0 = 0, tsg = 0;
  for (const auto& r : rows) {
    if (r.bound_id == "tb0") {
      ++tb0;
      CHECK(r.pass);
    }
    if (r.bound_id == "tsg01") {
      ++tsg;
      CHECK(r.pass);
    }
    if (r.bound_id == "ss") CHECK(r.pass);
  }
  CHECK(tb0 == 1);
  CHECK(tsg == 2);
}
