#include "qplab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qplab/config.hpp"
#include "qplab/errors.hpp"
#include "qplab/rng.hpp"

namespace qp {

bool VerifyReport::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.failures == 0; });
}

namespace {

// Box of radius r in d dimensions with d in {1, 2}; small enough for dense work.
SiteSet random_box(Rng& rng, int max_sites) {
  const int d = static_cast<int>(rng.integer(1, 2));
  int r = static_cast<int>(rng.integer(1, d == 1 ? 8 : 3));
  while (r > 0 && std::pow(2 * r + 1, d) > max_sites) --r;
  std::vector<int> c(d);
  for (auto& x : c) x = static_cast<int>(rng.integer(-3, 3));
  return box(Site::integer(c), r);
}

// Complex entries with power-law decay away from the diagonal plus random sparsity.
LatticeOperator random_operator(Rng& rng, const SiteSet& s, double scale = 1.0) {
  LatticeOperator m(s, s);
  const double decay = rng.uniform(0.0, 4.0);
  const double fill = rng.uniform(0.3, 1.0);
  for (Eigen::Index i = 0; i < m.n_rows(); ++i)
    for (Eigen::Index j = 0; j < m.n_cols(); ++j) {
      if (rng.uniform() > fill && i != j) continue;
      const double w = std::pow(1.0 + sup_norm(s[i] - s[j]), -decay);
      m.mat(i, j) = scale * w * cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
  return m;
}

// Entries on one offset diagonal only. Products of equal shifts make the tame
// bound nearly sharp, so these exercise the constant rather than the slack.
LatticeOperator random_shift(Rng& rng, const SiteSet& s, const Site& offset) {
  LatticeOperator m(s, s);
  const double mag = rng.uniform(0.5, 2.0);
  for (Eigen::Index i = 0; i < m.n_rows(); ++i)
    for (Eigen::Index j = 0; j < m.n_cols(); ++j)
      if (s[i] - s[j] == offset) m.mat(i, j) = std::polar(mag, rng.uniform(0.0, 6.283185307179586));
  return m;
}

double max_entry(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

class Suite {
 public:
  Suite(std::string name, const VerifyOptions& opt, VerifyReport& rep)
      : opt_(opt), rep_(rep) {
    res_.name = std::move(name);
  }

  // true when lhs <= rhs within the relative slack
  bool check(int inst, const std::string& what, double alpha, double lhs, double rhs) {
    const bool ok = lhs <= rhs * (1.0 + opt_.rel_slack);
    ++res_.checks;
    if (rhs > 0) res_.worst_ratio = std::max(res_.worst_ratio, lhs / rhs);
    else if (lhs > 0) res_.worst_ratio = std::numeric_limits<double>::infinity();
    rep_.rows.push_back({res_.name, inst, what, alpha, lhs, rhs, ok});
    if (!ok) ++res_.failures;
    return ok;
  }

  void record(int inst, std::uint64_t seed, const std::string& what, json data) {
    if (!res_.counterexample.is_null()) return;
    res_.counterexample = {{"suite", res_.name}, {"instance", inst}, {"seed", seed},
                           {"inequality", what}, {"data", std::move(data)}};
  }

  void run(const std::function<void(int, Rng&, std::uint64_t)>& body) {
    const std::uint64_t base = std::stoull(fnv1a_hex(res_.name), nullptr, 16) ^ opt_.seed;
    for (int i = 0; i < opt_.instances; ++i) {
      const std::uint64_t s = base + static_cast<std::uint64_t>(i);
      Rng rng(s);
      body(i, rng, s);
    }
    res_.instances = opt_.instances;
    rep_.suites.push_back(std::move(res_));
  }

 private:
  const VerifyOptions& opt_;
  VerifyReport& rep_;
  SuiteResult res_;
};

} // namespace

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;

  {
    Suite s("tame", opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const SiteSet lam = random_box(rng, 40);
      const int n = static_cast<int>(rng.integer(2, 4));
      const double alpha = rng.uniform(0.0, 6.0);
      std::vector<LatticeOperator> ms;
      const bool shifts = rng.uniform() < 0.5;
      std::vector<int> off(lam.dim(), 0);
      for (auto& o : off) o = static_cast<int>(rng.integer(0, 1));
      for (int k = 0; k < n; ++k)
        ms.push_back(shifts ? random_shift(rng, lam, Site::integer(off)) : random_operator(rng, lam));
      LatticeOperator prod = ms[0];
      for (int k = 1; k < n; ++k) prod = compose(prod, ms[k]);
      double rhs = 0.0;
      for (int k = 0; k < n; ++k) {
        double t = sobolev_norm(ms[k], alpha);
        for (int j = 0; j < n; ++j)
          if (j != k) t *= sobolev_norm(ms[j], 0.0);
        rhs += t;
      }
      rhs *= opt.tame_scale * tame_constant(n, alpha);
      const double lhs = sobolev_norm(prod, alpha);
      if (!s.check(i, "tame(n=" + std::to_string(n) + ")", alpha, lhs, rhs)) {
        json f = json::array();
        for (const auto& m : ms) f.push_back(to_json(m));
        s.record(i, seed, "tame", {{"alpha", alpha}, {"n", n}, {"K_used", opt.tame_scale * tame_constant(n, alpha)},
                                   {"lhs", lhs}, {"rhs", rhs}, {"factors", f}});
      }
    });
  }

  auto audit_suite = [&](const std::string& name, bool want_power) {
    Suite s(name, opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const SiteSet lam = random_box(rng, 60);
      const LatticeOperator m = random_operator(rng, lam);
      std::vector<double> alphas{0.0, rng.uniform(0.0, 2.0), rng.uniform(2.0, 5.0)};
      std::sort(alphas.begin(), alphas.end());
      const int cut = static_cast<int>(rng.integer(1, 4));
      const auto rows = audit_norm_inequalities(m, alphas, cut, -1.0, seed, opt.rel_slack);
      for (const auto& r : rows) {
        if ((r.inequality == "kn") != want_power) continue;
        if (!s.check(i, r.inequality, r.alpha, r.lhs, r.rhs))
          s.record(i, seed, r.inequality, {{"alpha", r.alpha}, {"cut", cut}, {"lhs", r.lhs}, {"rhs", r.rhs},
                                           {"operator", to_json(m)}});
      }
    });
  };
  audit_suite("smoothing_rows", false);
  audit_suite("power", true);

  {
    Suite s("perturbation", opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const SiteSet lam = random_box(rng, 30);
      // M = I + small random part keeps N = M^{-1} well conditioned
      LatticeOperator m = random_operator(rng, lam, 0.2);
      m.mat += Eigen::MatrixXcd::Identity(m.n_rows(), m.n_cols());
      Inverse inv;
      try {
        inv = invert(m);
      } catch (const NearResonance&) {
        return;
      }
      const LatticeOperator& n = inv.inverse;
      LatticeOperator p = random_operator(rng, lam);
      const double target = rng.uniform(0.05, 0.49);
      p.mat *= target / (sobolev_norm(n, 0.0) * sobolev_norm(p, 0.0));
      const LatticeOperator np = perturb_left_inverse(n, p);
      const double alpha = rng.uniform(0.0, 5.0);
      LatticeOperator mp = m;
      mp.mat += p.mat;
      const double resid = max_entry(np.mat * mp.mat - Eigen::MatrixXcd::Identity(mp.n_rows(), mp.n_cols()));
      const bool ok0 = s.check(i, "pa0", 0.0, sobolev_norm(np, 0.0), 2.0 * sobolev_norm(n, 0.0));
      const double n0 = sobolev_norm(n, 0.0);
      const bool oka = s.check(i, "paa", alpha, sobolev_norm(np, alpha),
                               perturbation_constant(alpha) *
                                   (sobolev_norm(n, alpha) + n0 * n0 * sobolev_norm(p, alpha)));
      const bool okr = s.check(i, "left_inverse_residual", 0.0, resid, 1e-9 * inv.cond);
      if (!(ok0 && oka && okr))
        s.record(i, seed, "perturbation", {{"alpha", alpha}, {"N", to_json(n)}, {"P", to_json(p)}});
    });
  }

  {
    Suite s("hadamard", opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const int sz = static_cast<int>(rng.integer(1, 8));
      std::vector<Site> v;
      for (int k = 0; k < sz; ++k) v.push_back(Site::integer({k}));
      const SiteSet lam(v);
      const LatticeOperator m = random_operator(rng, lam, rng.uniform(0.2, 3.0));
      const LatticeOperator adj = adjugate(m);
      const double m0 = sobolev_norm(m, 0.0);
      const double entry_bound = std::pow(m0, sz - 1);
      bool ok = s.check(i, "chi_entry", 0.0, max_entry(adj.mat), entry_bound);
      ok &= s.check(i, "chi_norm", 0.0, sobolev_norm(adj, 0.0), double(sz) * sz * entry_bound);
      if (!ok) s.record(i, seed, "hadamard", {{"operator", to_json(m)}});
    });
  }

  {
    Suite s("schur", opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const SiteSet lam = random_box(rng, 40);
      if (lam.size() < 2) return;
      LatticeOperator m = random_operator(rng, lam, 0.5);
      m.mat += rng.uniform(1.0, 3.0) * Eigen::MatrixXcd::Identity(m.n_rows(), m.n_cols());
      std::vector<Site> in;
      for (const auto& x : lam)
        if (rng.uniform() < 0.4) in.push_back(x);
      if (in.empty() || in.size() == lam.size()) in = {lam[0]};
      const SiteSet inner(in);
      SchurData sd;
      Inverse full;
      try {
        sd = schur(m, inner);
        full = invert(m);
      } catch (const Error&) {
        return;
      }
      const LogDet prod = sd.log_det_a + sd.log_det_s;
      const double gap = relative_gap(prod, full.log_det);
      bool ok = s.check(i, "det_identity", 0.0, gap, 1e-8);
      // the sandwich assumes ||B||_0, ||C||_0 <= 1
      const double b0 = sobolev_norm(sd.b_block, 0.0), c0 = sobolev_norm(sd.c_block, 0.0);
      if (b0 <= 1.0 && c0 <= 1.0) {
        const double s_inv = sobolev_norm(invert(sd.complement).inverse, 0.0);
        const double m_inv = sobolev_norm(full.inverse, 0.0);
        const double a_inv = sobolev_norm(sd.a_inverse, 0.0);
        ok &= s.check(i, "sc_lower", 0.0, s_inv, m_inv);
        ok &= s.check(i, "sc_upper", 0.0, m_inv, 4.0 * (1 + a_inv) * (1 + a_inv) * (1 + s_inv));
      }
      if (!ok) s.record(i, seed, "schur", {{"operator", to_json(m)}, {"inner", to_json(inner)}});
    });
  }

  {
    Suite s("determinant", opt, rep);
    s.run([&](int i, Rng& rng, std::uint64_t seed) {
      const SiteSet lam = random_box(rng, 25);
      const LatticeOperator a = random_operator(rng, lam);
      LatticeOperator b = random_operator(rng, lam);
      const double eps = std::pow(10.0, rng.uniform(-6.0, 0.0));
      b.mat *= eps / std::max(sobolev_norm(b, 0.0), 1e-300);
      const double M = sobolev_norm(a, 0.0);
      const double e = sobolev_norm(b, 0.0);
      const cplx da = a.mat.determinant();
      const cplx dab = (a.mat + b.mat).determinant();
      const double n = static_cast<double>(lam.size());
      const bool ok = s.check(i, "det1", 0.0, std::abs(dab - da), e * n * n * std::pow(M + e, n - 1));
      if (!ok) s.record(i, seed, "det1", {{"A", to_json(a)}, {"B", to_json(b)}});
    });
  }
  return rep;
}

} // namespace qp
