#include "qplab/msa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qplab/errors.hpp"

namespace qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x < 10^L, robust to L below the double range
bool below(double x, double log10_bound) {
  return x == 0.0 ? true : std::log10(x) < log10_bound;
}

double safe_log10(double x) { return x > 0.0 ? std::log10(x) : -kInf; }

cplx phase_of(double theta, const Site& k, const Eigen::VectorXd& omega) {
  return cplx(theta + dot(k, omega), 0.0);
}

// Half of an integer site, as a (possibly half-integer) site.
Site half(const Site& l) {
  Site h = l;
  for (auto& t : h.twice) t /= 2;
  return h;
}

// Coset representative with doubled coordinates in {0, 1}.
Site reduce_coset(const Site& c) {
  Site r = c;
  for (auto& t : r.twice) t = ((t % 2) + 2) % 2;
  return r;
}

double shape_radius(const SiteSet& s) {
  double r = 0.0;
  for (const auto& x : s) r = std::max(r, sup_norm(x));
  return r;
}

std::string shape_key(const SiteSet& s) {
  std::ostringstream o;
  for (const auto& x : s) {
    for (int t : x.twice) o << t << ',';
    o << ';';
  }
  return o.str();
}

SiteSet clip(const SiteSet& full, const SiteSet& lambda) { return set_intersection(full, lambda); }

// tr(M^{-1} D') with D' = diag(v'(z + n.omega)); this is (det M)'/det M.
cplx log_derivative(const SiteSet& shape, const ModelConfig& m, cplx z) {
  const LatticeOperator t = translated_operator(shape, m, z);
  const Inverse inv = invert(t);
  const Eigen::VectorXcd dv = diagonal_derivative(shape, m, z);
  return (inv.inverse.mat.diagonal().array() * dv.array()).sum();
}

} // namespace

// ---------------------------------------------------------------------------

const ScaleEntry& ScaleSchedule::at(int s) const {
  if (s < 0 || s > s_max())
    throw ScheduleInvalid("schedule has no entry for s = " + std::to_string(s));
  return entries[static_cast<std::size_t>(s)];
}

double ScaleSchedule::delta(int s) const { return std::pow(10.0, at(s).log10_delta); }

double log10_delta0_from_epsilon0(double epsilon0) {
  if (!(epsilon0 > 0.0 && epsilon0 < 1.0)) throw ScheduleInvalid("epsilon0 must lie in (0, 1)");
  return std::log10(epsilon0) / 30.0;
}

ScaleSchedule paper_schedule(double gamma, double tau, double log10_delta0, int s_max) {
  if (!(log10_delta0 < 0.0)) throw ScheduleInvalid("delta0 must lie in (0, 1)");
  if (!(gamma > 0.0) || !(tau > 0.0)) throw ScheduleInvalid("gamma and tau must be positive");
  if (s_max < 0) throw ScheduleInvalid("s_max must be nonnegative");
  ScaleSchedule sc;
  sc.mode = ScaleMode::Paper;
  sc.gamma = gamma;
  sc.tau = tau;
  const double lg = std::log10(gamma);
  sc.entries.push_back({0, 0.0, log10_delta0});
  for (int s = 0; s < s_max; ++s) {
    const double ratio = lg - sc.entries.back().log10_delta;  // log10(gamma/delta_s)
    const double N = std::floor(std::pow(10.0, ratio / (30.0 * tau)));
    sc.entries.push_back({s + 1, N, lg - 30.0 * ratio});
  }
  return sc;
}

ScaleSchedule exploration_schedule(double gamma, double tau, const std::vector<double>& N,
                                   const std::vector<double>& log10_delta) {
  if (log10_delta.size() != N.size() + 1)
    throw ScheduleInvalid("exploration table needs one more delta than N (delta_0 first)");
  if (log10_delta.empty() || !(log10_delta[0] < 0.0))
    throw ScheduleInvalid("delta0 must lie in (0, 1)");
  ScaleSchedule sc;
  sc.mode = ScaleMode::Exploration;
  sc.gamma = gamma;
  sc.tau = tau;
  sc.entries.push_back({0, 0.0, log10_delta[0]});
  for (std::size_t i = 0; i < N.size(); ++i) {
    if (!(N[i] >= 1.0) || N[i] != std::floor(N[i]))
      throw ScheduleInvalid("N_s must be positive integers");
    if (i > 0 && !(N[i] > N[i - 1])) throw ScheduleInvalid("N_s must be strictly increasing");
    if (!(log10_delta[i + 1] < log10_delta[i]))
      throw ScheduleInvalid("delta_s must be strictly decreasing");
    sc.entries.push_back({static_cast<int>(i) + 1, N[i], log10_delta[i + 1]});
  }
  return sc;
}

const char* to_string(CaseTag c) {
  switch (c) {
  case CaseTag::Initial: return "initial";
  case CaseTag::C1: return "C1";
  case CaseTag::C2: return "C2";
  }
  return "?";
}

// ---------------------------------------------------------------------------

SiteSet coset_ball(const Site& coset, double r) {
  const int d = coset.dim();
  const Site c = reduce_coset(coset);
  const int r2 = static_cast<int>(std::floor(2.0 * r + 1e-9));
  std::vector<int> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    // largest value <= r2 with the coset parity
    hi[i] = (r2 - c.twice[i]) % 2 == 0 ? r2 : r2 - 1;
    lo[i] = -hi[i];
  }
  std::vector<Site> v;
  if (d == 0 || hi[0] < lo[0]) return SiteSet(std::move(v), Site::zero(d));
  std::vector<int> t = lo;
  for (;;) {
    v.push_back(Site(t));
    int i = d - 1;
    while (i >= 0) {
      if (t[i] + 2 <= hi[i]) {
        t[i] += 2;
        break;
      }
      t[i] = lo[i];
      --i;
    }
    if (i < 0) break;
  }
  return SiteSet(std::move(v), Site::zero(d));
}

void classify_resonances(GenerationState& g, double theta, const Eigen::VectorXd& omega) {
  const double L = g.log10_delta, Lt = 2.0 * L / 3.0;
  std::vector<Site> qp, qm, tp, tm;
  for (const auto& k : g.P) {
    const cplx x = phase_of(theta, k, omega);
    const double dp = torus_norm(x + g.theta_s), dm = torus_norm(x - g.theta_s);
    if (below(dp, L)) qp.push_back(k);
    if (below(dm, L)) qm.push_back(k);
    if (below(dp, Lt)) tp.push_back(k);
    if (below(dm, Lt)) tm.push_back(k);
  }
  g.Qplus = SiteSet(std::move(qp));
  g.Qminus = SiteSet(std::move(qm));
  g.Qtilde_plus = SiteSet(std::move(tp));
  g.Qtilde_minus = SiteSet(std::move(tm));
  g.Q = set_union(g.Qplus, g.Qminus);
}

GenerationState initial_generation(const ModelConfig& m, const SiteSet& lambda, double theta,
                                   cplx theta0, double log10_delta0) {
  GenerationState g;
  const int d = m.d;
  g.s = 0;
  g.l = Site::zero(d);
  g.coset = Site::zero(d);
  g.theta_s = theta0;
  g.log10_delta = log10_delta0;
  g.P = lambda;
  const SiteSet single({Site::zero(d)});
  g.omega_shape = g.omega_tilde_shape = g.a_shape = single;
  for (const auto& k : lambda) {
    const SiteSet b({k});
    g.blocks[k] = BlockTriple{b, b, b, b, b, false};
  }
  classify_resonances(g, theta, m.omega);
  return g;
}

CaseDecision classify_case(const GenerationState& g, double N_next) {
  CaseDecision c;
  c.l = Site::zero(g.P.empty() ? (g.coset.dim()) : g.P.dim());
  c.distance = kInf;
  if (g.Qtilde_minus.empty() || g.Qplus.empty()) return c;
  int best = std::numeric_limits<int>::max();
  for (const auto& i : g.Qplus)
    for (const auto& j : g.Qtilde_minus) {
      const int t = sup_twice(i - j);
      // strict improvement keeps the lexicographically first (i, j)
      if (t < best) {
        best = t;
        c.i = i;
        c.j = j;
      }
    }
  c.distance = 0.5 * best;
  if (c.distance <= 100.0 * N_next * N_next * N_next) {
    c.tag = CaseTag::C2;
    c.l = c.i - c.j;
  }
  return c;
}

LatticeOperator translated_operator(const SiteSet& shape, const ModelConfig& m, cplx z) {
  return assemble(shape, m, z);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Block> earlier_blocks(const std::vector<GenerationState>& history) {
  std::vector<Block> out;
  for (const auto& g : history) {
    if (g.s == 0) continue;  // singletons are either inside or disjoint
    for (const auto& [k, b] : g.blocks) out.push_back({b.omega_tilde_full, g.s});
  }
  return out;
}

// Least symmetric shape U containing `core` such that every k + U is aligned
// with the earlier blocks.
SiteSet symmetric_fixpoint(const SiteSet& core, const SiteSet& P, const std::vector<Block>& prev,
                           std::optional<double> margin) {
  SiteSet U = set_union(core, core.negated());
  for (int it = 0; it < 64; ++it) {
    SiteSet next = U;
    for (const auto& k : P) {
      const SiteSet e = align_enlarge(U.translated(k), prev, margin).translated(-k);
      next = set_union(next, set_union(e, e.negated()));
    }
    if (next == U) return U;
    U = std::move(next);
  }
  throw GeometryViolation("symmetric enlargement did not reach a fixpoint");
}

} // namespace

GenerationState build_generation(const std::vector<GenerationState>& history,
                                 const ScaleSchedule& sched, const SiteSet& lambda,
                                 const ModelConfig& m, double theta, RootCache* cache) {
  if (history.empty()) throw DomainError("build_generation needs generation 0");
  const GenerationState& prev = history.back();
  const ScaleEntry& entry = sched.at(prev.s + 1);
  const double N = entry.N;
  const int d = m.d;

  GenerationState g;
  g.s = prev.s + 1;
  g.N = N;
  g.log10_delta = entry.log10_delta;

  const CaseDecision dec = classify_case(prev, N);
  g.case_tag = dec.tag;
  g.l = dec.l;
  g.coset = reduce_coset(prev.coset + half(dec.l));

  const Site lh = half(dec.l);
  if (dec.tag == CaseTag::C1) {
    g.P = prev.Q;
  } else {
    const SiteSet O = set_union(prev.Qminus, prev.Qplus.translated(-dec.l));
    g.P = O.translated(lh);
  }
  if (g.P.empty()) return g;

  const double r_prev = shape_radius(prev.omega_tilde_shape);
  double r_omega = N, r_tilde = N * N * N;
  if (dec.tag == CaseTag::C2) {
    r_omega = std::max(N * N * N, sup_norm(lh) + r_prev);
    r_tilde = std::max(N * N * N * N * N, r_omega);
  }
  if (r_tilde > 4096.0 || std::pow(2.0 * r_tilde + 1.0, d) > 2.0e4)
    throw ComplexityRefusal("enlarged block of radius " + std::to_string(r_tilde) +
                            " is beyond desk scale");

  const std::vector<Block> prev_blocks = earlier_blocks(history);
  std::optional<double> margin;
  if (prev.s >= 1) margin = 50.0 * std::pow(prev.N, 5);

  g.omega_shape = symmetric_fixpoint(coset_ball(g.coset, r_omega), g.P, prev_blocks, margin);
  g.omega_tilde_shape = symmetric_fixpoint(set_union(g.omega_shape, coset_ball(g.coset, r_tilde)),
                                           g.P, prev_blocks, margin);
  if (dec.tag == CaseTag::C1)
    g.a_shape = prev.a_shape;
  else
    g.a_shape = set_union(prev.a_shape.translated(-lh), prev.a_shape.translated(lh));

  g.zeta = diam(g.omega_shape);
  g.zeta_tilde = diam(g.omega_tilde_shape);
  for (const auto& k : g.P) {
    BlockTriple b;
    b.omega_full = g.omega_shape.translated(k);
    b.omega_tilde_full = g.omega_tilde_shape.translated(k);
    b.omega = clip(b.omega_full, lambda);
    b.omega_tilde = clip(b.omega_tilde_full, lambda);
    b.a = clip(g.a_shape.translated(k), lambda);
    b.truncated = b.omega_tilde.size() != b.omega_tilde_full.size();
    g.truncated = g.truncated || b.truncated;
    g.blocks[k] = std::move(b);
  }

  // separation of same-generation blocks
  for (auto a = g.blocks.begin(); a != g.blocks.end(); ++a)
    for (auto b = std::next(a); b != g.blocks.end(); ++b) {
      const double dd = dist(a->second.omega_tilde_full, b->second.omega_tilde_full);
      if (!(dd > 10.0 * g.zeta_tilde)) {
        std::ostringstream o;
        o << "blocks at generation " << g.s << " centred at (";
        for (int c = 0; c < d; ++c) o << (c ? "," : "") << a->first.coord(c);
        o << ") and (";
        for (int c = 0; c < d; ++c) o << (c ? "," : "") << b->first.coord(c);
        o << ") are " << dd << " apart, need more than " << 10.0 * g.zeta_tilde;
        throw GeometryViolation(o.str());
      }
    }

  // root of det M_{s+1}; C1 roots depend only on the shape and the previous root
  std::string key;
  if (cache) {
    std::ostringstream o;
    o.precision(17);
    o << to_string(g.case_tag) << '|' << prev.theta_s << '|' << prev.log10_delta << '|'
      << shape_key(g.omega_tilde_shape) << '|' << shape_key(SiteSet({g.l}));
    key = o.str();
    std::lock_guard<std::mutex> lock(cache->mu);
    if (auto it = cache->roots.find(key); it != cache->roots.end()) g.root = it->second;
  }
  if (!g.root) {
    g.root = locate_theta(g, prev, m);
    if (cache) {
      std::lock_guard<std::mutex> lock(cache->mu);
      cache->roots.emplace(key, *g.root);
    }
  }
  g.theta_s = g.root->theta;

  classify_resonances(g, theta, m.omega);
  check_invariants(g, history);
  return g;
}

// ---------------------------------------------------------------------------

WindingResult contour_count(const SiteSet& shape, const ModelConfig& m, cplx c, double r) {
  constexpr double kTwoPi = 6.283185307179586;
  std::vector<cplx> g;  // log-derivative samples at angles 2 pi j / K
  int K = 32;
  auto sample = [&](int j, int KK) {
    const cplx z = c + std::polar(r, kTwoPi * j / KK);
    try {
      return log_derivative(shape, m, z);
    } catch (const NearResonance&) {
      throw ContourContamination("determinant vanishes on the contour");
    }
  };
  for (int j = 0; j < K; ++j) g.push_back(sample(j, K));
  double last = kInf;
  WindingResult res;
  for (;;) {
    cplx s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < K; ++j) {
      const cplx w = std::polar(r, kTwoPi * j / K);
      s0 += g[j] * w;
      s1 += g[j] * w * w;
      s2 += g[j] * w * w * w;
    }
    s0 /= static_cast<double>(K);
    s1 /= static_cast<double>(K);
    s2 /= static_cast<double>(K);
    const double w = s0.real();
    const bool integral = std::abs(w - std::round(w)) < 1e-6 && std::abs(s0.imag()) < 1e-6;
    if ((integral && std::abs(w - last) < 1e-6) || K >= 8192) {
      if (!integral) throw ContourContamination("winding did not settle to an integer");
      res.winding = static_cast<int>(std::lround(w));
      res.power_sums = {s1, s2};
      res.points = K;
      return res;
    }
    last = w;
    // double the rule, reusing the even nodes
    std::vector<cplx> h(2 * K);
    for (int j = 0; j < K; ++j) {
      h[2 * j] = g[j];
      h[2 * j + 1] = sample(2 * j + 1, 2 * K);
    }
    g = std::move(h);
    K *= 2;
  }
}

RootCertificate locate_theta(const GenerationState& next, const GenerationState& prev,
                             const ModelConfig& m) {
  const double L = prev.log10_delta;
  const SiteSet& shape = next.omega_tilde_shape;
  RootCertificate rc;
  int expected = 1;
  if (next.case_tag == CaseTag::C1) {
    rc.center = prev.theta_s;
    rc.contour_radius = std::pow(10.0, L * 18.0 / 19.0);
  } else {
    expected = 2;
    const double x = dot(half(next.l), m.omega);
    const double a = torus_norm(x + prev.theta_s), b = torus_norm(x + prev.theta_s - 0.5);
    const bool l01 = below(a, 2.0 * L / 3.0), l02 = below(b, 2.0 * L / 3.0);
    if (l01 && l02) throw ContourContamination("both half-shifted alternatives hold");
    if (!l01 && !l02) throw NoRoot("neither half-shifted alternative holds for l_s");
    rc.center = l01 ? 0.0 : 0.5;
    rc.alternative = l01 ? "l01" : "l02";
    rc.contour_radius = std::pow(10.0, L * 5.0 / 8.0);
  }
  if (!(rc.contour_radius > 1e-250))
    throw ComplexityRefusal("root contour radius underflows double precision");

  WindingResult w;
  for (int attempt = 0;; ++attempt) {
    w = contour_count(shape, m, rc.center, rc.contour_radius);
    if (w.winding == 0) throw NoRoot("no zero of det M inside the root disc");
    if (w.winding == expected) break;
    if (attempt >= 4)
      throw ContourContamination("winding " + std::to_string(w.winding) + " after shrinking");
    rc.contour_radius *= 0.5;
  }
  rc.winding = w.winding;
  rc.quadrature_points = w.points;

  std::vector<cplx> roots;
  if (expected == 1) {
    roots.push_back(rc.center + w.power_sums[0]);
  } else {
    const cplx e1 = w.power_sums[0], e2 = 0.5 * (e1 * e1 - w.power_sums[1]);
    const cplx disc = std::sqrt(e1 * e1 - 4.0 * e2);
    roots.push_back(rc.center + 0.5 * (e1 + disc));
    roots.push_back(rc.center + 0.5 * (e1 - disc));
  }
  auto correction = [&](cplx z) -> cplx {
    try {
      return 1.0 / log_derivative(shape, m, z);
    } catch (const NearResonance&) {
      return 0.0;  // exactly singular: z is a root to working precision
    }
  };
  for (auto& z : roots) {
    for (int it = 0; it < 40; ++it) {
      const cplx step = correction(z);
      z -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    if (std::abs(z - rc.center) > rc.contour_radius)
      throw ContourContamination("Newton refinement left the root disc");
  }
  if (expected == 1) {
    rc.theta = roots[0];
  } else {
    // representative with the larger real part (then imaginary part)
    const bool first = roots[0].real() > roots[1].real() ||
                       (roots[0].real() == roots[1].real() && roots[0].imag() >= roots[1].imag());
    rc.theta = first ? roots[0] : roots[1];
  }
  rc.residual = std::abs(correction(rc.theta));
  const double tol = 1e-8 * std::max(1.0, rc.contour_radius);
  if (expected == 2) {
    rc.paired = torus_norm(roots[0] + roots[1]) < tol;
  } else {
    rc.paired = std::abs(correction(-rc.theta)) < tol;
  }
  return rc;
}

// ---------------------------------------------------------------------------

void check_invariants(const GenerationState& g, const std::vector<GenerationState>& history) {
  auto fail = [&](const std::string& what) {
    throw GeometryViolation("generation " + std::to_string(g.s) + ": " + what);
  };
  if (!g.Q.subset_of(g.P)) fail("Q_s is not inside P_s");
  if (!g.Qplus.subset_of(g.Qtilde_plus) || !g.Qminus.subset_of(g.Qtilde_minus))
    fail("Q~_s does not contain Q_s");
  if (g.P.empty()) return;
  if (!g.a_shape.subset_of(g.omega_shape)) fail("A is not inside Omega");
  if (!g.omega_shape.subset_of(g.omega_tilde_shape)) fail("Omega is not inside Omega~");
  if (g.a_shape.size() > (std::size_t{1} << std::min(g.s, 62))) fail("#A exceeds 2^s");
  const Site o = Site::zero(g.omega_tilde_shape.dim());
  if (!g.omega_tilde_shape.symmetric_about(o)) fail("Omega~ - k is not symmetric");
  if (!g.a_shape.symmetric_about(o)) fail("A - k is not symmetric");
  for (const auto& [k, b] : g.blocks)
    if (!(b.omega_tilde_full.translated(-k) == g.omega_tilde_shape)) fail("Omega~ - k depends on k");

  // nesting against every earlier generation
  for (const auto& h : history) {
    if (h.s == 0 || h.s >= g.s) continue;
    for (const auto& [k, b] : g.blocks)
      for (const auto& [k2, b2] : h.blocks) {
        if (b.omega_full.intersects(b2.omega_tilde_full) && !b2.omega_tilde_full.subset_of(b.omega_full))
          fail("Omega meets an earlier Omega~ without containing it");
        if (b.omega_tilde_full.intersects(b2.omega_tilde_full) &&
            !b2.omega_tilde_full.subset_of(b.omega_tilde_full))
          fail("Omega~ meets an earlier Omega~ without containing it");
      }
  }
  // covering of Q_{s-1}
  if (!history.empty()) {
    const GenerationState& prev = history.back();
    for (const auto& k2 : prev.Q) {
      const SiteSet& t = prev.s == 0 ? SiteSet({k2}) : prev.blocks.at(k2).omega_tilde_full;
      bool covered = false;
      for (const auto& [k, b] : g.blocks) covered = covered || t.subset_of(b.omega_full);
      if (!covered) fail("a site of Q_{s-1} is not covered by any Omega_k");
    }
  }
}

GoodCertificate is_good(const SiteSet& lambda, const std::vector<GenerationState>& gens, int s) {
  GoodCertificate c;
  if (s < 0 || s >= static_cast<int>(gens.size())) throw DomainError("is_good: no such generation");
  for (int sp = 0; sp < s; ++sp) {
    const GenerationState& g = gens[sp];
    const GenerationState& up = gens[sp + 1];
    for (const auto& k2 : g.Q) {
      const SiteSet& t = g.blocks.at(k2).omega_tilde_full;
      if (!t.subset_of(lambda)) continue;
      for (const auto& [k, b] : up.blocks)
        if (t.subset_of(b.omega_full) && !b.omega_tilde_full.subset_of(lambda))
          return {false, 1, sp, k2};
    }
  }
  const GenerationState& g = gens[s];
  for (const auto& k : g.Q) {
    const auto it = g.blocks.find(k);
    if (it != g.blocks.end() && it->second.omega_tilde_full.subset_of(lambda)) return {false, 2, s, k};
  }
  return c;
}

std::vector<Site> fs_violations(const GenerationState& g, const SiteSet& window, double theta,
                                const Eigen::VectorXd& omega) {
  std::vector<Site> out;
  const double Lt = 1.0 + 2.0 * g.log10_delta / 3.0;  // 10 delta^{2/3}
  for (const auto& w : window) {
    const Site k = w + g.coset;
    const cplx x = phase_of(theta, k, omega);
    const double dm = std::min(torus_norm(x + g.theta_s), torus_norm(x - g.theta_s));
    if (below(dm, Lt) && !g.P.contains(k)) out.push_back(k);
  }
  return out;
}

GreenResult green(const SiteSet& lambda, const ModelConfig& m, const std::vector<double>& alphas) {
  GreenResult r;
  r.inv = invert(assemble_T(lambda, m));
  r.norms.emplace_back(0.0, sobolev_norm(r.inv.inverse, 0.0));
  for (double a : alphas)
    if (a != 0.0) r.norms.emplace_back(a, sobolev_norm(r.inv.inverse, a));
  return r;
}

LatticeOperator green_schur(const SiteSet& lambda, const ModelConfig& m, const SiteSet& inner) {
  return schur_inverse(schur(assemble_T(lambda, m), inner));
}

// ---------------------------------------------------------------------------

MsaRun run_msa(const ModelConfig& m, const ScaleSchedule& sched, const SiteSet& lambda,
               double theta, cplx theta0, RootCache* cache) {
  MsaRun run;
  run.theta = theta;
  run.generations.push_back(initial_generation(m, lambda, theta, theta0, sched.at(0).log10_delta));
  while (run.generations.back().s < sched.s_max()) {
    if (run.generations.back().Q.empty()) {
      run.stopped = "Q_s empty at s = " + std::to_string(run.generations.back().s);
      return run;
    }
    run.generations.push_back(build_generation(run.generations, sched, lambda, m, theta, cache));
  }
  run.stopped = "schedule exhausted";
  return run;
}

namespace {

BoundRow make_row(int s, std::string id, double lhs, double rhs, double budget_log10, bool strict,
                  bool lower, bool truncated) {
  BoundRow r;
  r.s = s;
  r.bound_id = std::move(id);
  r.lhs_log10 = lhs;
  r.rhs_log10 = rhs;
  r.lower_bound = lower;
  r.truncated = truncated;
  const double q = lower ? rhs - lhs : lhs - rhs;  // how far past the bound, log10
  r.budget_pass = std::isfinite(lhs) && q < budget_log10;
  r.pass = strict ? (std::isfinite(lhs) && q < 0.0) : r.budget_pass;
  return r;
}

// log10 ||T_S^{-1}||_alpha, +inf when T_S is singular to working precision
double log10_inverse_norm(const SiteSet& s, const ModelConfig& m, double theta, double alpha) {
  LatticeOperator t = assemble(s, m, cplx(theta, 0.0));
  try {
    const Inverse inv = invert(t);
    return log10_sobolev_norm(inv.inverse, alpha);
  } catch (const NearResonance&) {
    return kInf;
  }
}

} // namespace

std::vector<BoundRow> audit_bounds(const MsaRun& run, const ModelConfig& m,
                                   const std::vector<SiteSet>& lambda_samples,
                                   const AuditOptions& opt) {
  std::vector<BoundRow> rows;
  const double B = std::log10(opt.budget);
  const double a1 = m.hopping.alpha1, a0 = m.hopping.alpha0;
  const double theta = run.theta;
  const auto& gens = run.generations;
  constexpr double kTwoPi = 6.283185307179586;
  const double vR = m.potential.sup_norm();

  for (const auto& g : gens) {
    const double L = g.log10_delta;
    if (g.s == 0) {
      for (const auto& lam : lambda_samples) {
        if (!is_good(lam, gens, 0).good) continue;
        rows.push_back(make_row(0, "0g", log10_inverse_norm(lam, m, theta, a1 + a0), -2.0 * L, B,
                                false, false, false));
      }
      continue;
    }
    for (const auto& [k, b] : g.blocks) {
      const cplx x = phase_of(theta, k, m.omega);
      const double prod = safe_log10(torus_norm(x - g.theta_s)) + safe_log10(torus_norm(x + g.theta_s));
      rows.push_back(make_row(g.s, "tb0", log10_inverse_norm(b.omega_tilde, m, theta, 0.0),
                              -L / 15.0 - prod, B, true, false, b.truncated));
      if (!g.Q.contains(k) && g.zeta > 0.0)
        rows.push_back(make_row(g.s, "tba", log10_inverse_norm(b.omega_tilde, m, theta, a1),
                                a1 * std::log10(g.zeta) - 7.0 * L / 3.0, B, true, false, b.truncated));
    }
    // Schur complement onto A on the window around +-theta_s
    if (!g.P.empty() && g.root) {
      const double rz = std::pow(10.0, L / 2.0);
      for (int sigma : {1, -1})
        for (double f : opt.z_radii)
          for (int j = 0; j < opt.z_angles; ++j) {
            const cplx z = static_cast<double>(sigma) * g.theta_s +
                           std::polar(f * rz, kTwoPi * (j + 0.5) / opt.z_angles);
            const LatticeOperator M = translated_operator(g.omega_tilde_shape, m, z);
            try {
              const SchurData sd = schur(M, g.a_shape);
              rows.push_back(make_row(g.s, "ss", std::log10(sobolev_norm(sd.complement, 0.0)),
                                      std::log10(4.0 * vR), B, true, false, false));
              const double rhs = 2.0 * L / 75.0 + safe_log10(torus_norm(z - g.theta_s)) +
                                 safe_log10(torus_norm(z + g.theta_s));
              rows.push_back(make_row(g.s, "detss", sd.log_det_s.log_abs / std::log(10.0), rhs, B,
                                      false, true, false));
            } catch (const SchurDegenerate& e) {
              BoundRow r = make_row(g.s, "ss", kInf, std::log10(4.0 * vR), B, true, false, false);
              r.note = e.what();
              rows.push_back(r);
            }
          }
    }
    for (const auto& lam : lambda_samples) {
      if (!is_good(lam, gens, g.s).good) continue;
      double sup = -kInf;
      bool trunc = false;
      for (const auto& [k, b] : g.blocks) {
        if (!b.omega_tilde_full.subset_of(lam)) continue;
        const cplx x = phase_of(theta, k, m.omega);
        sup = std::max(sup, -safe_log10(torus_norm(x - g.theta_s)) - safe_log10(torus_norm(x + g.theta_s)));
        trunc = trunc || b.truncated;
      }
      const double rhs = std::isfinite(sup) ? -2.0 * L / 15.0 + sup : -32.0 * L / 15.0;
      BoundRow r = make_row(g.s, "tsg01", log10_inverse_norm(lam, m, theta, 0.0), rhs, B, true,
                            false, g.truncated);
      if (!std::isfinite(sup)) r.note = "no block inside Lambda; uniform form";
      rows.push_back(r);
      if (g.zeta > 0.0)
        rows.push_back(make_row(g.s, "tsg1", log10_inverse_norm(lam, m, theta, a1),
                                a1 * std::log10(g.zeta) - 14.0 * L / 3.0, B, true, false, g.truncated));
    }
  }
  return rows;
}

} // namespace qp
