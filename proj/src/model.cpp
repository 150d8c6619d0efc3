#include "qplab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qplab/errors.hpp"

namespace qp {

namespace {

constexpr double kTwoPi = 6.283185307179586;

cplx cos2pi(cplx z) { return std::cos(kTwoPi * z); }
cplx sin2pi(cplx z) { return std::sin(kTwoPi * z); }

double sup_int(const std::vector<int>& n) {
  int m = 0;
  for (int x : n) m = std::max(m, std::abs(x));
  return m;
}

// Next point of the box [-r, r]^d in lexicographic order; false when done.
bool next_point(std::vector<int>& n, int r) {
  for (int c = static_cast<int>(n.size()) - 1; c >= 0; --c) {
    if (n[c] < r) {
      ++n[c];
      return true;
    }
    n[c] = -r;
  }
  return false;
}

} // namespace

double torus_dist(double x) { return std::abs(x - std::round(x)); }

double torus_norm(cplx z) { return std::hypot(torus_dist(z.real()), z.imag()); }

// ---------------------------------------------------------------------------

cplx PotentialSpec::value(cplx z) const {
  const cplx c = cos2pi(z);
  switch (kind) {
  case Kind::Cosine:
    return c;
  case Kind::Polynomial: {
    cplx v = c, p = c;
    for (double l : lambda) {
      p *= c;
      v += l * p;
    }
    return v;
  }
  case Kind::CosinePlusEven: {
    cplx f = 0.0;
    for (std::size_t m = 0; m < f_cos.size(); ++m)
      f += f_cos[m] * cos2pi(static_cast<double>(m) * z);
    return c + eps_f * f;
  }
  }
  return c;
}

cplx PotentialSpec::derivative(cplx z) const {
  const cplx c = cos2pi(z), dc = -kTwoPi * sin2pi(z);
  switch (kind) {
  case Kind::Cosine:
    return dc;
  case Kind::Polynomial: {
    cplx g = 1.0, p = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      p *= c;  // c^{k-1}, k = i + 2
      g += static_cast<double>(i + 2) * lambda[i] * p;
    }
    return dc * g;
  }
  case Kind::CosinePlusEven: {
    cplx f = 0.0;
    for (std::size_t m = 1; m < f_cos.size(); ++m) {
      const double mm = static_cast<double>(m);
      f += -kTwoPi * mm * f_cos[m] * sin2pi(mm * z);
    }
    return dc + eps_f * f;
  }
  }
  return dc;
}

double PotentialSpec::sup_norm() const {
  // maximum modulus on the boundary lines; v(conj z) = conj v(z) covers -R
  constexpr int n = 4096;
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    s = std::max(s, std::abs(value(cplx(static_cast<double>(j) / n, R))));
  return s;
}

double PotentialSpec::lambda_weight() const {
  double w = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) w += static_cast<double>(i + 2) * std::abs(lambda[i]);
  return w;
}

void PotentialSpec::validate() const {
  if (!(R > 0.0)) throw DomainError("potential strip width R must be positive");
  if (kind == Kind::Polynomial && !(lambda_weight() < 1.0))
    throw DomainError("polynomial potential needs sum k|lambda_k| < 1");
}

// ---------------------------------------------------------------------------

cplx HoppingSpec::phi(const std::vector<int>& n) const {
  if (auto it = table.find(n); it != table.end()) return it->second;
  const double r = sup_int(n);
  if (r == 0.0 || amplitude == 0.0) return 0.0;
  if (radius >= 0 && r > radius) return 0.0;
  return amplitude * std::pow(1.0 + r, -alpha_decay);
}

std::vector<std::string> ModelConfig::flags() const {
  std::vector<std::string> f;
  if (!(hopping.alpha0 > d)) f.push_back("alpha0 <= d: rows constant diverges");
  if (!(hopping.alpha_decay >= hopping.alpha1 + hopping.alpha0))
    f.push_back("alpha_decay below alpha1 + alpha0: hopping outside the decay envelope");
  if (!(tau > d)) f.push_back("tau <= d: Diophantine set is empty");
  if (!(gamma > 0.0 && gamma < 1.0)) f.push_back("gamma outside (0, 1)");
  for (const auto& [n, v] : hopping.table)
    if (std::abs(v) > std::pow(1.0 + sup_int(n), -hopping.alpha_decay) * (1.0 + 1e-12))
      f.push_back("hopping table entry exceeds the decay envelope");
  return f;
}

ModelConfig model_from_config(const Config& cfg) {
  ModelConfig m;
  m.d = static_cast<int>(cfg.integer("model", "d", 1));
  if (m.d < 1) throw ConfigError("model.d must be >= 1");
  m.epsilon = cfg.number("model", "epsilon", m.epsilon);
  if (cfg.has("model", "theta")) {
    const auto& t = cfg.get("model", "theta");
    if (t.is_array() && t.size() == 2)
      m.theta = cplx(t[0].get<double>(), t[1].get<double>());
    else
      m.theta = cfg.number("model", "theta");
  }
  m.energy = cfg.number("model", "energy", m.energy);

  if (cfg.has("frequency", "omega")) {
    const auto w = cfg.numbers("frequency", "omega");
    m.omega = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  } else {
    m.omega = Eigen::VectorXd::Constant(m.d, 0.5 * (std::sqrt(5.0) - 1.0));
  }
  if (m.omega.size() != m.d) throw ConfigError("frequency.omega must have d entries");
  m.tau = cfg.number("frequency", "tau", m.tau);
  m.gamma = cfg.number("frequency", "gamma", m.gamma);

  auto& v = m.potential;
  const std::string kind = cfg.string("potential", "kind", "cosine");
  if (kind == "cosine") v.kind = PotentialSpec::Kind::Cosine;
  else if (kind == "polynomial") v.kind = PotentialSpec::Kind::Polynomial;
  else if (kind == "cosine_plus_even") v.kind = PotentialSpec::Kind::CosinePlusEven;
  else throw ConfigError("unknown potential.kind " + kind);
  v.R = cfg.number("potential", "R", v.R);
  if (cfg.has("potential", "lambda")) v.lambda = cfg.numbers("potential", "lambda");
  v.eps_f = cfg.number("potential", "eps_f", v.eps_f);
  if (cfg.has("potential", "f_cos")) v.f_cos = cfg.numbers("potential", "f_cos");
  v.validate();

  auto& h = m.hopping;
  h.alpha_decay = cfg.number("hopping", "alpha_decay", h.alpha_decay);
  h.alpha0 = cfg.number("hopping", "alpha0", static_cast<double>(m.d) + 1.0);
  h.alpha1 = cfg.number("hopping", "alpha1", h.alpha1);
  h.amplitude = cfg.number("hopping", "amplitude", h.amplitude);
  h.radius = static_cast<int>(cfg.integer("hopping", "radius", h.radius));
  if (cfg.has("hopping", "table")) {
    // [[n..., re] or [n..., re, im], ...]
    for (const auto& e : cfg.get("hopping", "table")) {
      if (!e.is_array() || (e.size() != static_cast<std::size_t>(m.d) + 1 &&
                            e.size() != static_cast<std::size_t>(m.d) + 2))
        throw ConfigError("hopping.table entries are [n_1..n_d, re] or [n_1..n_d, re, im]");
      std::vector<int> n(m.d);
      for (int c = 0; c < m.d; ++c) n[c] = e[c].get<int>();
      const double re = e[m.d].get<double>();
      const double im = e.size() == static_cast<std::size_t>(m.d) + 2 ? e[m.d + 1].get<double>() : 0.0;
      h.table[n] = cplx(re, im);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

PotentialCertificate certify_potential(const PotentialSpec& v, int grid) {
  if (grid < 64) throw DomainError("certification grid must have at least 64 points per unit");
  v.validate();
  const double cell = 1.0 / grid;
  const int ny = static_cast<int>(std::floor(2.0 * v.R * grid)) + 1;
  std::vector<cplx> z, vz;
  for (int iy = 0; iy < ny; ++iy) {
    const double y = ny == 1 ? 0.0 : -v.R + 2.0 * v.R * iy / (ny - 1);
    for (int ix = 0; ix < grid; ++ix) {
      z.emplace_back(ix * cell, y);
      vz.push_back(v.value(z.back()));
    }
  }
  PotentialCertificate c;
  c.kappa1 = std::numeric_limits<double>::infinity();
  const double skip = cell * (1.0 - 1e-9);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double a = torus_norm(z[i] - z[j]), b = torus_norm(z[i] + z[j]);
      if (a < skip || b < skip) continue;
      const double r = std::abs(vz[i] - vz[j]) / (a * b);
      c.kappa1 = std::min(c.kappa1, r);
      c.kappa2 = std::max(c.kappa2, r);
      ++c.pairs;
    }
  if (c.pairs == 0) throw DomainError("certification grid produced no admissible pairs");
  if (!(c.kappa1 > 1e-14 * c.kappa2))
    throw NotCosineType("difference quotient collapses to zero on the strip");
  return c;
}

DiophantineCertificate certify_diophantine(const Eigen::VectorXd& omega, double gamma, double tau,
                                           int n_max) {
  const int d = static_cast<int>(omega.size());
  DiophantineCertificate c;
  c.worst_ratio = std::numeric_limits<double>::infinity();
  std::vector<int> n(d, -n_max);
  double worst_norm = 0.0;
  do {
    const double r = sup_int(n);
    if (r == 0.0) continue;
    double x = 0.0;
    for (int k = 0; k < d; ++k) x += n[k] * omega[k];
    const double ratio = torus_dist(x) * std::pow(r, tau) / gamma;
    // ties broken by smaller ||n||, then lexicographic (enumeration order)
    if (ratio < c.worst_ratio || (ratio == c.worst_ratio && r < worst_norm)) {
      c.worst_ratio = ratio;
      c.worst = n;
      worst_norm = r;
    }
  } while (next_point(n, n_max));
  c.pass = c.worst_ratio > 1.0;
  return c;
}

// ---------------------------------------------------------------------------

LatticeOperator assemble(const SiteSet& sites, const ModelConfig& m, cplx z) {
  LatticeOperator t(sites, sites);
  const auto n = static_cast<Eigen::Index>(sites.size());
  if (n == 0) return t;
  const int d = sites.dim();
  for (const auto& s : sites)
    if (!(s - sites[0]).is_integer())
      throw DomainError("assembled sites must lie in one coset of Z^d");
  for (Eigen::Index i = 0; i < n; ++i)
    t.mat(i, i) = m.potential.value(z + dot(sites[i], m.omega)) - m.energy;
  if (m.epsilon == 0.0) return t;

  // phi depends only on the offset; cache it in a dense box of offsets
  std::vector<int> lo(d), ext(d);
  for (int c = 0; c < d; ++c) {
    int mn = sites[0].twice[c], mx = mn;
    for (const auto& s : sites) mn = std::min(mn, s.twice[c]), mx = std::max(mx, s.twice[c]);
    lo[c] = (mn - mx) / 2;
    ext[c] = mx - mn + 1;
  }
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= static_cast<std::size_t>(ext[c]);
  std::vector<cplx> cache(total);
  std::vector<char> known(total, 0);
  std::vector<int> off(d);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      std::size_t k = 0;
      for (int c = 0; c < d; ++c) {
        off[c] = (sites[i].twice[c] - sites[j].twice[c]) / 2;
        k = k * ext[c] + (off[c] - lo[c]);
      }
      if (!known[k]) {
        cache[k] = m.hopping.phi(off);
        known[k] = 1;
      }
      t.mat(i, j) = m.epsilon * cache[k];
    }
  return t;
}

Eigen::VectorXcd diagonal_derivative(const SiteSet& sites, const ModelConfig& m, cplx z) {
  Eigen::VectorXcd g(static_cast<Eigen::Index>(sites.size()));
  for (std::size_t i = 0; i < sites.size(); ++i)
    g[static_cast<Eigen::Index>(i)] = m.potential.derivative(z + dot(sites[i], m.omega));
  return g;
}

// ---------------------------------------------------------------------------

cplx solve_theta0(const PotentialSpec& v, double energy) {
  v.validate();
  // seed: invert the outer polynomial in c = cos(2 pi z), then take arccos
  cplx c = energy;
  if (v.kind == PotentialSpec::Kind::Polynomial) {
    for (int it = 0; it < 60; ++it) {
      cplx p = c, dp = 1.0, pk = c;
      for (std::size_t i = 0; i < v.lambda.size(); ++i) {
        dp += static_cast<double>(i + 2) * v.lambda[i] * pk;
        pk *= c;
        p += v.lambda[i] * pk;
      }
      const cplx step = (p - energy) / dp;
      c -= step;
      if (std::abs(step) < 1e-16) break;
    }
  }
  cplx z = std::acos(c) / kTwoPi;
  const double tol = 1e-14 * (1.0 + std::abs(energy));
  for (int it = 0; it < 100; ++it) {
    const cplx r = v.value(z) - energy;
    if (std::abs(r) <= tol) break;
    const cplx dv = v.derivative(z);
    if (std::abs(dv) == 0.0) break;
    z -= r / dv;
  }
  if (!(std::abs(v.value(z) - energy) <= 1e-10 * (1.0 + std::abs(energy))))
    throw EnergyOutOfRange("no preimage of the energy found near the real axis");
  // representative: Re in [0, 1/2], using periodicity and evenness
  z -= std::round(z.real());
  if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() < 0.0)) z = -z;
  if (z.real() == 0.5 && z.imag() < 0.0) z = cplx(0.5, -z.imag());
  if (std::abs(z.imag()) > 0.5 * v.R)
    throw EnergyOutOfRange("theta0 has |Im| above R/2");
  return z;
}

// ---------------------------------------------------------------------------

cplx DualModel::u(const Eigen::VectorXd& x) const {
  cplx s = 0.0;
  std::vector<int> n(d, -u_radius);
  do {
    const cplx p = hopping.phi(n);
    if (p == 0.0) continue;
    double a = 0.0;
    for (int c = 0; c < d; ++c) a += n[c] * x[c];
    s += p * std::polar(1.0, kTwoPi * a);
  } while (next_point(n, u_radius));
  return s;
}

LatticeOperator DualModel::assemble(int M, const Eigen::VectorXd& x) const {
  std::vector<Site> s;
  for (int l = -M; l <= M; ++l) s.push_back(Site::integer({l}));
  const SiteSet sites(std::move(s));
  LatticeOperator h(sites, sites);
  const Eigen::Index n = 2 * M + 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = static_cast<int>(i) - M;
    for (Eigen::Index j = 0; j < n; ++j) {
      const int k = static_cast<int>(i - j);
      if (std::abs(k) <= band_cut) h.mat(i, j) = vhat[k + band_cut];
    }
    h.mat(i, i) += epsilon * u(x + l * omega);
  }
  return h;
}

DualModel aubry_dual(const ModelConfig& m, int band_cut) {
  if (band_cut < 1) throw DomainError("band cut must be positive");
  auto coefficients = [&](int q) {
    std::vector<cplx> c(q, 0.0);
    std::vector<cplx> vals(q);
    for (int j = 0; j < q; ++j) vals[j] = m.potential.value(static_cast<double>(j) / q);
    for (int n = 0; n < q; ++n) {
      cplx s = 0.0;
      for (int j = 0; j < q; ++j) s += vals[j] * std::polar(1.0, -kTwoPi * n * j / q);
      c[n] = s / static_cast<double>(q);
    }
    return c;  // c[n] is the coefficient of index n mod q
  };
  int q = 64;
  while (q < 4 * band_cut + 8) q *= 2;
  std::vector<cplx> coarse = coefficients(q), fine;
  for (;;) {
    fine = coefficients(2 * q);
    double diff = 0.0;
    for (int n = -q / 2 + 1; n < q / 2; ++n)
      diff = std::max(diff, std::abs(coarse[(n + q) % q] - fine[(n + 2 * q) % (2 * q)]));
    q *= 2;
    coarse = fine;
    if (diff < 1e-13 || q > (1 << 16)) break;
  }
  double tail = 0.0;
  for (int n = band_cut + 1; n < q / 2; ++n)
    tail = std::max({tail, std::abs(coarse[n]), std::abs(coarse[q - n])});
  if (tail > 1e-12)
    throw BandCutTooSmall("Fourier tail beyond the cut is " + std::to_string(tail));

  DualModel dm;
  dm.band_cut = band_cut;
  dm.vhat.resize(2 * band_cut + 1);
  for (int n = -band_cut; n <= band_cut; ++n) dm.vhat[n + band_cut] = coarse[(n + q) % q];
  dm.epsilon = m.epsilon;
  dm.omega = m.omega;
  dm.hopping = m.hopping;
  dm.d = m.d;
  // u summed over a finite box; the power-law remainder is reported
  dm.u_radius = m.hopping.radius >= 0 ? m.hopping.radius : (m.d == 1 ? 256 : (m.d == 2 ? 32 : 8));
  for (const auto& [n, v] : m.hopping.table) dm.u_radius = std::max(dm.u_radius, static_cast<int>(sup_int(n)));
  if (m.hopping.radius < 0 && m.hopping.amplitude != 0.0)
    for (int k = dm.u_radius + 1; k < 100000; ++k)
      dm.u_truncation += std::abs(m.hopping.amplitude) *
                         (std::pow(2.0 * k + 1, m.d) - std::pow(2.0 * k - 1, m.d)) *
                         std::pow(1.0 + k, -m.hopping.alpha_decay);
  return dm;
}

} // namespace qp
