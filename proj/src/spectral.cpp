#include "qplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qplab/errors.hpp"
#include "qplab/parallel.hpp"

namespace qp {

namespace {

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double hermitian_defect(const Eigen::MatrixXcd& h) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool is_diagonal(const Eigen::MatrixXcd& h) {
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      if (i != j && h(i, j) != 0.0) return false;
  return true;
}

} // namespace

LatticeOperator hamiltonian(const SiteSet& sites, const ModelConfig& m, double theta) {
  ModelConfig h = m;
  h.energy = 0.0;
  return assemble(sites, h, cplx(theta, 0.0));
}

EigenSystem eigensolve(const LatticeOperator& h) {
  if (!h.square()) throw DomainError("eigensolve needs a square operator");
  if (hermitian_defect(h.mat) > 1e-12) throw WrongPath("operator is not self-adjoint");
  EigenSystem es;
  es.sites = h.rows;
  const Eigen::Index n = h.n_rows();
  if (n == 0) return es;
  if (is_diagonal(h.mat)) {
    // exact: coordinate vectors, sorted diagonal
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return h.mat(a, a).real() < h.mat(b, b).real(); });
    es.values.resize(n);
    es.vectors = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index q = 0; q < n; ++q) {
      es.values[q] = h.mat(order[q], order[q]).real();
      es.vectors(order[q], q) = 1.0;
    }
    es.diagonal = true;
    return es;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.mat);
  if (solver.info() != Eigen::Success) throw DomainError("eigensolver did not converge");
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();
  const double hn = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::MatrixXcd r = h.mat * es.vectors - es.vectors * es.values.asDiagonal();
  es.residual = r.colwise().norm().maxCoeff() / hn;
  es.gram = (es.vectors.adjoint() * es.vectors - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  return es;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double b = sxy / sxx;
  const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {b, r2};
}

DecayFit fit_decay(const Eigen::VectorXcd& psi, const SiteSet& sites, double tail_start, double floor) {
  DecayFit f;
  f.tail_start = tail_start;
  Eigen::Index peak = 0;
  const double top = psi.cwiseAbs().maxCoeff(&peak);
  f.peak = sites[static_cast<std::size_t>(peak)];
  // outer envelope max_{||n - peak|| >= r} |psi(n)|, one point per occurring radius
  std::map<int, double> shell;  // doubled radius -> largest entry on that shell
  for (std::size_t i = 0; i < sites.size(); ++i) {
    double& m = shell[sup_twice(sites[i] - f.peak)];
    m = std::max(m, std::abs(psi[static_cast<Eigen::Index>(i)]));
  }
  std::vector<double> x, y;
  bool any_tail = false;
  double env = 0.0;
  for (auto it = shell.rbegin(); it != shell.rend(); ++it) {
    env = std::max(env, it->second);
    const double r = 0.5 * it->first;
    if (r < tail_start) break;
    any_tail = true;
    if (env <= floor * top) continue;
    x.push_back(std::log1p(r));
    y.push_back(std::log(env));
  }
  f.points = static_cast<int>(x.size());
  if (any_tail && x.empty()) {
    f.exponent = std::numeric_limits<double>::infinity();  // tail entirely below roundoff
    return f;
  }
  if (x.size() < 3) return f;
  const auto [b, r2] = linear_fit(x, y);
  f.exponent = -b;
  f.r2 = r2;
  return f;
}

ThetaClass classify_theta(double theta, const Eigen::VectorXd& omega, double A, double tau1,
                          int window) {
  ThetaClass c;
  const int d = static_cast<int>(omega.size());
  std::vector<int> n(d, -window);
  for (;;) {
    int r = 0;
    double x = 2.0 * theta;
    for (int k = 0; k < d; ++k) r = std::max(r, std::abs(n[k])), x += n[k] * omega[k];
    if (r > 0) {
      const double ratio = torus_dist(x) * std::pow(static_cast<double>(r), tau1) / A;
      if (ratio < c.worst_ratio) {
        c.worst_ratio = ratio;
        c.witness = n;
      }
    }
    int k = d - 1;
    while (k >= 0 && n[k] == window) n[k--] = -window;
    if (k < 0) break;
    ++n[k];
  }
  c.typical = c.worst_ratio > 1.0;
  return c;
}

std::vector<LocalizationSample> localization_scan(const ModelConfig& m, int N,
                                                  const std::vector<double>& thetas,
                                                  const LocalizationOptions& opt) {
  const SiteSet sites = box(Site::zero(m.d), N);
  int window = opt.class_window >= 0 ? opt.class_window : 10 * N;
  // keep the arithmetic scan below ~1e6 points in higher dimension
  while (window > 1 && std::pow(2.0 * window + 1.0, m.d) > 1e6) window /= 2;
  std::vector<LocalizationSample> out(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t i) {
    LocalizationSample& s = out[i];
    s.theta = thetas[i];
    s.cls = classify_theta(s.theta, m.omega, opt.A, opt.tau1, window);
    const EigenSystem es = eigensolve(hamiltonian(sites, m, s.theta));
    s.max_residual = es.residual;
    std::vector<double> ex, r2;
    for (Eigen::Index q = 0; q < es.vectors.cols(); ++q) {
      s.fits.push_back(fit_decay(es.vectors.col(q), sites, opt.tail_fraction * N, opt.floor));
      ex.push_back(s.fits.back().exponent);
      r2.push_back(s.fits.back().r2);
    }
    s.median_exponent = median(ex);
    s.median_r2 = median(r2);
  });
  return out;
}

double poisson_residual(const Eigen::VectorXcd& psi, double E, const SiteSet& inner,
                        const SiteSet& outer, const ModelConfig& m, double theta) {
  if (!inner.subset_of(outer)) throw DomainError("inner set must lie inside the outer set");
  if (psi.size() != static_cast<Eigen::Index>(outer.size())) throw DomainError("psi must live on the outer set");
  const SiteSet rest = set_difference(outer, inner);
  const LatticeOperator h = hamiltonian(outer, m, theta);
  std::vector<Eigen::Index> ii, rr;
  for (const auto& s : inner) ii.push_back(outer.index_of(s));
  for (const auto& s : rest) rr.push_back(outer.index_of(s));
  LatticeOperator t(inner, inner, h.mat(ii, ii));
  t.mat.diagonal().array() -= E;
  const Inverse inv = invert(t);
  Eigen::VectorXcd psi_rest(static_cast<Eigen::Index>(rr.size()));
  for (std::size_t j = 0; j < rr.size(); ++j) psi_rest[j] = psi[rr[j]];
  const Eigen::VectorXcd rhs = -(inv.inverse.mat * (h.mat(ii, rr) * psi_rest));
  double res = 0.0;
  for (std::size_t i = 0; i < ii.size(); ++i) res = std::max(res, std::abs(psi[ii[i]] - rhs[i]));
  return res;
}

MomentResult dynamics_moment(const EigenSystem& es, const Site& origin, double p, double t_max,
                             int initial_points, double rel_tol, int max_points) {
  const long o = es.sites.index_of(origin);
  if (o < 0) throw DomainError("origin is not in the box");
  const Eigen::Index n = static_cast<Eigen::Index>(es.sites.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = std::pow(1.0 + sup_norm(es.sites[i] - origin), p);
  const Eigen::VectorXcd c = es.vectors.row(o).adjoint();  // <phi_q, delta_0>

  auto eval = [&](double t) {
    MomentPoint mp;
    mp.t = t;
    if (es.diagonal) {
      // coordinate eigenvectors: |amplitude| stays delta_{n,0} for all t
      mp.moment = w[o];
      return mp;
    }
    Eigen::VectorXcd ph(n);
    for (Eigen::Index q = 0; q < n; ++q) ph[q] = std::polar(1.0, t * es.values[q]) * c[q];
    const Eigen::VectorXcd a = es.vectors * ph;
    mp.moment = (a.cwiseAbs().array() * w.array()).sum();
    mp.unitarity_error = std::abs(a.squaredNorm() - 1.0);
    return mp;
  };

  MomentResult r;
  int K = std::max(2, initial_points);
  std::vector<MomentPoint> pts(K + 1);
  parallel_for(pts.size(), [&](std::size_t j) { pts[j] = eval(t_max * j / K); });
  auto sup_of = [](const std::vector<MomentPoint>& v) {
    double s = 0.0;
    for (const auto& x : v) s = std::max(s, x.moment);
    return s;
  };
  double sup = sup_of(pts);
  while (2 * K <= max_points) {
    std::vector<MomentPoint> next(2 * K + 1);
    for (int j = 0; j <= K; ++j) next[2 * j] = pts[j];
    parallel_for(static_cast<std::size_t>(K), [&](std::size_t j) {
      next[2 * j + 1] = eval(t_max * (2.0 * j + 1) / (2.0 * K));
    });
    pts = std::move(next);
    K *= 2;
    const double s2 = sup_of(pts);
    const bool stable = std::abs(s2 - sup) <= rel_tol * sup;
    sup = s2;
    if (stable) break;
  }
  r.sup = sup;
  r.grid_points = K + 1;
  for (const auto& x : pts) r.max_unitarity_error = std::max(r.max_unitarity_error, x.unitarity_error);
  r.series = std::move(pts);
  return r;
}

IdsCurve ids_curve(const Eigen::VectorXd& eigenvalues, int N, const std::vector<double>& energies) {
  std::vector<double> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(ev.begin(), ev.end());
  IdsCurve c;
  c.N = N;
  c.energies = energies;
  for (double e : energies) {
    const auto k = std::upper_bound(ev.begin(), ev.end(), e) - ev.begin();
    c.values.push_back(ev.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(ev.size()));
  }
  return c;
}

HolderFit holder_modulus(const Eigen::VectorXd& sorted_eigenvalues, const std::vector<double>& eta) {
  std::vector<double> ev(sorted_eigenvalues.data(), sorted_eigenvalues.data() + sorted_eigenvalues.size());
  std::sort(ev.begin(), ev.end());
  const double n = static_cast<double>(ev.size());
  HolderFit h;
  std::vector<double> lx, ly;
  for (double e : eta) {
    // largest number of eigenvalues in a half-open window (a, a + 2 eta]
    std::size_t best = 0, j = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      while (ev[j] <= ev[i] - 2.0 * e) ++j;
      best = std::max(best, i - j + 1);
    }
    h.eta.push_back(e);
    h.modulus.push_back(n > 0 ? best / n : 0.0);
    if (best > 0) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(best / n));
    }
  }
  const auto [b, r2] = linear_fit(lx, ly);
  h.exponent = b;
  h.r2 = r2;
  h.mu = 0.5 - b;
  return h;
}

std::vector<DualRow> dual_localization_proxy(const DualModel& dual, const std::vector<int>& Ms,
                                             const std::vector<double>& xs) {
  std::vector<DualRow> rows(xs.size() * Ms.size());
  parallel_for(rows.size(), [&](std::size_t idx) {
    const double x = xs[idx / Ms.size()];
    const int M = Ms[idx % Ms.size()];
    DualRow& r = rows[idx];
    r.x = x;
    r.M = M;
    const LatticeOperator h = dual.assemble(M, Eigen::VectorXd::Constant(dual.d, x));
    Eigen::MatrixXcd vecs;
    if (hermitian_defect(h.mat) <= 1e-12) {
      vecs = eigensolve(h).vectors;
    } else {
      r.self_adjoint = false;
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(h.mat, Eigen::ComputeFullV);
      vecs = svd.matrixV();
    }
    std::vector<double> ipr, bw;
    for (Eigen::Index q = 0; q < vecs.cols(); ++q) {
      double s4 = 0.0, out = 0.0;
      for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
        const double a2 = std::norm(vecs(i, q));
        s4 += a2 * a2;
        if (2 * std::abs(static_cast<int>(i) - M) > M) out += a2;
      }
      ipr.push_back(s4);
      bw.push_back(std::sqrt(out));
    }
    r.median_ipr = median(ipr);
    r.median_boundary_weight = median(bw);
    r.min_boundary_weight = *std::min_element(bw.begin(), bw.end());
  });
  return rows;
}

} // namespace qp
