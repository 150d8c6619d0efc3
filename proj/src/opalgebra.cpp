#include "qplab/opalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qplab/errors.hpp"
#include "qplab/rng.hpp"

namespace qp {

double wrap_phase(double p) {
  constexpr double pi = std::numbers::pi;
  p = std::remainder(p, 2.0 * pi);
  if (p <= -pi) p += 2.0 * pi;
  return p;
}

LogDet& LogDet::operator+=(const LogDet& o) {
  log_abs += o.log_abs;
  phase = wrap_phase(phase + o.phase);
  return *this;
}

LogDet operator+(LogDet a, const LogDet& b) { return a += b; }

double relative_gap(const LogDet& a, const LogDet& b) {
  if (std::isinf(a.log_abs) || std::isinf(b.log_abs))
    return (a.log_abs == b.log_abs) ? 0.0 : std::numeric_limits<double>::infinity();
  const cplx e = std::polar(std::exp(a.log_abs - b.log_abs), wrap_phase(a.phase - b.phase));
  return std::abs(e - 1.0);
}

double log10_sobolev_norm(const LatticeOperator& m, double alpha) {
  const DiagonalProfile p = diagonal_profile(m.mat, m.rows, m.cols);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(p.sup.size());
  for (std::size_t i = 0; i < p.sup.size(); ++i) {
    if (p.sup[i] <= 0.0) continue;
    const double t = std::log10(p.sup[i]) + alpha * std::log10(1.0 + p.radius[i]);
    terms.push_back(t);
    best = std::max(best, t);
  }
  if (terms.empty()) return best;
  double s = 0.0;
  for (double t : terms) s += std::pow(10.0, t - best);
  return best + std::log10(s);
}

double sobolev_norm(const Eigen::VectorXcd& psi, const SiteSet& support, double alpha) {
  if (static_cast<std::size_t>(psi.size()) != support.size())
    throw DomainError("vector length does not match its support");
  double s = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    s += std::abs(psi[i]) * std::pow(1.0 + sup_norm(support[i]), alpha);
  return s;
}

double row_norm(const LatticeOperator& m, Eigen::Index row, double alpha) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.n_cols(); ++j) {
    const double a = std::abs(m.mat(row, j));
    if (a > 0.0) s += a * std::pow(1.0 + sup_norm(m.rows[row] - m.cols[j]), alpha);
  }
  return s;
}

double tame_constant(int n, double alpha) {
  if (n < 1) throw DomainError("tame constant needs n >= 1");
  return std::pow(static_cast<double>(n), std::max(0.0, alpha - 1.0));
}

double rows_constant(int d, double alpha0) {
  if (d < 1) throw DomainError("dimension must be positive");
  if (!(alpha0 > d)) throw DomainError("rows constant needs alpha0 > d");
  // shell r >= 1 holds (2r+1)^d - (2r-1)^d sites; with m = r+1 this is a
  // polynomial in m, summed against zeta tails.
  double total = 1.0;
  for (int j = 0; j < d; ++j) {
    double binom = 1.0;
    for (int t = 0; t < j; ++t) binom = binom * (d - t) / (t + 1);
    const double c = binom * std::pow(2.0, j) *
                     (std::pow(-1.0, d - j) - std::pow(-3.0, d - j));
    if (c == 0.0) continue;
    total += c * (std::riemann_zeta(alpha0 - j) - 1.0);
  }
  return total;
}

double perturbation_constant(double alpha) {
  const double beta = std::max(0.0, alpha - 1.0);
  double sum = 0.0;
  for (long i = 1;; ++i) {
    const double term = std::pow(2.0 * i, beta) / std::pow(2.0, i - 1);
    sum += term;
    // term ratio ((i+1)/i)^beta / 2 decreases in i; once below 1 the tail is geometric
    const double ratio = std::pow((i + 1.0) / i, beta) / 2.0;
    if (ratio < 1.0) {
      const double next = term * ratio;
      if (next / (1.0 - ratio) < 1e-12 * sum) break;
    }
    if (i > 100000) break;
  }
  return tame_constant(2, alpha) * (3.0 + sum);
}

// ---------------------------------------------------------------------------

LatticeOperator compose(const LatticeOperator& a, const LatticeOperator& b) {
  if (!(a.cols == b.rows))
    throw CompositionError("column set of the left factor differs from row set of the right");
  return LatticeOperator(a.rows, b.cols, a.mat * b.mat);
}

static std::vector<Eigen::Index> indices_in(const SiteSet& sub, const SiteSet& full) {
  std::vector<Eigen::Index> idx;
  idx.reserve(sub.size());
  for (const auto& s : sub) {
    const long i = full.index_of(s);
    if (i < 0) throw DomainError("site set is not contained in the operator index set");
    idx.push_back(i);
  }
  return idx;
}

LatticeOperator restrict(const LatticeOperator& m, const SiteSet& rows, const SiteSet& cols) {
  const auto ri = indices_in(rows, m.rows);
  const auto ci = indices_in(cols, m.cols);
  return LatticeOperator(rows, cols, m.mat(ri, ci));
}

LatticeOperator band_filter(const LatticeOperator& m, double cut, bool keep_near) {
  LatticeOperator r = m;
  for (Eigen::Index j = 0; j < m.n_cols(); ++j)
    for (Eigen::Index i = 0; i < m.n_rows(); ++i) {
      const double k = sup_norm(m.rows[i] - m.cols[j]);
      const bool near = k < cut;
      const bool far = k > cut;
      if ((keep_near && !near) || (!keep_near && !far)) r.mat(i, j) = 0.0;
    }
  return r;
}

static LogDet lu_log_det(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
  LogDet ld;
  const auto& u = lu.matrixLU();
  double phase = lu.permutationP().determinant() < 0 ? std::numbers::pi : 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double a = std::abs(u(i, i));
    if (a == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
    ld.log_abs += std::log(a);
    phase += std::arg(u(i, i));
  }
  ld.phase = wrap_phase(phase);
  return ld;
}

LogDet log_det(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw DomainError("determinant of a non-square matrix");
  if (m.rows() == 0) return {};
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  return lu_log_det(lu);
}

Inverse invert(const LatticeOperator& m) {
  if (!m.square()) throw DomainError("inverse of an operator with distinct row and column sets");
  const Eigen::Index n = m.n_rows();
  Inverse r;
  if (n == 0) {
    r.inverse = m;
    r.cond = 1.0;
    return r;
  }
  if (!m.mat.allFinite()) throw NearResonance("non-finite entries", 0.0);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m.mat);
  const auto& u = lu.matrixLU();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) min_pivot = std::min(min_pivot, std::abs(u(i, i)));
  const double scale = m.mat.cwiseAbs().maxCoeff();
  r.min_pivot = min_pivot;
  if (!(min_pivot > n * std::numeric_limits<double>::epsilon() * scale))
    throw NearResonance("matrix singular to working precision", min_pivot);
  r.inverse = LatticeOperator(m.cols, m.rows, lu.inverse());
  if (!r.inverse.mat.allFinite()) throw NearResonance("inverse overflowed", min_pivot);
  r.log_det = lu_log_det(lu);
  const double n1 = m.mat.cwiseAbs().colwise().sum().maxCoeff();
  const double i1 = r.inverse.mat.cwiseAbs().colwise().sum().maxCoeff();
  r.cond = n1 * i1;
  return r;
}

LatticeOperator adjugate(const LatticeOperator& m, int cap) {
  if (!m.square()) throw DomainError("adjugate of a non-square operator");
  const Eigen::Index n = m.n_rows();
  if (n > cap)
    throw ComplexityRefusal("adjugate size " + std::to_string(n) + " exceeds cap " +
                            std::to_string(cap));
  LatticeOperator adj(m.cols, m.rows);
  if (n == 0) return adj;
  if (n == 1) {
    adj.mat(0, 0) = 1.0;
    return adj;
  }
  Eigen::MatrixXcd minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index a = 0, ra = 0; a < n; ++a) {
        if (a == i) continue;
        for (Eigen::Index b = 0, cb = 0; b < n; ++b) {
          if (b == j) continue;
          minor(ra, cb++) = m.mat(a, b);
        }
        ++ra;
      }
      const cplx cof = ((i + j) % 2 ? -1.0 : 1.0) * minor.partialPivLu().determinant();
      adj.mat(j, i) = cof;
    }
  return adj;
}

SchurData schur(const LatticeOperator& m, const SiteSet& inner) {
  if (!m.square()) throw DomainError("Schur complement of a non-square operator");
  if (!inner.subset_of(m.rows)) throw DomainError("inner set is not inside the operator index set");
  SchurData s;
  s.inner = inner;
  s.outer = set_difference(m.rows, inner);
  s.a_block = restrict(m, s.outer, s.outer);
  s.b_block = restrict(m, s.outer, s.inner);
  s.c_block = restrict(m, s.inner, s.outer);
  s.d_block = restrict(m, s.inner, s.inner);
  if (s.outer.empty()) {
    s.a_inverse = s.a_block;
    s.complement = s.d_block;
  } else {
    Inverse ai;
    try {
      ai = invert(s.a_block);
    } catch (const NearResonance& e) {
      throw SchurDegenerate("outer block is singular", e.pivot);
    }
    s.a_inverse = ai.inverse;
    s.log_det_a = ai.log_det;
    s.complement = LatticeOperator(s.inner, s.inner,
                                   s.d_block.mat - s.c_block.mat * (ai.inverse.mat * s.b_block.mat));
  }
  s.log_det_s = log_det(s.complement.mat);
  return s;
}

LatticeOperator schur_inverse(const SchurData& s) {
  const Inverse si = invert(s.complement);
  const Eigen::MatrixXcd& ai = s.a_inverse.mat;
  const Eigen::MatrixXcd& sinv = si.inverse.mat;
  const Eigen::MatrixXcd aib = ai * s.b_block.mat;
  const Eigen::MatrixXcd cai = s.c_block.mat * ai;
  SiteSet all = set_union(s.outer, s.inner);
  LatticeOperator g(all, all);
  const auto oi = indices_in(s.outer, all);
  const auto ii = indices_in(s.inner, all);
  g.mat(oi, oi) = ai + aib * sinv * cai;
  g.mat(oi, ii) = -aib * sinv;
  g.mat(ii, oi) = -sinv * cai;
  g.mat(ii, ii) = sinv;
  return g;
}

LatticeOperator perturb_left_inverse(const LatticeOperator& n, const LatticeOperator& p) {
  if (!(n.cols == p.rows) || !(p.cols == n.rows))
    throw CompositionError("perturbation shape does not match the left inverse");
  const double bound = sobolev_norm(n, 0.0) * sobolev_norm(p, 0.0);
  if (bound > 0.5)
    throw PerturbationOutOfRange("||N||_0 ||P||_0 = " + std::to_string(bound) + " exceeds 1/2");
  const Eigen::Index k = n.n_rows();
  const Eigen::MatrixXcd ip = Eigen::MatrixXcd::Identity(k, k) + n.mat * p.mat;
  return LatticeOperator(n.rows, n.cols, ip.partialPivLu().solve(n.mat));
}

std::vector<NormAuditRow> audit_norm_inequalities(const LatticeOperator& m,
                                                  const std::vector<double>& alphas, int cut,
                                                  double alpha0, unsigned long long seed,
                                                  double rel_slack) {
  std::vector<NormAuditRow> out;
  if (!std::is_sorted(alphas.begin(), alphas.end()))
    throw DomainError("audit exponents must be sorted ascending");
  const int d = std::max(1, m.rows.dim());
  if (alpha0 < 0.0) alpha0 = d + 1.0;
  auto row = [&](std::string name, double a, double lhs, double rhs) {
    out.push_back({std::move(name), a, lhs, rhs, lhs <= rhs * (1.0 + rel_slack)});
  };

  const LatticeOperator far = band_filter(m, cut, false);
  const LatticeOperator near = band_filter(m, cut, true);
  const double base = 1.0 + cut;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t j = i + 1; j < alphas.size(); ++j) {
      const double ap = alphas[i], a = alphas[j];
      const std::string tag = "(a'=" + std::to_string(ap) + ")";
      row("smo1" + tag, a, sobolev_norm(far, ap), std::pow(base, -(a - ap)) * sobolev_norm(far, a));
      row("smo2" + tag, a, sobolev_norm(near, a), std::pow(base, a - ap) * sobolev_norm(near, ap));
    }

  const double b1 = rows_constant(d, alpha0);
  for (double a : alphas) {
    double mx = 0.0;
    for (Eigen::Index k = 0; k < m.n_rows(); ++k) mx = std::max(mx, row_norm(m, k, a + alpha0));
    row("re", a, sobolev_norm(m, a), b1 * mx);
  }

  Rng rng(seed);
  for (double a : alphas) {
    const int n = static_cast<int>(rng.integer(1, 8));
    double s = 0.0, sp = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.uniform(0.0, 10.0);
      s += x;
      sp += std::pow(x, a);
    }
    row("kn", a, std::pow(s, a), tame_constant(n, a) * sp);
  }
  return out;
}

} // namespace qp
