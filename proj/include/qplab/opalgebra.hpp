#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qplab/lattice.hpp"

namespace qp {

using cplx = std::complex<double>;

// Finite operator R_rows M R_cols with entries in canonical site order.
template <typename Scalar_>
struct BasicOperator {
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SiteSet rows;
  SiteSet cols;
  Matrix mat;

  BasicOperator() = default;
  BasicOperator(SiteSet r, SiteSet c, Matrix m) : rows(std::move(r)), cols(std::move(c)), mat(std::move(m)) {}
  BasicOperator(SiteSet r, SiteSet c)
      : rows(std::move(r)), cols(std::move(c)), mat(Matrix::Zero(rows.size(), cols.size())) {}

  static BasicOperator identity(const SiteSet& s) {
    return BasicOperator(s, s, Matrix::Identity(s.size(), s.size()));
  }

  Eigen::Index n_rows() const { return mat.rows(); }
  Eigen::Index n_cols() const { return mat.cols(); }
  bool square() const { return rows == cols; }
};

using LatticeOperator = BasicOperator<cplx>;

// Log-magnitude / phase form of a complex number (determinants).
struct LogDet {
  double log_abs = 0.0;  // natural log of |det|; -inf for singular
  double phase = 0.0;    // in (-pi, pi]

  LogDet& operator+=(const LogDet& o);
  cplx value() const { return std::polar(std::exp(log_abs), phase); }
};
LogDet operator+(LogDet a, const LogDet& b);
// |exp(a - b) - 1|: relative discrepancy between two log determinants.
double relative_gap(const LogDet& a, const LogDet& b);
double wrap_phase(double p);

// ---------------------------------------------------------------------------
// Weighted l1 norm over diagonals: sum_k (sup_l |M(k+l,l)|)(1+||k||)^alpha.
// The entry at (i,j) sits on the diagonal k = rows[i] - cols[j].

struct DiagonalProfile {
  std::vector<double> sup;    // largest entry magnitude on each occurring diagonal
  std::vector<double> radius; // ||k|| of that diagonal
};

template <typename Derived>
DiagonalProfile diagonal_profile(const Eigen::MatrixBase<Derived>& m, const SiteSet& rows,
                                 const SiteSet& cols);

template <typename Derived>
double sobolev_norm(const Eigen::MatrixBase<Derived>& m, const SiteSet& rows, const SiteSet& cols,
                    double alpha) {
  const DiagonalProfile p = diagonal_profile(m, rows, cols);
  double s = 0.0;
  for (std::size_t i = 0; i < p.sup.size(); ++i)
    if (p.sup[i] > 0.0) s += p.sup[i] * std::pow(1.0 + p.radius[i], alpha);
  return s;
}

template <typename Scalar>
double sobolev_norm(const BasicOperator<Scalar>& m, double alpha) {
  return sobolev_norm(m.mat, m.rows, m.cols, alpha);
}

// log10 of the norm; finite for weights that overflow a double.
double log10_sobolev_norm(const LatticeOperator& m, double alpha);

// ||psi||_alpha = sum |psi(k)| (1+||k||)^alpha over the sites of `support`.
double sobolev_norm(const Eigen::VectorXcd& psi, const SiteSet& support, double alpha);

// ||row k||_alpha of the single-row restriction R_{k} M.
double row_norm(const LatticeOperator& m, Eigen::Index row, double alpha);

// K(n, alpha) = n^{max(0, alpha-1)}
double tame_constant(int n, double alpha);
// sum_{k in Z^d} (1+||k||)^{-alpha0}, alpha0 > d
double rows_constant(int d, double alpha0);
// K(2,a) (3 + sum_{i>=1} K(2i,a)/2^{i-1}), series summed to a 1e-12 tail
double perturbation_constant(double alpha);

// ---------------------------------------------------------------------------

LatticeOperator compose(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator restrict(const LatticeOperator& m, const SiteSet& rows, const SiteSet& cols);
// Keep entries with ||row - col|| > cut (upper=false) or < cut (upper=true).
LatticeOperator band_filter(const LatticeOperator& m, double cut, bool keep_near);

struct Inverse {
  LatticeOperator inverse;
  LogDet log_det;
  double cond = 0.0;       // ||M||_1 ||M^{-1}||_1
  double min_pivot = 0.0;
};

// Dense LU with partial pivoting. Throws NearResonance when a pivot falls
// below working precision relative to the largest entry.
Inverse invert(const LatticeOperator& m);
LogDet log_det(const Eigen::MatrixXcd& m);
inline LogDet log_det(const LatticeOperator& m) { return log_det(m.mat); }

// Classical adjugate by cofactors. Refuses matrices larger than `cap`.
LatticeOperator adjugate(const LatticeOperator& m, int cap = 12);

struct SchurData {
  SiteSet outer, inner;
  LatticeOperator a_block, b_block, c_block, d_block;
  LatticeOperator a_inverse;
  LatticeOperator complement;  // D - C A^{-1} B
  LogDet log_det_a, log_det_s;
};

// Partition into outer (A) and inner (D) indices and form the complement.
SchurData schur(const LatticeOperator& m, const SiteSet& inner);
// Reassemble M^{-1} from the partition by the block inversion formula.
LatticeOperator schur_inverse(const SchurData& s);

// N_P = (I + N P)^{-1} N for a left inverse N of M; requires ||N||_0 ||P||_0 <= 1/2.
LatticeOperator perturb_left_inverse(const LatticeOperator& n, const LatticeOperator& p);

struct NormAuditRow {
  std::string inequality;
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// Smoothing (both band halves), rows estimate and the power inequality on
// pseudo-random nonnegative vectors drawn from `seed`.
std::vector<NormAuditRow> audit_norm_inequalities(const LatticeOperator& m,
                                                  const std::vector<double>& alphas, int cut,
                                                  double alpha0 = -1.0, unsigned long long seed = 0,
                                                  double rel_slack = 1e-12);

// ---------------------------------------------------------------------------

template <typename Derived>
DiagonalProfile diagonal_profile(const Eigen::MatrixBase<Derived>& m, const SiteSet& rows,
                                 const SiteSet& cols) {
  DiagonalProfile p;
  if (rows.empty() || cols.empty()) return p;
  const int d = rows.dim();
  // bounding box of doubled offsets, dense bucket per offset
  std::vector<int> lo(d), ext(d);
  for (int c = 0; c < d; ++c) {
    int rmin = rows[0].twice[c], rmax = rmin, cmin = cols[0].twice[c], cmax = cmin;
    for (const auto& s : rows) rmin = std::min(rmin, s.twice[c]), rmax = std::max(rmax, s.twice[c]);
    for (const auto& s : cols) cmin = std::min(cmin, s.twice[c]), cmax = std::max(cmax, s.twice[c]);
    lo[c] = rmin - cmax;
    ext[c] = rmax - cmin - lo[c] + 1;
  }
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= static_cast<std::size_t>(ext[c]);
  std::vector<double> bucket(total, 0.0);
  auto key = [&](Eigen::Index i, Eigen::Index j) {
    std::size_t k = 0;
    for (int c = 0; c < d; ++c) k = k * ext[c] + (rows[i].twice[c] - cols[j].twice[c] - lo[c]);
    return k;
  };
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      double& b = bucket[key(i, j)];
      if (a > b) b = a;
    }
  std::vector<int> off(d);
  for (std::size_t k = 0; k < total; ++k) {
    if (bucket[k] == 0.0) continue;
    std::size_t r = k;
    int sup2 = 0;
    for (int c = d - 1; c >= 0; --c) {
      const int o = static_cast<int>(r % ext[c]) + lo[c];
      r /= ext[c];
      sup2 = std::max(sup2, std::abs(o));
    }
    p.sup.push_back(bucket[k]);
    p.radius.push_back(0.5 * sup2);
  }
  return p;
}

} // namespace qp
