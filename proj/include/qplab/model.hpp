#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qplab/config.hpp"
#include "qplab/lattice.hpp"
#include "qplab/opalgebra.hpp"

namespace qp {

// ||x|| distance to the nearest integer.
double torus_dist(double x);
// sqrt(||Re z||^2 + (Im z)^2) on C/Z.
double torus_norm(cplx z);

// Even, 1-periodic potential analytic on the strip |Im z| <= R.
struct PotentialSpec {
  enum class Kind { Cosine, Polynomial, CosinePlusEven };
  Kind kind = Kind::Cosine;
  double R = 0.1;
  std::vector<double> lambda;  // Polynomial: lambda[k-2] multiplies cos^k, k >= 2
  double eps_f = 0.0;          // CosinePlusEven: v = cos + eps_f f
  std::vector<double> f_cos;   // f(z) = sum_m f_cos[m] cos(2 pi m z), m >= 0

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  // sup of |v| over the strip, attained on its boundary
  double sup_norm() const;
  // sum k |lambda_k|; must stay below 1 for the polynomial family
  double lambda_weight() const;
  void validate() const;
};

// phi(n) = amplitude (1+||n||)^{-alpha_decay} for 0 < ||n|| <= radius,
// with explicit table entries taking precedence.
struct HoppingSpec {
  double alpha_decay = 6.0;
  double alpha0 = 2.0;
  double alpha1 = 1.0;
  double amplitude = 1.0;
  int radius = -1;  // -1: no truncation
  std::map<std::vector<int>, cplx> table;

  cplx phi(const std::vector<int>& n) const;
  bool has_power_law() const { return amplitude != 0.0; }
};

struct ModelConfig {
  int d = 1;
  double epsilon = 1e-3;
  cplx theta = 0.0;
  double energy = 0.0;
  Eigen::VectorXd omega;
  double tau = 2.0;
  double gamma = 0.1;
  PotentialSpec potential;
  HoppingSpec hopping;

  // constraint violations that are reported rather than refused
  std::vector<std::string> flags() const;
};

ModelConfig model_from_config(const Config& cfg);

struct PotentialCertificate {
  double kappa1 = 0.0;  // inf |v(z)-v(z')| / (||z-z'|| ||z+z'||)
  double kappa2 = 0.0;  // sup of the same ratio
  long pairs = 0;
};

// Grid estimate of the cosine-type constants over the strip. Pairs closer
// than one grid cell to the diagonal or antidiagonal are skipped.
PotentialCertificate certify_potential(const PotentialSpec& v, int grid = 64);

struct DiophantineCertificate {
  bool pass = true;
  std::vector<int> worst;  // n attaining the smallest ||n.omega|| ||n||^tau / gamma
  double worst_ratio = 0.0;
};

// Checks ||n.omega|| > gamma / ||n||^tau for 0 < ||n|| <= n_max.
DiophantineCertificate certify_diophantine(const Eigen::VectorXd& omega, double gamma, double tau,
                                           int n_max);

// T(z) restricted to `sites`: v(z + n.omega) - E on the diagonal and eps phi(n-n')
// off it. Sites may be half-integer but must share one coset.
LatticeOperator assemble(const SiteSet& sites, const ModelConfig& m, cplx z);
inline LatticeOperator assemble_T(const SiteSet& sites, const ModelConfig& m) {
  return assemble(sites, m, m.theta);
}
// d/dz of the diagonal: v'(z + n.omega).
Eigen::VectorXcd diagonal_derivative(const SiteSet& sites, const ModelConfig& m, cplx z);

// Root of v(theta0) = E with Re theta0 in [0, 1/2] and |Im theta0| <= R/2.
cplx solve_theta0(const PotentialSpec& v, double energy);

struct DualModel {
  int band_cut = 0;
  std::vector<cplx> vhat;  // vhat[n + band_cut] for |n| <= band_cut
  double epsilon = 0.0;
  Eigen::VectorXd omega;
  HoppingSpec hopping;
  int d = 1;
  int u_radius = 0;        // hopping support summed into u
  double u_truncation = 0.0;

  // u(x) = sum_n phi(n) e^{2 pi i n.x}
  cplx u(const Eigen::VectorXd& x) const;
  // (W_vhat + eps u(x + l omega) delta) on l in [-M, M]
  LatticeOperator assemble(int M, const Eigen::VectorXd& x) const;
};

// Fourier coefficients of v by trapezoid quadrature; throws BandCutTooSmall
// when coefficients beyond the cut exceed 1e-12.
DualModel aubry_dual(const ModelConfig& m, int band_cut);

} // namespace qp
