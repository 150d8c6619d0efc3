#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qplab/lattice.hpp"
#include "qplab/model.hpp"
#include "qplab/opalgebra.hpp"

namespace qp {

// H_Lambda(theta) = eps W_phi + v(theta + n.omega) (no energy shift).
LatticeOperator hamiltonian(const SiteSet& sites, const ModelConfig& m, double theta);

struct EigenSystem {
  SiteSet sites;
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns
  double residual = 0.0;     // max_q ||H v_q - E_q v_q||_2 / ||H||_2
  double gram = 0.0;         // ||V^* V - I||_max
  bool diagonal = false;     // input had no off-diagonal entries; vectors are exact
};

// Full decomposition of a Hermitian operator; throws WrongPath otherwise.
EigenSystem eigensolve(const LatticeOperator& h);

struct DecayFit {
  double exponent = std::numeric_limits<double>::quiet_NaN();  // +inf: no tail at all
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double tail_start = 0.0;
  Site peak;
  int points = 0;
};

// Least-squares fit of log M(r) = a - b log(1+r) for r >= tail_start, where
// M(r) = max_{||n - peak|| >= r} |psi(n)| is the outer envelope the decay
// bound controls. Envelope values below floor * max|psi| are skipped.
DecayFit fit_decay(const Eigen::VectorXcd& psi, const SiteSet& sites, double tail_start,
                   double floor);

struct ThetaClass {
  bool typical = true;  // ||2 theta + n.omega|| > A/||n||^tau1 on the window
  std::vector<int> witness;
  double worst_ratio = std::numeric_limits<double>::infinity();
};
ThetaClass classify_theta(double theta, const Eigen::VectorXd& omega, double A, double tau1,
                          int window);

struct LocalizationSample {
  double theta = 0.0;
  ThetaClass cls;
  std::vector<DecayFit> fits;
  double median_exponent = 0.0;
  double median_r2 = 0.0;
  double max_residual = 0.0;
};

struct LocalizationOptions {
  double A = 0.5;
  double tau1 = 1.5;
  int class_window = -1;  // -1: 10 N
  double tail_fraction = 0.2;
  double floor = 100.0 * std::numeric_limits<double>::epsilon();
};

std::vector<LocalizationSample> localization_scan(const ModelConfig& m, int N,
                                                  const std::vector<double>& thetas,
                                                  const LocalizationOptions& opt = {});

// max over inner of |psi(n) + eps sum T_inner^{-1}(n,n') W(n',n'') psi(n'')|,
// the outer sum running over outer \ inner.
double poisson_residual(const Eigen::VectorXcd& psi, double E, const SiteSet& inner,
                        const SiteSet& outer, const ModelConfig& m, double theta);

struct MomentPoint {
  double t = 0.0;
  double moment = 0.0;
  double unitarity_error = 0.0;
};
struct MomentResult {
  double sup = 0.0;
  double max_unitarity_error = 0.0;
  int grid_points = 0;
  std::vector<MomentPoint> series;
};

// sup over t in [0, t_max] of sum (1+||n||)^p |<e^{itH} delta_0, delta_n>|,
// refining a uniform grid until the sup moves by less than `rel_tol`.
MomentResult dynamics_moment(const EigenSystem& es, const Site& origin, double p, double t_max,
                             int initial_points = 256, double rel_tol = 0.01, int max_points = 1 << 15);

struct IdsCurve {
  int N = 0;
  std::vector<double> energies;
  std::vector<double> values;
};
IdsCurve ids_curve(const Eigen::VectorXd& eigenvalues, int N, const std::vector<double>& energies);

struct HolderFit {
  std::vector<double> eta;
  std::vector<double> modulus;  // sup_E N(E+eta) - N(E-eta)
  double exponent = 0.0;        // slope of log modulus against log eta
  double r2 = 0.0;
  double mu = 0.0;              // 1/2 - exponent, reported only
};
// Exact sup over E via a sliding window on the sorted eigenvalues.
HolderFit holder_modulus(const Eigen::VectorXd& sorted_eigenvalues, const std::vector<double>& eta);

struct DualRow {
  double x = 0.0;
  int M = 0;
  bool self_adjoint = true;
  double median_ipr = 0.0;
  double median_boundary_weight = 0.0;  // ||psi on |l| > M/2||_2, or singular-vector analogue
  double min_boundary_weight = 0.0;
};
std::vector<DualRow> dual_localization_proxy(const DualModel& dual, const std::vector<int>& Ms,
                                             const std::vector<double>& xs);

// Linear least squares y = a + b x; returns (b, r^2).
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

} // namespace qp
