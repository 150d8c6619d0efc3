#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qplab/lattice.hpp"
#include "qplab/model.hpp"
#include "qplab/opalgebra.hpp"

namespace qp {

// ---------------------------------------------------------------------------
// Scale schedule. delta is always carried as log10; N as a double because
// realistic scales overflow every integer type after two steps.

enum class ScaleMode { Paper, Exploration };

struct ScaleEntry {
  int s = 0;
  double N = 0.0;  // N_0 is unused and stored as 0
  double log10_delta = 0.0;
};

struct ScaleSchedule {
  ScaleMode mode = ScaleMode::Exploration;
  double gamma = 1.0;
  double tau = 2.0;
  std::vector<ScaleEntry> entries;

  int s_max() const { return static_cast<int>(entries.size()) - 1; }
  const ScaleEntry& at(int s) const;
  double delta(int s) const;  // 10^log10_delta, may underflow to 0
};

// log10 delta_0 = log10(eps0) / 30
double log10_delta0_from_epsilon0(double epsilon0);
// N_{s+1} = floor((gamma/delta_s)^{1/(30 tau)}), gamma/delta_{s+1} = (gamma/delta_s)^30
ScaleSchedule paper_schedule(double gamma, double tau, double log10_delta0, int s_max);
// User table: N for s = 1..S, log10 delta for s = 0..S.
ScaleSchedule exploration_schedule(double gamma, double tau, const std::vector<double>& N,
                                   const std::vector<double>& log10_delta);

// ---------------------------------------------------------------------------

enum class CaseTag { Initial, C1, C2 };
const char* to_string(CaseTag c);

struct RootCertificate {
  cplx theta = 0.0;
  cplx center = 0.0;
  double contour_radius = 0.0;
  int winding = 0;
  double residual = 0.0;    // |f/f'| at theta for f = det M
  bool paired = false;      // -theta certified as a root of the same determinant
  int quadrature_points = 0;
  std::string alternative;  // C2 only: which half-shifted disc was used
};

struct BlockTriple {
  SiteSet omega, omega_tilde, a;  // clipped to the working window
  SiteSet omega_full, omega_tilde_full;
  bool truncated = false;
};

struct GenerationState {
  int s = 0;
  CaseTag case_tag = CaseTag::Initial;
  Site l;       // l_{s-1}, zero in C1
  Site coset;   // (1/2) sum of all l_i; P_s lives in coset + Z^d
  cplx theta_s = 0.0;
  double N = 0.0;
  double log10_delta = 0.0;

  SiteSet P, Q, Qplus, Qminus, Qtilde_plus, Qtilde_minus;
  std::map<Site, BlockTriple> blocks;
  SiteSet omega_shape, omega_tilde_shape, a_shape;  // common translates, centred at 0
  double zeta = 0.0, zeta_tilde = 0.0;
  bool truncated = false;
  std::optional<RootCertificate> root;
};

// Sites of coset + Z^d whose sup norm is at most r (centred at the origin).
SiteSet coset_ball(const Site& coset, double r);

// Q^{+-}_s, Q~^{+-}_s for the phase theta over P_s.
void classify_resonances(GenerationState& g, double theta, const Eigen::VectorXd& omega);

GenerationState initial_generation(const ModelConfig& m, const SiteSet& lambda, double theta,
                                   cplx theta0, double log10_delta0);

struct CaseDecision {
  CaseTag tag = CaseTag::C1;
  Site l;
  Site i, j;        // realizing pair in C2
  double distance;  // dist(Q~^-, Q^+), +inf when either is empty
};
CaseDecision classify_case(const GenerationState& g, double N_next);

// Roots depend only on the translated shape in case C1, so sweeps over many
// phases share them. Keyed on shape, case and the previous root.
struct RootCache {
  std::mutex mu;
  std::map<std::string, RootCertificate> roots;
};

// Generation s+1 from generation s. Blocks are translations of common
// symmetric shapes, enlarged to absorb all earlier blocks they meet and
// clipped to `lambda`. Throws GeometryViolation when separation or the
// symmetric fixpoint fails.
GenerationState build_generation(const std::vector<GenerationState>& history,
                                 const ScaleSchedule& sched, const SiteSet& lambda,
                                 const ModelConfig& m, double theta, RootCache* cache = nullptr);

// T on the translated shape with z in place of theta.
LatticeOperator translated_operator(const SiteSet& shape, const ModelConfig& m, cplx z);

// Root(s) of det M_{s+1}(z) by the argument principle on the case disc,
// refined by Newton on the log-determinant.
RootCertificate locate_theta(const GenerationState& next, const GenerationState& prev,
                             const ModelConfig& m);

// Counts zeros of det T_shape(z) in |z - c| < r; exposed for audits.
struct WindingResult {
  int winding = 0;
  std::vector<cplx> power_sums;  // s_1, s_2 of (z - c)
  int points = 0;
};
WindingResult contour_count(const SiteSet& shape, const ModelConfig& m, cplx c, double r);

// Checks the stored invariants of one generation; throws GeometryViolation.
void check_invariants(const GenerationState& g, const std::vector<GenerationState>& history);

struct GoodCertificate {
  bool good = true;
  int clause = 0;  // 1 or 2 on failure
  int generation = 0;
  Site site;
};
// s-goodness of lambda with respect to generations 0..s of `gens`.
GoodCertificate is_good(const SiteSet& lambda, const std::vector<GenerationState>& gens, int s);

// Sites of the shifted window within 10 delta_s^{2/3} of -+theta_s that are missing from P_s.
std::vector<Site> fs_violations(const GenerationState& g, const SiteSet& window, double theta,
                                const Eigen::VectorXd& omega);

struct GreenResult {
  Inverse inv;
  std::vector<std::pair<double, double>> norms;  // (alpha, ||T^{-1}||_alpha)
};
GreenResult green(const SiteSet& lambda, const ModelConfig& m, const std::vector<double>& alphas);
// Inverse assembled through the Schur partition onto `inner`.
LatticeOperator green_schur(const SiteSet& lambda, const ModelConfig& m, const SiteSet& inner);

// ---------------------------------------------------------------------------

struct MsaRun {
  double theta = 0.0;
  std::vector<GenerationState> generations;
  std::string stopped;  // why iteration ended
};

// Generation 0 up to the schedule end or until P_s becomes empty.
MsaRun run_msa(const ModelConfig& m, const ScaleSchedule& sched, const SiteSet& lambda,
               double theta, cplx theta0, RootCache* cache = nullptr);

struct BoundRow {
  int s = 0;
  std::string bound_id;
  double lhs_log10 = 0.0;
  double rhs_log10 = 0.0;
  bool pass = false;         // strict for hard-constant bounds, ratio budget for the rest
  bool budget_pass = false;  // within the constant budget
  bool truncated = false;
  bool lower_bound = false;  // lhs is bounded below by rhs
  std::string note;
  double ratio_log10() const { return lhs_log10 - rhs_log10; }
};

struct AuditOptions {
  double budget = 10.0;
  std::vector<double> z_radii{0.25, 0.5, 0.9};  // fractions of delta_s^{1/2} for ss/detss
  int z_angles = 4;
};

// Bound rows for every generation of `run` plus the supplied Lambda samples.
std::vector<BoundRow> audit_bounds(const MsaRun& run, const ModelConfig& m,
                                   const std::vector<SiteSet>& lambda_samples,
                                   const AuditOptions& opt = {});

} // namespace qp
