#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qplab/msa.hpp"
#include "qplab/spectral.hpp"

namespace qp {

struct AuditSample {
  int index = 0;
  double theta = 0.0;
  int resonant_site = 0;  // k with theta + k omega within delta_0 of -+theta_0
  std::vector<BoundRow> rows;
  std::string failure;    // GeometryViolation / NoRoot text when the run itself failed
  std::string geometry;   // blocks and Lambda samples, for failure logs
};

struct BoundSummary {
  std::string bound_id;
  int counted = 0;  // samples with at least one non-truncated row of this id (or a failed run)
  int passed = 0;
  double fraction() const { return counted ? static_cast<double>(passed) / counted : 0.0; }
};

struct AuditExperiment {
  std::vector<AuditSample> samples;
  std::vector<BoundSummary> summary;  // tb0, tsg01
};

struct AuditExperimentOptions {
  int samples = 500;
  int window = 80;          // Lambda = [-window, window]
  int resonance_spread = 20;
  int subboxes = 3;         // random good-set candidates besides the window
  std::uint64_t seed = 0;
  AuditOptions audit;
};

// d = 1 bound audit over resonance-conditioned phases; parallel over samples.
AuditExperiment bound_audit_experiment(const ModelConfig& m, const ScaleSchedule& sched,
                                       const AuditExperimentOptions& opt);

struct PoissonCheck {
  int used = 0;
  double max_residual = 0.0;  // relative to max |psi|
};
// Poisson identity on the box of radius `inner` for every eigenpair peaked at
// ||n|| >= min_peak. Centres inside the inner box make E nearly an eigenvalue
// of the inner restriction, where the identity is ill conditioned.
PoissonCheck poisson_check(const EigenSystem& es, const ModelConfig& m, double theta, int inner,
                           double min_peak);

} // namespace qp
