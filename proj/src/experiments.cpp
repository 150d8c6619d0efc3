#include "qplab/experiments.hpp"

#include <cmath>
#include <sstream>

#include "qplab/errors.hpp"
#include "qplab/parallel.hpp"
#include "qplab/rng.hpp"

namespace qp {

namespace {

std::string describe(const MsaRun& run, const std::vector<SiteSet>& lams) {
  std::ostringstream o;
  for (const auto& g : run.generations) {
    o << "s=" << g.s << " case=" << to_string(g.case_tag) << " P=" << g.P.size() << " Q=" << g.Q.size();
    for (const auto& [k, b] : g.blocks)
      if (g.s > 0)
        o << " block(k=" << k.coord(0) << ",|Ot|=" << b.omega_tilde.size() << (b.truncated ? ",trunc" : "") << ")";
    o << ';';
  }
  for (const auto& l : lams) o << " Lambda[" << l[0].coord(0) << "," << l[l.size() - 1].coord(0) << "]";
  return o.str();
}

} // namespace

AuditExperiment bound_audit_experiment(const ModelConfig& m, const ScaleSchedule& sched,
                                       const AuditExperimentOptions& opt) {
  if (m.d != 1) throw DomainError("bound audit experiment is one-dimensional");
  const cplx theta0 = solve_theta0(m.potential, m.energy);
  const double delta0 = sched.delta(0);
  const SiteSet lambda = box(Site::zero(1), opt.window);
  RootCache cache;
  AuditExperiment ex;
  ex.samples.resize(static_cast<std::size_t>(opt.samples));

  parallel_for(ex.samples.size(), [&](std::size_t i) {
    AuditSample& a = ex.samples[i];
    Rng rng(opt.seed * 0x9E3779B97F4A7C15ull + i);
    a.index = static_cast<int>(i);
    a.resonant_site = static_cast<int>(rng.integer(-opt.resonance_spread, opt.resonance_spread));
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    double t = sign * theta0.real() - a.resonant_site * m.omega[0] + delta0 * rng.uniform(-1.0, 1.0);
    a.theta = t - std::floor(t);
    std::vector<SiteSet> lams{lambda};
    for (int b = 0; b < opt.subboxes; ++b) {
      const int r = static_cast<int>(rng.integer(10, opt.window / 2));
      const int c = static_cast<int>(rng.integer(-opt.window + r, opt.window - r));
      lams.push_back(box(Site::integer({c}), r));
    }
    try {
      const MsaRun run = run_msa(m, sched, lambda, a.theta, theta0, &cache);
      a.rows = audit_bounds(run, m, lams, opt.audit);
      a.geometry = describe(run, lams);
    } catch (const Error& e) {
      a.failure = e.what();
    }
  });

  for (const char* id : {"tb0", "tsg01"}) {
    BoundSummary s;
    s.bound_id = id;
    for (const auto& a : ex.samples) {
      if (!a.failure.empty()) {
        ++s.counted;  // a failed run is a failed sample
        continue;
      }
      bool any = false, ok = true;
      for (const auto& r : a.rows)
        if (r.bound_id == id && !r.truncated) any = true, ok = ok && r.budget_pass;
      if (!any) continue;
      ++s.counted;
      s.passed += ok;
    }
    ex.summary.push_back(s);
  }
  return ex;
}

PoissonCheck poisson_check(const EigenSystem& es, const ModelConfig& m, double theta, int inner,
                           double min_peak) {
  PoissonCheck pc;
  const SiteSet in = box(Site::zero(m.d), inner);
  for (Eigen::Index q = 0; q < es.vectors.cols(); ++q) {
    Eigen::Index peak;
    const double top = es.vectors.col(q).cwiseAbs().maxCoeff(&peak);
    if (sup_norm(es.sites[static_cast<std::size_t>(peak)]) < min_peak) continue;
    const double r = poisson_residual(es.vectors.col(q), es.values[q], in, es.sites, m, theta);
    pc.max_residual = std::max(pc.max_residual, r / top);
    ++pc.used;
  }
  return pc;
}

} // namespace qp
