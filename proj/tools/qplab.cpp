// qplab: command-line front end. Every subcommand writes manifest.json first,
// then CSV tables and a JSON summary into --out.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qplab/config.hpp"
#include "qplab/errors.hpp"
#include "qplab/experiments.hpp"
#include "qplab/io.hpp"
#include "qplab/msa.hpp"
#include "qplab/rng.hpp"
#include "qplab/spectral.hpp"
#include "qplab/verify.hpp"

namespace fs = std::filesystem;
using namespace qp;

namespace {

struct Context {
  Config cfg;
  RunManifest man;

  std::string file(const std::string& name) const { return (fs::path(man.out_dir) / name).string(); }
};

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<double> number_list(const Config& c, const std::string& sec, const std::string& key,
                                 std::vector<double> fallback) {
  return c.has(sec, key) ? c.numbers(sec, key) : fallback;
}

// Phases: explicit [sec] theta list, else n_theta uniform draws from the run seed.
std::vector<double> thetas(const Context& ctx, const std::string& sec, int fallback_count) {
  if (ctx.cfg.has(sec, "theta")) return ctx.cfg.numbers(sec, "theta");
  const long n = ctx.cfg.integer(sec, "n_theta", fallback_count);
  Rng rng(ctx.man.seed);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (auto& x : t) x = rng.uniform();
  return t;
}

ScaleSchedule schedule_from(const Config& c, const ModelConfig& m) {
  const std::string mode = c.string("schedule", "mode", c.has("schedule", "N") ? "exploration" : "paper");
  const double gamma = c.number("schedule", "gamma", m.gamma);
  const double tau = c.number("schedule", "tau", m.tau);
  if (mode == "paper") {
    double l0;
    if (c.has("schedule", "delta0")) l0 = std::log10(c.number("schedule", "delta0"));
    else if (c.has("schedule", "epsilon0")) l0 = log10_delta0_from_epsilon0(c.number("schedule", "epsilon0"));
    else l0 = c.number("schedule", "log10_delta0");
    return paper_schedule(gamma, tau, l0, static_cast<int>(c.integer("schedule", "s_max", 3)));
  }
  if (mode != "exploration") throw ConfigError("schedule.mode must be paper or exploration");
  return exploration_schedule(gamma, tau, c.numbers("schedule", "N"), c.numbers("schedule", "log10_delta"));
}

void write_flags(const ModelConfig& m, json& summary) {
  summary["model_flags"] = m.flags();
  for (const auto& f : m.flags()) std::cerr << "qplab: warning: " << f << '\n';
}

// ---------------------------------------------------------------------------

int cmd_verify(Context& ctx, bool mutate_tame) {
  VerifyOptions opt;
  opt.instances = static_cast<int>(ctx.cfg.integer("verify", "instances", 1000));
  opt.rel_slack = ctx.cfg.number("verify", "rel_slack", 1e-10);
  opt.seed = ctx.man.seed;
  if (mutate_tame) opt.tame_scale = 0.5;
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify(opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CsvWriter rows(ctx.file("verify_checks.csv"), ctx.man,
                 {"suite", "instance", "inequality", "alpha", "lhs", "rhs", "pass"});
  for (const auto& r : rep.rows)
    rows.row({r.suite, static_cast<long long>(r.instance), r.inequality, r.alpha, r.lhs, r.rhs, r.pass});
  CsvWriter suites(ctx.file("verify_suites.csv"), ctx.man,
                   {"suite", "instances", "checks", "failures", "worst_ratio", "pass"});
  json summary{{"experiment", "verify"}, {"metrics", json::object()}};
  for (const auto& s : rep.suites) {
    suites.row({s.name, static_cast<long long>(s.instances), static_cast<long long>(s.checks),
                static_cast<long long>(s.failures), s.worst_ratio, s.failures == 0});
    summary["metrics"][s.name] = {{"instances", s.instances}, {"checks", s.checks}, {"failures", s.failures},
                                  {"worst_ratio", s.worst_ratio}};
    if (!s.counterexample.is_null()) write_json(ctx.file("counterexample_" + s.name + ".json"), ctx.man, s.counterexample);
    std::cout << s.name << ": " << (s.failures ? "FAIL" : "pass") << " (" << s.checks << " checks, "
              << s.failures << " failures, worst lhs/rhs " << s.worst_ratio << ")\n";
  }
  summary["pass"] = rep.pass();
  summary["seconds"] = secs;
  write_json(ctx.file("verify_summary.json"), ctx.man, summary);
  return rep.pass() ? 0 : 1;
}

int cmd_schedule(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const ScaleSchedule s = schedule_from(ctx.cfg, m);
  CsvWriter w(ctx.file("schedule.csv"), ctx.man, {"s", "N", "log10_delta"});
  for (const auto& e : s.entries) {
    if (e.s == 0) continue;
    w.row({static_cast<long long>(e.s), e.N, e.log10_delta});
    std::cout << e.s << ',' << format_double(e.N) << ',' << format_double(e.log10_delta) << '\n';
  }
  write_json(ctx.file("schedule_summary.json"), ctx.man,
             {{"experiment", "schedule"},
              {"metrics", {{"mode", s.mode == ScaleMode::Paper ? "paper" : "exploration"},
                           {"gamma", s.gamma}, {"tau", s.tau}, {"log10_delta0", s.at(0).log10_delta},
                           {"s_max", s.s_max()}}}});
  return 0;
}

const std::vector<std::string> kAuditColumns{"s", "bound_id", "lhs_log10", "rhs_log10", "ratio_log10", "pass",
                                             "sample", "theta", "budget_pass", "truncated", "lower_bound", "note"};

void audit_row(CsvWriter& w, long long sample, double theta, const BoundRow& r) {
  w.row({static_cast<long long>(r.s), r.bound_id, r.lhs_log10, r.rhs_log10, r.ratio_log10(), r.pass, sample,
         theta, r.budget_pass, r.truncated, r.lower_bound, r.note});
}

int cmd_msa(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const ScaleSchedule sched = schedule_from(ctx.cfg, m);
  json summary{{"experiment", "msa"}, {"metrics", json::object()}};
  write_flags(m, summary);
  AuditOptions aopt;
  aopt.budget = ctx.cfg.number("msa", "budget", 10.0);
  CsvWriter audit(ctx.file("msa_audit.csv"), ctx.man, kAuditColumns);

  if (ctx.cfg.has("msa", "samples")) {
    AuditExperimentOptions o;
    o.samples = static_cast<int>(ctx.cfg.integer("msa", "samples", 500));
    o.window = static_cast<int>(ctx.cfg.integer("msa", "window", 80));
    o.resonance_spread = static_cast<int>(ctx.cfg.integer("msa", "resonance_spread", 20));
    o.subboxes = static_cast<int>(ctx.cfg.integer("msa", "subboxes", 3));
    o.seed = ctx.man.seed;
    o.audit = aopt;
    const AuditExperiment ex = bound_audit_experiment(m, sched, o);
    CsvWriter fails(ctx.file("msa_failures.csv"), ctx.man, {"sample", "theta", "bound_id", "ratio_log10", "reason", "geometry"});
    for (const auto& a : ex.samples) {
      for (const auto& r : a.rows) {
        audit_row(audit, a.index, a.theta, r);
        if (!r.budget_pass && !r.truncated)
          fails.row({static_cast<long long>(a.index), a.theta, r.bound_id, r.ratio_log10(), std::string("budget"), a.geometry});
      }
      if (!a.failure.empty())
        fails.row({static_cast<long long>(a.index), a.theta, std::string(""), std::nan(""), a.failure, a.geometry});
    }
    for (const auto& s : ex.summary) {
      summary["metrics"][s.bound_id] = {{"counted", s.counted}, {"passed", s.passed}, {"fraction", s.fraction()}};
      std::cout << s.bound_id << ": " << s.passed << "/" << s.counted << " samples within budget\n";
    }
    write_json(ctx.file("msa_summary.json"), ctx.man, summary);
    return 0;
  }

  const SiteSet lambda = box(Site::zero(m.d), static_cast<int>(ctx.cfg.integer("msa", "window", 60)));
  const cplx theta0 = solve_theta0(m.potential, m.energy);
  json traces = json::array();
  RootCache cache;
  for (double th : thetas(ctx, "msa", 1)) {
    const MsaRun run = run_msa(m, sched, lambda, th, theta0, &cache);
    traces.push_back(to_json(run));
    for (const auto& r : audit_bounds(run, m, {lambda}, aopt)) audit_row(audit, 0, th, r);
  }
  write_json(ctx.file("msa_trace.json"), ctx.man, {{"theta0", to_json(theta0)}, {"runs", traces}});
  summary["metrics"]["runs"] = traces.size();
  write_json(ctx.file("msa_summary.json"), ctx.man, summary);
  return 0;
}

int cmd_green(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const SiteSet lam = box(Site::zero(m.d), static_cast<int>(ctx.cfg.integer("green", "radius", 10)));
  const std::vector<double> alphas = number_list(ctx.cfg, "green", "alphas", {0.0, 1.0, 2.0});
  const GreenResult g = green(lam, m, alphas);
  CsvWriter w(ctx.file("green.csv"), ctx.man, {"row_twice", "col_twice", "re", "im"});
  for (Eigen::Index i = 0; i < g.inv.inverse.n_rows(); ++i)
    for (Eigen::Index j = 0; j < g.inv.inverse.n_cols(); ++j) {
      const cplx z = g.inv.inverse.mat(i, j);
      if (z == cplx(0.0)) continue;
      w.row({to_json(lam[i]).dump(), to_json(lam[j]).dump(), z.real(), z.imag()});
    }
  write_json(ctx.file("green_operator.json"), ctx.man, {{"operator", to_json(g.inv.inverse)}});
  const LatticeOperator T = assemble_T(lam, m);
  CsvWriter n(ctx.file("green_norms.csv"), ctx.man, {"alpha", "lhs", "rhs", "pass", "inequality"});
  for (const auto& r : audit_norm_inequalities(T, alphas, static_cast<int>(ctx.cfg.integer("green", "cut", 2)), -1.0, ctx.man.seed))
    n.row({r.alpha, r.lhs, r.rhs, r.pass, r.inequality});
  json summary{{"experiment", "green"},
               {"metrics", {{"sites", lam.size()}, {"cond", g.inv.cond}, {"min_pivot", g.inv.min_pivot},
                            {"log_abs_det", g.inv.log_det.log_abs}}}};
  for (const auto& [a, v] : g.norms) summary["metrics"]["inverse_norm_alpha_" + format_double(a)] = v;
  write_flags(m, summary);
  write_json(ctx.file("green_summary.json"), ctx.man, summary);
  return 0;
}

int cmd_eigen(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const int N = static_cast<int>(ctx.cfg.integer("eigen", "N", 200));
  LocalizationOptions lo;
  lo.A = ctx.cfg.number("eigen", "A", lo.A);
  lo.tau1 = ctx.cfg.number("eigen", "tau1", lo.tau1);
  lo.class_window = static_cast<int>(ctx.cfg.integer("eigen", "class_window", -1));
  lo.tail_fraction = ctx.cfg.number("eigen", "tail_fraction", lo.tail_fraction);
  const std::vector<double> th = thetas(ctx, "eigen", 8);
  const auto samples = localization_scan(m, N, th, lo);
  CsvWriter fits(ctx.file("eigen_fits.csv"), ctx.man, {"theta", "q", "exponent", "r2", "peak", "points"});
  CsvWriter per(ctx.file("eigen_samples.csv"), ctx.man,
                {"theta", "typical", "median_exponent", "median_r2", "eigen_residual", "poisson_residual", "poisson_pairs"});
  std::vector<double> ex, r2;
  double worst_poisson = 0.0;
  const int inner = static_cast<int>(ctx.cfg.integer("eigen", "poisson_inner", N / 2));
  for (const auto& s : samples) {
    for (std::size_t q = 0; q < s.fits.size(); ++q) {
      const auto& f = s.fits[q];
      fits.row({s.theta, static_cast<long long>(q), f.exponent, f.r2, to_json(f.peak).dump(), static_cast<long long>(f.points)});
    }
    const EigenSystem es = eigensolve(hamiltonian(box(Site::zero(m.d), N), m, s.theta));
    const PoissonCheck pc = poisson_check(es, m, s.theta, inner, inner + 0.25 * (N - inner));
    worst_poisson = std::max(worst_poisson, pc.max_residual);
    per.row({s.theta, s.cls.typical, s.median_exponent, s.median_r2, s.max_residual, pc.max_residual,
             static_cast<long long>(pc.used)});
    ex.push_back(s.median_exponent);
    r2.push_back(s.median_r2);
  }
  json summary{{"experiment", "eigen"},
               {"metrics", {{"N", N}, {"median_exponent", median(ex)}, {"median_r2", median(r2)},
                            {"max_poisson_residual", worst_poisson}}}};
  write_flags(m, summary);
  write_json(ctx.file("eigen_summary.json"), ctx.man, summary);
  return 0;
}

int cmd_dynamics(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const std::vector<double> Ns = number_list(ctx.cfg, "dynamics", "N", {100, 200});
  const double p = ctx.cfg.number("dynamics", "p", 1.0);
  const double t_max = ctx.cfg.number("dynamics", "t_max", 200.0);
  const double th = ctx.cfg.number("dynamics", "theta", 0.3);
  CsvWriter series(ctx.file("dynamics.csv"), ctx.man, {"N", "t", "moment", "unitarity_error"});
  CsvWriter sup(ctx.file("dynamics_sup.csv"), ctx.man, {"N", "sup_moment", "max_unitarity_error", "grid_points"});
  json metrics = json::object();
  for (double Nd : Ns) {
    const int N = static_cast<int>(Nd);
    const EigenSystem es = eigensolve(hamiltonian(box(Site::zero(m.d), N), m, th));
    const MomentResult r = dynamics_moment(es, Site::zero(m.d), p, t_max);
    for (const auto& pt : r.series) series.row({static_cast<long long>(N), pt.t, pt.moment, pt.unitarity_error});
    sup.row({static_cast<long long>(N), r.sup, r.max_unitarity_error, static_cast<long long>(r.grid_points)});
    // empirical ratio sup / max(A, eps)^{-29(p+2d)/tau}; reported, no threshold
    const double A = ctx.cfg.number("dynamics", "A", 0.5);
    const double expo = 29.0 * (p + 2.0 * m.d) / m.tau;
    const double ratio = std::log10(r.sup) - expo * std::max(-std::log10(A), -std::log10(m.epsilon));
    metrics[std::to_string(N)] = {{"sup", r.sup}, {"max_unitarity_error", r.max_unitarity_error},
                                  {"constant_ratio_log10", ratio}};
  }
  json summary{{"experiment", "dynamics"}, {"metrics", metrics}};
  write_flags(m, summary);
  write_json(ctx.file("dynamics_summary.json"), ctx.man, summary);
  return 0;
}

int cmd_ids(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const int N = static_cast<int>(ctx.cfg.integer("ids", "N", 500));
  const double th = ctx.cfg.number("ids", "theta", 0.3);
  const EigenSystem es = eigensolve(hamiltonian(box(Site::zero(m.d), N), m, th));
  // one row per jump of the counting function
  CsvWriter w(ctx.file("ids.csv"), ctx.man, {"E", "N_E"});
  const double total = static_cast<double>(es.values.size());
  for (Eigen::Index j = 0; j < es.values.size(); ++j) w.row({es.values[j], (j + 1) / total});
  const std::vector<double> eta = number_list(ctx.cfg, "ids", "eta", {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1});
  const HolderFit h = holder_modulus(es.values, eta);
  CsvWriter hw(ctx.file("ids_holder.csv"), ctx.man, {"eta", "modulus"});
  for (std::size_t i = 0; i < h.eta.size(); ++i) hw.row({h.eta[i], h.modulus[i]});
  json summary{{"experiment", "ids"},
               {"metrics", {{"N", N}, {"jumps", es.values.size()}, {"holder_exponent", h.exponent},
                            {"holder_r2", h.r2}, {"mu", h.mu}}}};
  write_flags(m, summary);
  write_json(ctx.file("ids_summary.json"), ctx.man, summary);
  std::cout << "holder exponent " << h.exponent << " (r2 " << h.r2 << ")\n";
  return 0;
}

int cmd_dual(Context& ctx) {
  const ModelConfig m = model_from_config(ctx.cfg);
  const DualModel dm = aubry_dual(m, static_cast<int>(ctx.cfg.integer("dual", "band_cut", 4)));
  std::vector<int> Ms;
  for (double x : number_list(ctx.cfg, "dual", "M", {50, 100, 200})) Ms.push_back(static_cast<int>(x));
  const std::vector<double> xs = number_list(ctx.cfg, "dual", "x", {0.1, 0.35});
  const auto rows = dual_localization_proxy(dm, Ms, xs);
  CsvWriter w(ctx.file("dual.csv"), ctx.man,
              {"x", "M", "self_adjoint", "median_ipr", "median_boundary_weight", "min_boundary_weight"});
  for (const auto& r : rows)
    w.row({r.x, static_cast<long long>(r.M), r.self_adjoint, r.median_ipr, r.median_boundary_weight, r.min_boundary_weight});
  json summary{{"experiment", "dual"},
               {"metrics", {{"band_cut", dm.band_cut}, {"u_radius", dm.u_radius}, {"u_truncation", dm.u_truncation}}},
               {"note", "finite-volume proxy: IPR and boundary weight under doubling of M; not a proof of absent point spectrum"}};
  write_json(ctx.file("dual_summary.json"), ctx.man, summary);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"qplab: quasi-periodic operators with power-law hopping"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "qplab_out", scale_mode;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  bool mutate_tame = false;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override section.key=value")->take_all()->allow_extra_args(false);
  app.add_option("--seed", seed_flag, "random seed (default QPLAB_SEED or 0)");
  app.add_option("--scale-mode", scale_mode, "schedule mode")->check(CLI::IsMember({"paper", "exploration"}));
  app.add_flag("--mutate-tame", mutate_tame)->group("");  // halves K(n, alpha) in the tame suite

  const std::vector<std::string> names{"verify", "schedule", "msa", "green", "eigen", "dynamics", "ids", "dual"};
  for (const auto& n : names) app.add_subcommand(n, n + " pipeline");
  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx;
    if (!config_path.empty()) ctx.cfg = Config::load(config_path);
    for (const auto& o : overrides) ctx.cfg.set(o);
    if (!scale_mode.empty()) ctx.cfg.set("schedule", "mode", scale_mode);
    std::uint64_t seed = 0;
    if (seed_flag) seed = *seed_flag;
    else if (const char* s = std::getenv("QPLAB_SEED")) seed = std::strtoull(s, nullptr, 10);

    const std::string sub = app.get_subcommands().front()->get_name();
    ctx.man.config_path = config_path;
    ctx.man.subcommand = sub;
    ctx.man.overrides = overrides;
    ctx.man.seed = seed;
    ctx.man.out_dir = out_dir;
    ctx.man.timestamp = utc_timestamp();
    ctx.man.config_hash = ctx.cfg.hash();
    write_manifest(ctx.man);

    if (sub == "verify") return cmd_verify(ctx, mutate_tame);
    if (sub == "schedule") return cmd_schedule(ctx);
    if (sub == "msa") return cmd_msa(ctx);
    if (sub == "green") return cmd_green(ctx);
    if (sub == "eigen") return cmd_eigen(ctx);
    if (sub == "dynamics") return cmd_dynamics(ctx);
    if (sub == "ids") return cmd_ids(ctx);
    if (sub == "dual") return cmd_dual(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "qplab: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qplab: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
