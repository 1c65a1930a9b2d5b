#pragma once
// Experiment drivers behind the `stringlab` command line. Every command
// writes CSV files into an output directory and returns an exit status:
// 0 success, 1 error or failed check, 2 blow-up.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "stringlab/config.hpp"
#include "stringlab/energy.hpp"
#include "stringlab/evolver.hpp"
#include "stringlab/identities.hpp"
#include "stringlab/monitor.hpp"

namespace stringlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBlowup = 2;

struct CommandContext {
  std::filesystem::path out = "out";
  int threads = 1;
  std::ostream* log = nullptr;

  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
};

/// Runs fn(0..count-1) on up to `threads` workers. Results must be stored
/// by index; the first exception is rethrown after all workers finish.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::size_t(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace csv {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::ofstream open(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw Error("cannot write " + (dir / name).string());
  return os;
}

/// key,value rows.
class Summary {
 public:
  void add(const std::string& k, const std::string& v) { rows_.emplace_back(k, v); }
  void add(const std::string& k, double v) { add(k, num(v)); }
  void add_flag(const std::string& k, bool v) { add(k, std::string(v ? "true" : "false")); }
  void write(const std::filesystem::path& dir, const std::string& name) const {
    auto os = open(dir, name);
    os << "key,value\n";
    for (const auto& [k, v] : rows_) os << k << ',' << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

}  // namespace csv

inline EvolverOptions evolver_options(const ExperimentConfig& c) {
  EvolverOptions o;
  o.cfl = c.cfl;
  o.eps_ko = c.eps_ko;
  return o;
}

// ---------------------------------------------------------------- run

struct RunOutcome {
  RunResult result;
  RunSummary summary;
  CriterionReport criterion;
  double M2 = 0.0;
  double c_sobolev = 0.0;
  double min_margin_L = 1.0, min_margin_Lb = 1.0;
  std::vector<SobolevMargins> margins;  // per report
  bool monitors_ok = false;
};

/// Data check, evolution and monitors for one family on one grid.
inline RunOutcome execute_run(const ExperimentConfig& c, const DataFamily& fam,
                              const Grid1D& grid) {
  RunOutcome o;
  const InducedData data = build_data(fam, grid.x0);
  o.criterion = check_kong_tsuji(data_eigenvalues(data, grid.points()));
  DiagnosticsOptions d;
  d.N = c.N;
  d.probes.u = c.probes_u;
  d.probes.ub = c.probes_ub;
  d.report_every = c.report_every;
  const Weight weight(fam.gamma);
  o.result = run_diagnostics(grid, init_state(data, grid), c.t_end, weight,
                             evolver_options(c), d);
  o.summary = summarize_run(o.result.reports, fam.delta);
  o.M2 = fit_M2({o.summary});
  const double gmin = std::min(o.summary.min_g, o.result.min_g);
  o.c_sobolev = sobolev_constant(fam.gamma, std::max(gmin, kDefaultGmin));
  for (const auto& r : o.result.reports) {
    const auto m = sobolev_margins(r, fam.delta, std::sqrt(o.M2), o.c_sobolev);
    o.min_margin_L = std::min(o.min_margin_L, m.L);
    o.min_margin_Lb = std::min(o.min_margin_Lb, m.Lb);
    o.margins.push_back(m);
  }
  o.monitors_ok = !o.result.blowup_time && o.result.max_speed <= 1.0 + 1e-12 &&
                  o.min_margin_L >= 0.0 && o.min_margin_Lb >= 0.0 &&
                  o.summary.max_tail_fraction < 1e-12;
  return o;
}

/// Columns: t,k,E2,Eb2,F2_<i>...,Fb2_<j>...,min_g,sobolev_L_margin,sobolev_Lb_margin
inline void write_energy_csv(std::ostream& os, const RunOutcome& o,
                             const ExperimentConfig& c) {
  os << "t,k,E2,Eb2";
  for (std::size_t i = 0; i < c.probes_u.size(); ++i) os << ",F2_" << i;
  for (std::size_t i = 0; i < c.probes_ub.size(); ++i) os << ",Fb2_" << i;
  os << ",min_g,sobolev_L_margin,sobolev_Lb_margin\n";
  const auto& reps = o.result.reports;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& rep = reps[r];
    for (std::size_t k = 0; k < rep.E2.size(); ++k) {
      os << csv::num(rep.t) << ',' << k << ',' << csv::num(rep.E2[k]) << ','
         << csv::num(rep.Eb2[k]);
      for (const auto& f : rep.F2) os << ',' << csv::num(f[k]);
      for (const auto& f : rep.Fb2) os << ',' << csv::num(f[k]);
      os << ',' << csv::num(rep.min_g) << ',' << csv::num(o.margins[r].L) << ','
         << csv::num(o.margins[r].Lb) << '\n';
    }
  }
}

inline int cmd_run(const ExperimentConfig& c, const CommandContext& ctx) {
  const Grid1D grid = c.grid();
  const RunOutcome o = execute_run(c, c.family(), grid);
  {
    auto os = csv::open(ctx.out, "criterion.csv");
    os << "x,lambda_minus,lambda_plus\n";
    for (std::size_t i = 0; i < grid.n; ++i)
      os << csv::num(grid.x(i)) << ',' << csv::num(o.criterion.lambda_minus[i]) << ','
         << csv::num(o.criterion.lambda_plus[i]) << '\n';
  }
  {
    auto os = csv::open(ctx.out, "energy.csv");
    write_energy_csv(os, o, c);
  }
  csv::Summary s;
  const bool blew = o.result.blowup_time.has_value();
  s.add("status", std::string(blew ? "blowup" : (o.monitors_ok ? "ok" : "monitor_failure")));
  s.add("x0", grid.x0);
  s.add("dx", grid.dx);
  s.add("n", double(grid.n));
  s.add("dt", o.result.dt);
  s.add("t_end", c.t_end);
  s.add("blowup_time", blew ? *o.result.blowup_time : std::nan(""));
  s.add("blowup_reason", blew ? o.result.blowup_reason : std::string("none"));
  s.add_flag("criterion_pass", o.criterion.pass);
  s.add("criterion_gap_min", o.criterion.gap_min);
  s.add("criterion_order_margin", o.criterion.order_margin);
  s.add("lambda_star_lo", o.criterion.lam_star_lo);
  s.add("lambda_star_hi", o.criterion.lam_star_hi);
  s.add("max_speed", o.result.max_speed);
  s.add("min_g", o.result.min_g);
  s.add("sup_E2", o.summary.sup_E2);
  s.add("sup_Eb2", o.summary.sup_Eb2);
  s.add("sup_F2", o.summary.sup_F2);
  s.add("sup_Fb2", o.summary.sup_Fb2);
  s.add("M2", o.M2);
  s.add("sobolev_constant", o.c_sobolev);
  s.add("min_sobolev_L_margin", o.min_margin_L);
  s.add("min_sobolev_Lb_margin", o.min_margin_Lb);
  s.add("max_tail_fraction", o.summary.max_tail_fraction);
  s.write(ctx.out, "summary.csv");
  if (blew) {
    ctx.say("blow-up after t = " + csv::num(*o.result.blowup_time) + ": " +
            o.result.blowup_reason);
    return kExitBlowup;
  }
  if (!o.monitors_ok) {
    ctx.say("monitor failure (see summary.csv)");
    return kExitError;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- converge

struct ConvergeLevel {
  Grid1D grid;
  double error = 0.0;
  double max_speed = 0.0;
  double order = std::nan("");
};

/// Travelling-wave refinement study; needs delta = 0.
inline std::vector<ConvergeLevel> converge_study(const DataFamily& fam,
                                                 const std::vector<Grid1D>& grids,
                                                 double t_end, const EvolverOptions& opt,
                                                 int threads = 1) {
  if (fam.delta != 0.0)
    throw ValidationError("converge needs delta = 0 (travelling-wave oracle)");
  std::vector<ConvergeLevel> out(grids.size());
  parallel_for(grids.size(), threads, [&](std::size_t l) {
    const Grid1D& g = grids[l];
    const InducedData data = build_data(fam, g.x0);
    Evolver ev(g, init_state(data, g), opt);
    const int steps = std::max(1, int(std::ceil(t_end / (opt.cfl * g.dx) - 1e-9)));
    const double dt = t_end / steps;
    for (int s = 0; s < steps; ++s) ev.advance(dt);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
      err = std::max(err, std::abs(ev.state().phi[i] -
                                   exact_travelling(data, t_end, g.x(i)).phi));
    out[l] = {g, err, ev.max_speed_seen(), std::nan("")};
  });
  for (std::size_t l = 1; l < out.size(); ++l)
    if (out[l].error > 0.0 && out[l - 1].error > 0.0)
      out[l].order = std::log(out[l - 1].error / out[l].error) /
                     std::log(out[l - 1].grid.dx / out[l].grid.dx);
  return out;
}

inline int cmd_converge(const ExperimentConfig& c, const CommandContext& ctx) {
  std::vector<Grid1D> grids;
  for (int l = 0; l < c.levels; ++l) grids.push_back(c.grid(l));
  const auto lv = converge_study(c.family(), grids, c.t_end, evolver_options(c), ctx.threads);
  auto os = csv::open(ctx.out, "converge.csv");
  os << "level,dx,n,error_linf,order,max_speed\n";
  bool all_zero = true;
  for (std::size_t l = 0; l < lv.size(); ++l) {
    all_zero = all_zero && lv[l].error == 0.0;
    os << l << ',' << csv::num(lv[l].grid.dx) << ',' << lv[l].grid.n << ','
       << csv::num(lv[l].error) << ',';
    if (l > 0) os << (std::isnan(lv[l].order) ? std::string("n/a") : csv::num(lv[l].order));
    os << ',' << csv::num(lv[l].max_speed) << '\n';
  }
  if (all_zero) return kExitOk;
  const double order = lv.back().order;
  if (!(order >= 3.5)) {
    ctx.say("observed order " + csv::num(order) + " below 3.5");
    return kExitError;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOutcome {
  std::vector<std::vector<RunOutcome>> runs;  // [grid][delta]
  std::vector<SweepFit> fits;                 // per grid
  bool ok = false;
  bool blowup = false;
};

inline SweepOutcome sweep_study(const ExperimentConfig& c, int threads = 1) {
  SweepOutcome s;
  const std::size_t G = std::size_t(c.sweep_grids), D = c.deltas.size();
  s.runs.assign(G, std::vector<RunOutcome>(D));
  parallel_for(G * D, threads, [&](std::size_t j) {
    const std::size_t g = j / D, d = j % D;
    s.runs[g][d] = execute_run(c, c.family(c.deltas[d]), c.grid(int(g)));
  });
  s.ok = true;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<RunSummary> sums;
    for (const auto& r : s.runs[g]) {
      sums.push_back(r.summary);
      s.blowup = s.blowup || r.result.blowup_time.has_value();
    }
    s.fits.push_back(fit_sweep(sums));
    const SweepFit& f = s.fits.back();
    s.ok = s.ok && std::abs(f.slope_E2 - 2.0) <= 0.1 && f.Eb2_variation <= 0.1 &&
           f.energy1.C1 > 0.0 && f.energy2.C1 > 0.0;
  }
  for (std::size_t g = 1; g < G; ++g)
    for (auto pick : {&SweepFit::energy1, &SweepFit::energy2}) {
      const double r = (s.fits[g].*pick).C1 / (s.fits[0].*pick).C1;
      s.ok = s.ok && r >= 0.5 && r <= 2.0;
    }
  s.ok = s.ok && !s.blowup;
  return s;
}

inline int cmd_sweep(const ExperimentConfig& c, const CommandContext& ctx) {
  const SweepOutcome s = sweep_study(c, ctx.threads);
  {
    auto os = csv::open(ctx.out, "sweep.csv");
    os << "grid,dx,delta,sup_E2,sup_Eb2,sup_F2,sup_Fb2,E2_0,Eb2_0,min_g,blowup\n";
    for (std::size_t g = 0; g < s.runs.size(); ++g)
      for (std::size_t d = 0; d < s.runs[g].size(); ++d) {
        const auto& r = s.runs[g][d];
        os << g << ',' << csv::num(r.result.grid.dx) << ',' << csv::num(c.deltas[d]) << ','
           << csv::num(r.summary.sup_E2) << ',' << csv::num(r.summary.sup_Eb2) << ','
           << csv::num(r.summary.sup_F2) << ',' << csv::num(r.summary.sup_Fb2) << ','
           << csv::num(r.summary.E2_0) << ',' << csv::num(r.summary.Eb2_0) << ','
           << csv::num(r.result.min_g) << ',' << (r.result.blowup_time ? 1 : 0) << '\n';
      }
  }
  {
    auto os = csv::open(ctx.out, "sweep_fit.csv");
    os << "grid,dx,M2,slope_E2,slope_Eb2,Eb2_variation,C1_energy1,rel_rms_energy1,"
          "C1_energy2,rel_rms_energy2\n";
    for (std::size_t g = 0; g < s.fits.size(); ++g) {
      const auto& f = s.fits[g];
      os << g << ',' << csv::num(s.runs[g][0].result.grid.dx) << ',' << csv::num(f.M2) << ','
         << csv::num(f.slope_E2) << ',' << csv::num(f.slope_Eb2) << ','
         << csv::num(f.Eb2_variation) << ',' << csv::num(f.energy1.C1) << ','
         << csv::num(f.energy1.rel_rms) << ',' << csv::num(f.energy2.C1) << ','
         << csv::num(f.energy2.rel_rms) << '\n';
    }
  }
  if (s.blowup) return kExitBlowup;
  if (!s.ok) {
    ctx.say("sweep scaling checks failed (see sweep_fit.csv)");
    return kExitError;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- blowup

struct BlowupLevel {
  Grid1D grid;
  bool detected = false;
  double time = 0.0;  // last valid time
  std::string reason;
  double max_speed = 0.0;
  double min_sep_plus = 0.0, min_sep_plus_time = 0.0;
  double min_sep_minus = 0.0, min_sep_minus_time = 0.0;
};

/// Evolves until blow-up or t_end. A failed step is retried with half the
/// step until the step falls below 1e-4 dx, so the reported time is the last
/// state the scheme could still produce.
inline BlowupLevel blowup_scan(const DataFamily& fam, const Grid1D& grid, double t_end,
                               const EvolverOptions& opt, double tracer_spacing) {
  BlowupLevel out;
  out.grid = grid;
  const InducedData data = build_data(fam, grid.x0);
  Evolver ev(grid, init_state(data, grid), opt);
  const auto [lo, hi] = fam.support();
  std::vector<double> seeds;
  for (double x = lo; x <= hi + 1e-12; x += tracer_spacing) seeds.push_back(x);
  CharacteristicTracer plus(grid, Family::plus, seeds, 0.0);
  CharacteristicTracer minus(grid, Family::minus, seeds, 0.0);
  double dt = ev.next_dt();
  while (ev.state().t < t_end) {
    const FieldState prev = ev.state();
    const double h = std::min(dt, t_end - prev.t);
    try {
      ev.advance(h);
    } catch (const BlowupDetected& e) {
      dt *= 0.5;
      if (dt < 1e-4 * grid.dx) {
        out.detected = true;
        out.time = e.time();
        out.reason = e.reason();
        break;
      }
      continue;
    }
    plus.update(prev, ev.state());
    minus.update(prev, ev.state());
    dt = std::min(dt, ev.next_dt());
  }
  if (!out.detected) out.time = ev.state().t;
  out.max_speed = ev.max_speed_seen();
  out.min_sep_plus = plus.min_separation();
  out.min_sep_plus_time = plus.min_separation_time();
  out.min_sep_minus = minus.min_separation();
  out.min_sep_minus_time = minus.min_separation_time();
  return out;
}

struct BlowupStudy {
  std::vector<BlowupLevel> levels;
  CriterionReport criterion;
  bool detected_all = false;
  bool detected_none = false;
  std::vector<double> diff_ratios;  // successive-difference shrink factors
  double extrapolated_time = std::nan("");
  bool focusing = false;  // min separation shrinks with refinement, before blow-up
};

inline BlowupStudy blowup_study(const DataFamily& fam, const std::vector<Grid1D>& grids,
                                double t_end, const EvolverOptions& opt,
                                double tracer_spacing, int threads = 1) {
  BlowupStudy s;
  {
    const Grid1D& g = grids.front();
    s.criterion = check_kong_tsuji(data_eigenvalues(build_data(fam, g.x0), g.points()));
  }
  s.levels.resize(grids.size());
  parallel_for(grids.size(), threads, [&](std::size_t l) {
    s.levels[l] = blowup_scan(fam, grids[l], t_end, opt, tracer_spacing);
  });
  s.detected_all = std::all_of(s.levels.begin(), s.levels.end(),
                               [](const BlowupLevel& b) { return b.detected; });
  s.detected_none = std::none_of(s.levels.begin(), s.levels.end(),
                                 [](const BlowupLevel& b) { return b.detected; });
  const auto& L = s.levels;
  for (std::size_t l = 2; l < L.size(); ++l)
    s.diff_ratios.push_back((L[l - 1].time - L[l - 2].time) / (L[l].time - L[l - 1].time));
  if (L.size() >= 3) {
    const double r = s.diff_ratios.back();
    if (r > 1.0) s.extrapolated_time = L.back().time + (L.back().time - L[L.size() - 2].time) / (r - 1.0);
  }
  if (s.detected_all && L.size() >= 2) {
    auto sep = [](const BlowupLevel& b) { return std::min(b.min_sep_plus, b.min_sep_minus); };
    auto sep_t = [](const BlowupLevel& b) {
      return b.min_sep_plus <= b.min_sep_minus ? b.min_sep_plus_time : b.min_sep_minus_time;
    };
    s.focusing = true;
    for (std::size_t l = 1; l < L.size(); ++l)
      s.focusing = s.focusing && sep(L[l]) < sep(L[l - 1]);
    for (const auto& b : L) s.focusing = s.focusing && sep_t(b) <= b.time;
  }
  return s;
}

inline int cmd_blowup(const ExperimentConfig& c, const CommandContext& ctx) {
  std::vector<Grid1D> grids;
  for (int l = 0; l < c.levels; ++l) grids.push_back(c.grid(l));
  const BlowupStudy s = blowup_study(c.family(), grids, c.t_end, evolver_options(c),
                                     c.tracer_spacing, ctx.threads);
  if (s.criterion.pass)
    ctx.say("warning: data satisfy the ordering criterion; blow-up is not expected");
  {
    auto os = csv::open(ctx.out, "blowup.csv");
    os << "level,dx,n,detected,blowup_time,reason,diff_ratio,max_speed,min_sep_plus,"
          "min_sep_plus_time,min_sep_minus,min_sep_minus_time\n";
    for (std::size_t l = 0; l < s.levels.size(); ++l) {
      const auto& b = s.levels[l];
      os << l << ',' << csv::num(b.grid.dx) << ',' << b.grid.n << ',' << (b.detected ? 1 : 0)
         << ',' << csv::num(b.time) << ",\"" << b.reason << "\",";
      if (l >= 2) os << csv::num(s.diff_ratios[l - 2]);
      os << ',' << csv::num(b.max_speed) << ',' << csv::num(b.min_sep_plus) << ','
         << csv::num(b.min_sep_plus_time) << ',' << csv::num(b.min_sep_minus) << ','
         << csv::num(b.min_sep_minus_time) << '\n';
    }
  }
  csv::Summary sum;
  sum.add_flag("criterion_pass", s.criterion.pass);
  sum.add("criterion_gap_min", s.criterion.gap_min);
  sum.add("criterion_order_margin", s.criterion.order_margin);
  sum.add_flag("detected_all", s.detected_all);
  sum.add("extrapolated_time", s.extrapolated_time);
  sum.add_flag("focusing", s.focusing);
  sum.write(ctx.out, "blowup_summary.csv");
  if (s.detected_all) return kExitBlowup;
  if (s.detected_none) return kExitOk;
  ctx.say("blow-up detected on some grids only");
  return kExitError;
}

// ---------------------------------------------------------------- verify

struct VerifyOutcome {
  std::vector<IdentityResidual> identities;
  std::vector<EquivalenceStat> equivalence;
  bool ok = false;
};

inline VerifyOutcome verify_suite(double gamma, std::uint64_t seed,
                                  ClosedForm form = ClosedForm::full) {
  VerifyOutcome v;
  const Weight w(gamma);
  const ManufacturedField f = default_packet();
  DivergenceOptions dopt;
  dopt.seed = seed;
  for (Side side : {Side::TL, Side::TLb})
    v.identities.push_back(verify_divergence_identity(f, f, side, w, dopt));
  DeformationOptions def;
  def.seed = seed + 1;
  def.form = form;
  const DeformationResult d = verify_deformation(w, def);
  v.identities.push_back(d.tl);
  v.identities.push_back(d.tlb);
  v.identities.push_back(d.trace);
  BalanceStudy bs = default_balance_study();
  bs.family.gamma = gamma;
  for (auto& r : verify_energy_balance(bs, default_balance_specs())) v.identities.push_back(r);
  EquivalenceOptions eo;
  eo.seed = seed + 2;
  v.equivalence = sample_equivalence(w, eo);
  v.ok = std::all_of(v.identities.begin(), v.identities.end(),
                     [](const IdentityResidual& r) { return r.pass; }) &&
         std::all_of(v.equivalence.begin(), v.equivalence.end(),
                     [](const EquivalenceStat& e) { return e.pass; });
  return v;
}

inline int cmd_verify(const ExperimentConfig& c, const CommandContext& ctx) {
  const VerifyOutcome v = verify_suite(c.gamma, c.seed);
  {
    auto os = csv::open(ctx.out, "identities.csv");
    write_identity_csv(os, v.identities);
  }
  {
    auto os = csv::open(ctx.out, "equivalence.csv");
    os << "contraction,min_ratio,max_ratio,band_lo,band_hi,pass\n";
    for (const auto& e : v.equivalence)
      os << e.name << ',' << csv::num(e.min_ratio) << ',' << csv::num(e.max_ratio) << ','
         << csv::num(e.band_lo) << ',' << csv::num(e.band_hi) << ',' << (e.pass ? 1 : 0) << '\n';
  }
  for (const auto& r : v.identities)
    if (!r.pass) ctx.say("identity failed: " + r.identity);
  for (const auto& e : v.equivalence)
    if (!e.pass) ctx.say("equivalence failed: " + e.name);
  return v.ok ? kExitOk : kExitError;
}

// ---------------------------------------------------------------- tracecheck

struct TraceRowCheck {
  MultiIndex k;
  std::vector<double> dx, l_disc, lb_disc;
  double l_order = std::nan(""), lb_order = std::nan("");
  bool ok = false;
};

struct TraceStudy {
  std::vector<TraceRowCheck> rows;
  double min_denominator = 0.0;
  bool ok = false;
};

/// Tower at t = 0 from a short run (backward and forward steps around the
/// initial level) for one grid.
inline DerivativeTower initial_tower(const DataFamily& fam, const Grid1D& grid, int N,
                                     const EvolverOptions& opt) {
  const FieldState init = init_state(fam, grid);
  const double dt = opt.cfl * grid.dx;
  const int r = tower_radius(N);
  std::vector<FieldState> levels{init};
  FieldState back = init, fwd = init;
  for (int j = 0; j < r; ++j) {
    back = step_backward(grid, back, dt, opt);
    levels.insert(levels.begin(), back);
    fwd = step_with_dt(grid, fwd, dt, opt);
    levels.push_back(fwd);
  }
  return build_tower(levels, grid, N);
}

/// Discrepancies are max-norm, relative to the largest trace value of the
/// row (absolute when the row vanishes). Rows with both discrepancies at
/// roundoff level count as matching.
inline TraceStudy trace_study(const DataFamily& fam, const std::vector<Grid1D>& grids, int N,
                              int max_order, const EvolverOptions& opt, int threads = 1,
                              double min_order = 1.5) {
  TraceStudy s;
  s.min_denominator = std::numeric_limits<double>::infinity();
  struct Level {
    DerivativeTower tower;
    TraceTable traces;
  };
  std::vector<Level> lv(grids.size());
  parallel_for(grids.size(), threads, [&](std::size_t l) {
    lv[l].tower = initial_tower(fam, grids[l], N, opt);
    const auto xs = grids[l].points();
    lv[l].traces = higher_order_traces(fam, N, xs);
  });
  for (const auto& l : lv) s.min_denominator = std::min(s.min_denominator, l.traces.min_denominator);
  s.ok = s.min_denominator >= 4.0;
  auto disc = [](const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0.0, m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      e = std::max(e, std::abs(a[i] - b[i]));
      m = std::max(m, std::abs(b[i]));
    }
    return m > 1e-300 ? e / m : e;
  };
  for (int k1 = 0; k1 <= N; ++k1)
    for (int k2 = 0; k1 + k2 <= std::min(N, max_order); ++k2) {
      TraceRowCheck row;
      row.k = {k1, k2};
      for (std::size_t l = 0; l < lv.size(); ++l) {
        row.dx.push_back(grids[l].dx);
        row.l_disc.push_back(disc(lv[l].tower.L(row.k), lv[l].traces.L(row.k)));
        row.lb_disc.push_back(disc(lv[l].tower.Lb(row.k), lv[l].traces.Lb(row.k)));
      }
      row.l_order = observed_order(row.dx, row.l_disc);
      row.lb_order = observed_order(row.dx, row.lb_disc);
      auto good = [&](double order, const std::vector<double>& d) {
        return d.back() < 1e-11 || order >= min_order;
      };
      row.ok = good(row.l_order, row.l_disc) && good(row.lb_order, row.lb_disc);
      s.ok = s.ok && row.ok;
      s.rows.push_back(std::move(row));
    }
  return s;
}

inline int cmd_tracecheck(const ExperimentConfig& c, const CommandContext& ctx) {
  std::vector<Grid1D> grids;
  for (int l = 0; l < c.levels; ++l) grids.push_back(c.grid(l));
  const TraceStudy s = trace_study(c.family(), grids, c.N, 3, evolver_options(c), ctx.threads);
  auto os = csv::open(ctx.out, "tracecheck.csv");
  os << "k1,k2,level,dx,L_discrepancy,Lb_discrepancy,L_order,Lb_order\n";
  for (const auto& r : s.rows)
    for (std::size_t l = 0; l < r.dx.size(); ++l) {
      os << r.k.k1 << ',' << r.k.k2 << ',' << l << ',' << csv::num(r.dx[l]) << ','
         << csv::num(r.l_disc[l]) << ',' << csv::num(r.lb_disc[l]) << ',';
      if (l + 1 == r.dx.size()) os << csv::num(r.l_order) << ',' << csv::num(r.lb_order);
      else os << ',';
      os << '\n';
    }
  csv::Summary sum;
  sum.add("min_denominator", s.min_denominator);
  sum.add_flag("ok", s.ok);
  sum.write(ctx.out, "tracecheck_summary.csv");
  if (!s.ok) {
    ctx.say("trace consistency check failed (see tracecheck.csv)");
    return kExitError;
  }
  return kExitOk;
}

inline int dispatch(const ExperimentConfig& c, const CommandContext& ctx) {
  switch (c.mode) {
    case Mode::run: return cmd_run(c, ctx);
    case Mode::sweep: return cmd_sweep(c, ctx);
    case Mode::converge: return cmd_converge(c, ctx);
    case Mode::blowup: return cmd_blowup(c, ctx);
    case Mode::verify: return cmd_verify(c, ctx);
    case Mode::tracecheck: return cmd_tracecheck(c, ctx);
  }
  return kExitError;
}

}  // namespace stringlab
