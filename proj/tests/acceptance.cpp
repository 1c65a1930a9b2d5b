// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <thread>

#include "stringlab/experiment.hpp"

using namespace stringlab;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
double max_speed_all = 0.0;  // over every timelike run below
int threads = 1;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, double secs, const std::string& detail) {
  std::printf("P%d %s (%.1f s) %s\n", id, pass ? "PASS" : "FAIL", secs, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void travelling_wave() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.delta = 0.0;
  c.fb = ProfileSpec::gaussian(1.0, -6.0);
  std::vector<Grid1D> grids;
  for (std::size_t n : {2048, 4096, 8192}) grids.push_back(Grid1D::covering(-20, 20, n));
  const auto lv = converge_study(c.family(), grids, 10.0, evolver_options(c), threads);
  const double secs = seconds_since(t0);
  for (const auto& l : lv) max_speed_all = std::max(max_speed_all, l.max_speed);
  const double order = std::min(lv[1].order, lv[2].order);
  const double err = lv.back().error;
  report(1, order >= 3.5 && err <= 1e-7 && secs <= 60.0, secs,
         "orders " + fmt("%.3f", lv[1].order) + ", " + fmt("%.3f", lv[2].order) +
             "; finest error " + fmt("%.3g", err));
}

void identity_suite() {
  const auto t0 = Clock::now();
  const VerifyOutcome v = verify_suite(0.5, 1);
  const double secs = seconds_since(t0);
  bool ok = true;
  std::string detail;
  for (const auto& r : v.identities) {
    ok = ok && r.pass;
    detail += r.identity + "=";
    detail += std::isnan(r.observed_order) || r.expected_order == 0.0
                  ? fmt("%.2g", r.residual.back())
                  : "order " + fmt("%.2f", r.observed_order);
    detail += r.pass ? "; " : " (fail); ";
  }
  report(2, ok && secs <= 120.0, secs, detail);
}

void hierarchy_scaling() {
  const auto t0 = Clock::now();
  ExperimentConfig c =
      parse_config("mode = sweep\ngamma = 0.5\nN = 4\nt_end = 50\ndx = 0.08\nsweep_grids = 2\n");
  const SweepOutcome s = sweep_study(c, threads);
  const double secs = seconds_since(t0);
  for (const auto& g : s.runs)
    for (const auto& r : g) max_speed_all = std::max(max_speed_all, r.result.max_speed);
  std::string detail;
  bool slope_ok = true, var_ok = true, c1_ok = true;
  for (std::size_t g = 0; g < s.fits.size(); ++g) {
    const SweepFit& f = s.fits[g];
    slope_ok = slope_ok && std::abs(f.slope_E2 - 2.0) <= 0.1;
    var_ok = var_ok && f.Eb2_variation <= 0.1;
    c1_ok = c1_ok && f.energy1.C1 > 0.0 && f.energy2.C1 > 0.0;
    detail += "grid " + std::to_string(g) + ": slope " + fmt("%.3f", f.slope_E2) +
              ", Eb variation " + fmt("%.3f", f.Eb2_variation) + ", C1 " +
              fmt("%.3g", f.energy1.C1) + "/" + fmt("%.3g", f.energy2.C1) + "; ";
  }
  for (std::size_t g = 1; g < s.fits.size(); ++g)
    for (auto pick : {&SweepFit::energy1, &SweepFit::energy2}) {
      const double r = (s.fits[g].*pick).C1 / (s.fits[0].*pick).C1;
      c1_ok = c1_ok && r >= 0.5 && r <= 2.0;
    }
  detail += std::string("slope ") + (slope_ok ? "ok" : "fail") + ", variation " +
            (var_ok ? "ok" : "fail") + ", C1 " + (c1_ok ? "ok" : "fail");
  report(3, s.ok && secs <= 600.0, secs, detail);
}

void global_existence() {
  const auto t0 = Clock::now();
  ExperimentConfig c = parse_config("delta = 0.05\nt_end = 100\ndx = 0.04\nN = 4\n");
  const RunOutcome o = execute_run(c, c.family(), c.grid(0));
  const double secs = seconds_since(t0);
  max_speed_all = std::max(max_speed_all, o.result.max_speed);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& m : o.margins) margin = std::min({margin, m.L, m.Lb});
  const bool blew = o.result.blowup_time.has_value();
  const double gmin = std::min(o.summary.min_g, o.result.min_g);
  report(4, !blew && gmin >= 0.5 && margin >= 0.0 && secs <= 300.0, secs,
         std::string(blew ? "blow-up" : "no blow-up") + "; min g " + fmt("%.4f", gmin) +
             "; min Sobolev margin " + fmt("%.3g", margin) + "; M " +
             fmt("%.4g", std::sqrt(o.M2)));
}

void blowup_regime() {
  const auto t0 = Clock::now();
  DataFamily fam;
  fam.delta = 1.0;
  fam.f = ProfileSpec::poly_gaussian(1.0, {3, 4});
  fam.fb = ProfileSpec::poly_gaussian(1.0, {-3, 4});
  std::vector<Grid1D> grids;
  for (std::size_t n : {401, 801, 1601, 3201}) grids.push_back(Grid1D::covering(-10, 10, n));
  const BlowupStudy s = blowup_study(fam, grids, 2.0, EvolverOptions{}, 0.05, threads);
  const double secs = seconds_since(t0);
  bool shrink = !s.diff_ratios.empty();
  std::string detail = "times";
  for (const auto& l : s.levels) detail += " " + fmt("%.5f", l.time);
  detail += "; ratios";
  for (double r : s.diff_ratios) {
    detail += " " + fmt("%.2f", r);
    shrink = shrink && r >= 2.0;
  }
  detail += std::string("; focusing ") + (s.focusing ? "yes" : "no") + "; criterion " +
            (s.criterion.pass ? "holds" : "violated");
  report(5, !s.criterion.pass && s.detected_all && shrink && s.focusing && secs <= 300.0, secs,
         detail);
}

void criterion_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1, 1);
  std::uniform_int_distribution<int> len(1, 200);
  int agree = 0, passes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng);
    std::vector<double> lm(n), lp(n);
    for (int i = 0; i < n; ++i) {
      lm[i] = -0.5 + 0.5 * U(rng);
      lp[i] = (trial % 2 ? 0.5 : -0.2) + 0.5 * U(rng);
    }
    const auto r = check_kong_tsuji(lm, lp);
    bool brute = true;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) brute = brute && lp[j] - lm[i] > r.threshold;
    for (int i = 0; i < n; ++i) brute = brute && lp[i] - lm[i] > r.threshold;
    agree += r.pass == brute;
    passes += r.pass;
  }
  report(6, agree == 200, seconds_since(t0),
         std::to_string(agree) + "/200 agree (" + std::to_string(passes) + " satisfy)");
}

void trace_induction() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  double worst_order = std::numeric_limits<double>::infinity();
  double min_den = std::numeric_limits<double>::infinity();
  for (double delta : {0.1, 0.3}) {
    ExperimentConfig c = parse_config("dx = 0.1\nt_end = 1\nN = 3\n");
    c.f = ProfileSpec::gaussian(1.0, 0.5);
    std::vector<Grid1D> grids;
    for (int l = 0; l < 3; ++l) grids.push_back(c.grid(l));
    const TraceStudy s = trace_study(c.family(delta), grids, 3, 3, evolver_options(c), threads, 1.8);
    ok = ok && s.ok;
    min_den = std::min(min_den, s.min_denominator);
    for (const auto& r : s.rows) {
      if (r.l_disc.back() >= 1e-11) worst_order = std::min(worst_order, r.l_order);
      if (r.lb_disc.back() >= 1e-11) worst_order = std::min(worst_order, r.lb_order);
    }
  }
  // Denominator on the other fixtures, including the blow-up one.
  for (const DataFamily& fam :
       {DataFamily{0.5, 0.05, ProfileSpec::bump(1.0, 0.0, 2.0), ProfileSpec::gaussian(1.0)},
        DataFamily{0.5, 1.0, ProfileSpec::poly_gaussian(1.0, {3, 4}),
                   ProfileSpec::poly_gaussian(1.0, {-3, 4})}}) {
    const Grid1D g = Grid1D::covering(-10, 10, 801);
    min_den = std::min(min_den, higher_order_traces(fam, 3, g.points()).min_denominator);
  }
  ok = ok && min_den >= 4.0;
  detail = "worst row order " + fmt("%.2f", worst_order) + "; min denominator " + fmt("%.4f", min_den);
  report(7, ok, seconds_since(t0), detail);
}

double nested_domain_difference() {
  DataFamily fam;
  fam.delta = 0.2;
  fam.f = ProfileSpec::gaussian(1.0, 0.5);
  fam.fb = ProfileSpec::gaussian(1.0);
  const double dx = 0.05, T = 4.0;
  const Grid1D small(-14, dx, 561), large(-28, dx, 1121);
  auto evolve = [&](const Grid1D& g, FieldState s) {
    Evolver ev(g, std::move(s), EvolverOptions{});
    while (ev.state().t < T - 1e-12) ev.advance(std::min(ev.next_dt(), T - ev.state().t));
    max_speed_all = std::max(max_speed_all, ev.max_speed_seen());
    return ev.state();
  };
  const FieldState a = evolve(small, init_state(fam, small));
  FieldState b0 = init_state(fam, large);
  const double shift = build_data(fam, large.x0).F(small.x0);
  for (double& v : b0.phi) v -= shift;
  const FieldState b = evolve(large, std::move(b0));
  double diff = 0.0;
  for (std::size_t i = 0; i < small.n; ++i) {
    const std::size_t j = i + 280;
    diff = std::max({diff, std::abs(a.w[i] - b.w[j]), std::abs(a.p[i] - b.p[j]),
                     std::abs(a.phi[i] - b.phi[j])});
  }
  return diff;
}

void causality() {
  const auto t0 = Clock::now();
  const double diff = nested_domain_difference();
  report(8, max_speed_all <= 1.0 + 1e-12 && diff <= 1e-9, seconds_since(t0),
         "max speed " + fmt("%.15f", max_speed_all) + "; nested-domain difference " +
             fmt("%.3g", diff));
}

}  // namespace

int main() {
  threads = int(std::max(1u, std::thread::hardware_concurrency()));
  const std::pair<int, void (*)()> steps[] = {
      {1, travelling_wave}, {2, identity_suite},   {3, hierarchy_scaling}, {4, global_existence},
      {5, blowup_regime},   {6, criterion_oracle}, {7, trace_induction},   {8, causality}};
  for (const auto& [id, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, 0.0, std::string("error: ") + e.what());
    }
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
