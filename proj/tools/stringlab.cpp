// stringlab: command-line driver for the string-equation experiments.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "stringlab/experiment.hpp"

namespace {

const char* kFooter = R"(CONFIG FILE
  Flat "key = value" lines; '#' starts a comment; blank lines ignored.
  Unknown or repeated keys are errors (reported with the line number).
  Lists are comma separated; "none" gives an empty probe list.

  key             default            meaning
  mode            run                overridden by the positional MODE
  x0              auto               left end of the grid; auto = support - (t_end + 2)
  dx              0.04               grid spacing of level 0
  n               auto               points of level 0; auto covers support + (t_end + 2)
  t_end           10                 final time
  cfl             0.4                Courant number, in (0, 0.9]
  eps_ko          0.01               Kreiss-Oliger dissipation strength
  gamma           0.5                weight exponent, in (0, 1)
  delta           0.1                small-family amplitude (run, converge, blowup, tracecheck)
  deltas          0.1,0.05,0.025     sweep list, at least 3 values
  N               4                  derivative order of the energies, in [1, 6]
  f.kind          gaussian           gaussian | bump | polynomial-gaussian
  f.amplitude     1                  (same keys for fb.*: the large profile)
  f.center        0
  f.width         1
  f.coeffs        1                  polynomial coefficients (polynomial-gaussian)
  probes_u        0                  u0 values of the F flux lines x = t - 2 u0
  probes_ub       0                  ub0 values of the Fb flux lines x = 2 ub0 - t
  levels          3                  refinement levels for converge/blowup/tracecheck
  sweep_grids     2                  sweep repeated on dx, dx/2, ...
  report_every    1                  energy output stride in steps
  tracer_spacing  0.1                seed spacing of characteristic tracers
  seed            1                  rng seed (verify); overridden by --seed
  output          out                output directory; overridden by --out

  Level l of a refinement study uses spacing dx / 2^l on the same domain.

OUTPUT FILES (all CSV with a header row; numbers printed with %.12g)
  run:
    criterion.csv   x, lambda_minus, lambda_plus: characteristic speeds of the data
    energy.csv      t: time; k: derivative order; E2, Eb2: order-k energies;
                    F2_<i>, Fb2_<j>: order-k fluxes through probe i of probes_u
                    and probe j of probes_ub accumulated up to t; min_g: minimum
                    of 1 - L phi Lb phi; sobolev_L_margin, sobolev_Lb_margin:
                    1 - (weighted sup) / (Sobolev bound), negative = violated
    summary.csv     key, value: status, grid, blowup_time, blowup_reason,
                    criterion_pass, criterion_gap_min, criterion_order_margin,
                    lambda_star_lo/hi, max_speed, min_g, sup energies and
                    fluxes, M2, sobolev_constant, minimum margins,
                    max_tail_fraction
  sweep:
    sweep.csv       grid, dx, delta, sup_E2, sup_Eb2, sup_F2, sup_Fb2, E2_0,
                    Eb2_0 (initial energies), min_g, blowup (0/1)
    sweep_fit.csv   grid, dx, M2, slope_E2, slope_Eb2 (log-log against delta),
                    Eb2_variation ((max-min)/min), C1_energy1 and rel_rms_energy1
                    (sup Eb2 - Eb2_0 against delta M^4), C1_energy2 and
                    rel_rms_energy2 (sup E2 - E2_0 against delta^3 M^6)
  converge:
    converge.csv    level, dx, n, error_linf (against phi = F(x - t)), order
                    (blank on level 0, n/a when an error is zero), max_speed
  blowup:
    blowup.csv      level, dx, n, detected (0/1), blowup_time (last valid time),
                    reason, diff_ratio (ratio of successive time differences,
                    from level 2), max_speed, min_sep_plus, min_sep_plus_time,
                    min_sep_minus, min_sep_minus_time (tracer focusing)
    blowup_summary.csv  key, value: criterion_pass, criterion_gap_min,
                    criterion_order_margin, detected_all, extrapolated_time,
                    focusing
  verify:
    identities.csv  identity, level, dx, residual, order (observed order on the
                    last level of a refinement identity)
    equivalence.csv contraction, min_ratio, max_ratio, band_lo, band_hi, pass
  tracecheck:
    tracecheck.csv  k1, k2, level, dx, L_discrepancy, Lb_discrepancy (max-norm,
                    relative to the row maximum), L_order, Lb_order (last level)
    tracecheck_summary.csv  key, value: min_denominator, ok

EXIT STATUS
  0 success; 1 error or failed check; 2 blow-up detected.
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments for a quasilinear string equation with small and large data."};
  app.footer(kFooter);
  std::string mode_name, config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = int(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("mode", mode_name, "run | sweep | converge | blowup | verify | tracecheck")
      ->required();
  app.add_option("--config", config_path, "configuration file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "rng seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stringlab::kExitError;
  }

  try {
    const auto mode = stringlab::parse_mode(mode_name);
    if (!mode) throw stringlab::Error("unknown mode '" + mode_name + "'");
    std::ifstream in(config_path);
    if (!in) throw stringlab::Error("cannot read " + config_path);
    std::stringstream text;
    text << in.rdbuf();
    auto cfg = stringlab::parse_config(text.str(), false);
    cfg.mode = *mode;
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.output = out_dir;
    cfg.validate();
    stringlab::CommandContext ctx;
    ctx.out = cfg.output;
    ctx.threads = threads;
    ctx.log = &std::cerr;
    return stringlab::dispatch(cfg, ctx);
  } catch (const stringlab::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "stringlab: " << e.what() << '\n';
  }
  return stringlab::kExitError;
}
