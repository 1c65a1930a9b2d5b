#pragma once
// Flat `key = value` experiment configuration.
//
// Grammar: one assignment per line; `#` starts a comment running to the end
// of the line; blank lines are ignored; keys are case-sensitive; every key
// may appear at most once. Lists are comma-separated; probe lists may be
// `none`. `x0` and `n` accept `auto`, which sizes the domain from the data
// support plus t_end + 2.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stringlab/data_gen.hpp"
#include "stringlab/errors.hpp"
#include "stringlab/grid.hpp"

namespace stringlab {

enum class Mode { run, sweep, converge, blowup, verify, tracecheck };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::run: return "run";
    case Mode::sweep: return "sweep";
    case Mode::converge: return "converge";
    case Mode::blowup: return "blowup";
    case Mode::verify: return "verify";
    case Mode::tracecheck: return "tracecheck";
  }
  return "run";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::run, Mode::sweep, Mode::converge, Mode::blowup, Mode::verify,
                 Mode::tracecheck})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct ExperimentConfig {
  Mode mode = Mode::run;
  std::optional<double> x0;      // auto when empty
  double dx = 0.04;
  std::optional<std::size_t> n;  // auto when empty
  double t_end = 10.0;
  double cfl = 0.4;
  double eps_ko = 0.01;
  double gamma = 0.5;
  double delta = 0.1;
  std::vector<double> deltas{0.1, 0.05, 0.025};
  int N = 4;
  ProfileSpec f = ProfileSpec::gaussian(1.0);
  ProfileSpec fb = ProfileSpec::gaussian(1.0);
  std::vector<double> probes_u{0.0};
  std::vector<double> probes_ub{0.0};
  int levels = 3;           // refinement levels (converge, blowup, tracecheck)
  int sweep_grids = 2;      // sweep repeated on dx, dx/2, ...
  int report_every = 1;     // energy CSV stride in steps
  double tracer_spacing = 0.1;
  std::uint64_t seed = 1;
  std::string output = "out";

  DataFamily family(double d) const {
    DataFamily fam;
    fam.gamma = gamma;
    fam.delta = d;
    fam.f = f;
    fam.fb = fb;
    return fam;
  }
  DataFamily family() const { return family(delta); }

  /// Grid at spacing dx / 2^level honoring the causal margin.
  Grid1D grid(int level = 0) const {
    const auto [lo, hi] = family().support();
    const double margin = t_end + 2.0;
    const double left = x0 ? *x0 : lo - margin;
    const double h = dx / std::pow(2.0, level);
    if (n) {
      const std::size_t m = (*n - 1) * (std::size_t(1) << level) + 1;
      return Grid1D(left, h, m);
    }
    const double right = hi + margin;
    const auto cells = std::size_t(std::ceil((right - left) / dx - 1e-9));
    return Grid1D(left, h, cells * (std::size_t(1) << level) + 1);
  }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma out of (0,1)");
    if (!(cfl > 0.0 && cfl <= 0.9)) throw ValidationError("cfl out of (0,0.9]");
    if (N < 1 || N > 6) throw ValidationError("N out of [1,6]");
    if (!(dx > 0.0)) throw ValidationError("dx must be positive");
    if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
    if (!(eps_ko >= 0.0)) throw ValidationError("eps_ko must be nonnegative");
    if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
    for (double d : deltas)
      if (!(d > 0.0)) throw ValidationError("sweep deltas must be positive");
    if (mode == Mode::sweep && deltas.size() < 3)
      throw ValidationError("sweep needs at least 3 deltas");
    if (mode == Mode::tracecheck && N < 2) throw ValidationError("tracecheck needs N >= 2");
    if (levels < 2 || levels > 8) throw ValidationError("levels out of [2,8]");
    if (sweep_grids < 1 || sweep_grids > 4) throw ValidationError("sweep_grids out of [1,4]");
    if (report_every < 1) throw ValidationError("report_every must be >= 1");
    if (!(tracer_spacing > 0.0)) throw ValidationError("tracer_spacing must be positive");
    if (n && *n < 16) throw ValidationError("n must be at least 16");
    for (const auto* p : {&f, &fb}) {
      if (!(p->width > 0.0)) throw ValidationError("profile width must be positive");
      if (p->coeffs.empty()) throw ValidationError("profile coeffs must be non-empty");
    }
    const auto [lo, hi] = family().support();
    const double margin = t_end + 2.0;
    const Grid1D g = grid();
    if (g.x0 > lo - margin + 1e-9 || g.x_end() < hi + margin - 1e-9)
      throw ValidationError("domain violates the causal margin: need [" +
                            std::to_string(lo - margin) + ", " +
                            std::to_string(hi + margin) + "] inside the grid");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest form that round-trips.
  for (int p = 1; p <= 17; ++p) {
    char s[32];
    std::snprintf(s, sizeof s, "%.*g", p, v);
    if (std::strtod(s, nullptr) == v) return s;
  }
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(v[i]);
  }
  return s;
}

inline double parse_double(const std::string& s, int line) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ParseError(line, "expected a number, got '" + t + "'");
  return v;
}

inline long long parse_int(const std::string& s, int line) {
  const std::string t = trim(s);
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ParseError(line, "expected an integer, got '" + t + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& s, int line,
                                      bool allow_empty = false) {
  std::vector<double> out;
  if (allow_empty && trim(s) == "none") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
  if (out.empty()) throw ParseError(line, "expected a non-empty list");
  return out;
}

}  // namespace detail

/// Parses and validates. ParseError carries the offending line number.
inline ExperimentConfig parse_config(const std::string& text, bool validate = true) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    const std::string s = detail::trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "missing key");
    if (val.empty()) throw ParseError(line, "missing value for '" + key + "'");
    if (seen.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
    seen[key] = line;

    auto profile = [&](ProfileSpec& p, const std::string& field) {
      if (field == "kind") {
        try {
          p.kind = parse_profile_kind(val);
        } catch (const Error&) {
          throw ParseError(line, "unknown profile kind '" + val + "'");
        }
      } else if (field == "amplitude") {
        p.amplitude = detail::parse_double(val, line);
      } else if (field == "center") {
        p.center = detail::parse_double(val, line);
      } else if (field == "width") {
        p.width = detail::parse_double(val, line);
      } else if (field == "coeffs") {
        p.coeffs = detail::parse_list(val, line);
      } else {
        return false;
      }
      return true;
    };

    if (key == "mode") {
      const auto m = parse_mode(val);
      if (!m) throw ParseError(line, "unknown mode '" + val + "'");
      c.mode = *m;
    } else if (key == "x0") {
      if (val == "auto") c.x0.reset();
      else c.x0 = detail::parse_double(val, line);
    } else if (key == "n") {
      if (val == "auto") {
        c.n.reset();
      } else {
        const long long v = detail::parse_int(val, line);
        if (v < 0) throw ParseError(line, "n must be nonnegative");
        c.n = std::size_t(v);
      }
    } else if (key == "dx") {
      c.dx = detail::parse_double(val, line);
    } else if (key == "t_end") {
      c.t_end = detail::parse_double(val, line);
    } else if (key == "cfl") {
      c.cfl = detail::parse_double(val, line);
    } else if (key == "eps_ko") {
      c.eps_ko = detail::parse_double(val, line);
    } else if (key == "gamma") {
      c.gamma = detail::parse_double(val, line);
    } else if (key == "delta") {
      c.delta = detail::parse_double(val, line);
    } else if (key == "deltas") {
      c.deltas = detail::parse_list(val, line);
    } else if (key == "N") {
      c.N = int(detail::parse_int(val, line));
    } else if (key == "probes_u") {
      c.probes_u = detail::parse_list(val, line, true);
    } else if (key == "probes_ub") {
      c.probes_ub = detail::parse_list(val, line, true);
    } else if (key == "levels") {
      c.levels = int(detail::parse_int(val, line));
    } else if (key == "sweep_grids") {
      c.sweep_grids = int(detail::parse_int(val, line));
    } else if (key == "report_every") {
      c.report_every = int(detail::parse_int(val, line));
    } else if (key == "tracer_spacing") {
      c.tracer_spacing = detail::parse_double(val, line);
    } else if (key == "seed") {
      const long long v = detail::parse_int(val, line);
      if (v < 0) throw ParseError(line, "seed must be nonnegative");
      c.seed = std::uint64_t(v);
    } else if (key == "output") {
      c.output = val;
    } else if (key.rfind("f.", 0) == 0 && profile(c.f, key.substr(2))) {
    } else if (key.rfind("fb.", 0) == 0 && profile(c.fb, key.substr(3))) {
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  if (validate) c.validate();
  return c;
}

/// Canonical form: every key, fixed order, shortest round-trip numbers.
inline std::string serialize(const ExperimentConfig& c) {
  using detail::fmt_double;
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << '\n';
  os << "x0 = " << (c.x0 ? fmt_double(*c.x0) : "auto") << '\n';
  os << "dx = " << fmt_double(c.dx) << '\n';
  os << "n = " << (c.n ? std::to_string(*c.n) : "auto") << '\n';
  os << "t_end = " << fmt_double(c.t_end) << '\n';
  os << "cfl = " << fmt_double(c.cfl) << '\n';
  os << "eps_ko = " << fmt_double(c.eps_ko) << '\n';
  os << "gamma = " << fmt_double(c.gamma) << '\n';
  os << "delta = " << fmt_double(c.delta) << '\n';
  os << "deltas = " << detail::fmt_list(c.deltas) << '\n';
  os << "N = " << c.N << '\n';
  for (const auto& [name, p] : {std::pair{"f", &c.f}, std::pair{"fb", &c.fb}}) {
    os << name << ".kind = " << to_string(p->kind) << '\n';
    os << name << ".amplitude = " << fmt_double(p->amplitude) << '\n';
    os << name << ".center = " << fmt_double(p->center) << '\n';
    os << name << ".width = " << fmt_double(p->width) << '\n';
    os << name << ".coeffs = " << detail::fmt_list(p->coeffs) << '\n';
  }
  os << "probes_u = " << detail::fmt_list(c.probes_u) << '\n';
  os << "probes_ub = " << detail::fmt_list(c.probes_ub) << '\n';
  os << "levels = " << c.levels << '\n';
  os << "sweep_grids = " << c.sweep_grids << '\n';
  os << "report_every = " << c.report_every << '\n';
  os << "tracer_spacing = " << fmt_double(c.tracer_spacing) << '\n';
  os << "seed = " << c.seed << '\n';
  os << "output = " << c.output << '\n';
  return os.str();
}

}  // namespace stringlab
