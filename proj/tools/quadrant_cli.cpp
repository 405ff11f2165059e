#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "output.hpp"
#include "quadrant/asymptotics.hpp"
#include "quadrant/chains.hpp"
#include "quadrant/error.hpp"
#include "quadrant/green.hpp"
#include "quadrant/kernel.hpp"
#include "quadrant/model_io.hpp"
#include "quadrant/simulate.hpp"

using namespace quadrant;
using cli::num;

namespace {

struct Config {
  std::string command;
  std::string model;
  std::uint64_t seed = 1;
  long long qmax = 1'000'000;
  double tol = 1e-12;
  long window = 0;
  std::string csv, svg;

  std::string axis = "x";
  std::string source = "0,0";
  std::string ref = "0,0";
  std::string start = "0,0";
  std::string targets;
  std::string method = "exact";
  std::vector<std::string> times{"tau", "tau1"};
  long steps = 20000;
  long reps = 2000;
  bool fluid = false;
  double eps = 0.1;
  int quad = 256;
  long fixed = -1;
  long from = 10, to = 40;
  double gamma = -1.0;
  long smin = 20, smax = 60;
  long spectrum_n = 6;
};

State parse_state(const std::string& s) {
  std::istringstream in(s);
  State st;
  char comma = 0;
  if (!(in >> st.i >> comma >> st.j) || comma != ',' || st.i < 0 || st.j < 0 || !(in >> std::ws).eof())
    throw ValidationError("expected a state 'i,j' with i, j >= 0, got '" + s + "'");
  return st;
}

std::vector<State> read_targets(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open targets file " + path);
  std::vector<State> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    if (!std::isdigit(static_cast<unsigned char>(line[p]))) {
      if (out.empty()) continue;  // header
      throw ParseError("bad target line '" + line + "'", lineno, int(p) + 1);
    }
    std::string t = line.substr(p);
    while (!t.empty() && (t.back() == '\r' || t.back() == ' ')) t.pop_back();
    try {
      out.push_back(parse_state(t));
    } catch (const ValidationError&) {
      throw ParseError("bad target line '" + line + "'", lineno, int(p) + 1);
    }
  }
  if (out.empty()) throw ValidationError("targets file " + path + " lists no states");
  return out;
}

std::vector<std::string> comments(const Config& c, const QuadrantModel& m) {
  return {fmt::format("quadrant {}", QUADRANT_VERSION),
          fmt::format("model {} hash {:016x}", m.name().empty() ? "-" : m.name(), m.hash()),
          fmt::format("seed {}", c.seed), fmt::format("command {}", c.command)};
}

void emit(const Config& c, const cli::Csv& csv) {
  if (!c.csv.empty()) csv.write(c.csv);
}

void emit(const Config& c, const cli::SvgPlot& svg) {
  if (!c.svg.empty()) svg.write(c.svg);
}

void line(const std::string& key, const std::string& value) {
  std::cout << fmt::format("{:<14}{}\n", key, value);
}

KernelOptions kernel_options(const Config& c) { return {c.qmax, c.tol}; }

GreenOptions green_options(const Config& c, std::vector<State> targets, double gap = 1e-8) {
  GreenOptions o;
  if (c.window > 0) o.initial_window = c.window;
  o.gap_tolerance = gap;
  o.targets = std::move(targets);
  return o;
}

EscapeOptions escape_options(const Config& c) {
  EscapeOptions o;
  if (c.window > 0) o.initial_window = c.window;
  return o;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Config& c) {
  const auto m = read_model(c.model);
  auto report = validate_model(m);
  if (report.structural_ok()) check_speeds(m, report);
  std::cout << report.to_text();
  std::cout << (report.ok() ? "model OK\n" : "model INVALID\n");
  return report.ok() ? 0 : 2;
}

int cmd_kernel(const Config& c) {
  const auto m = load_model(c.model);
  const auto k = analyze_kernel(m, kernel_options(c));
  const std::vector<std::pair<std::string, std::string>> rows{
      {"x1", num(k.x1)},     {"y1", num(k.y1)}, {"t0", num(k.t0)},
      {"gamma0", num(k.gamma0)}, {"a", num(k.a)}, {"b", num(k.b)},
      {"y0_radius", num(k.y0_radius)}, {"verdict", k.verdict.to_string()}};
  cli::Csv csv(comments(c, m));
  csv.header({"quantity", "value"});
  for (const auto& [key, v] : rows) {
    line(key, v);
    csv.row({key, v});
  }
  emit(c, csv);
  return 0;
}

int cmd_chains(const Config& c) {
  const auto m = load_model(c.model);
  if (c.axis != "x" && c.axis != "y") throw ValidationError("--axis must be x or y");
  const Axis axis = c.axis == "x" ? Axis::X : Axis::Y;
  const auto sol = solve_chain(m, axis);
  const double rate = std::log(sol.tail.root);
  line("axis", c.axis);
  line("states", std::to_string(sol.L + 1));
  line("V", num(sol.V));
  line("A", num(sol.tail.A()));
  line("A_fit", num(sol.tail.A_fit));
  line("rate", num(rate));
  line("slope", num(sol.tail.slope));
  line("residual", num(sol.residual));
  for (long k = 0; k < std::min<long>(5, long(sol.pi.size())); ++k)
    line(fmt::format("pi({})", k), num(sol.pi[k]));
  auto cm = comments(c, m);
  cm.push_back(fmt::format("axis {} V {} A {} rate {} root {}", c.axis, num(sol.V), num(sol.tail.A()),
                           num(rate), num(sol.tail.root)));
  cli::Csv csv(cm);
  csv.header({"state", "mass"});
  for (long k = 0; k <= sol.L; ++k) csv.row({std::to_string(k), num(sol.pi[k])});
  emit(c, csv);
  cli::SvgPlot svg("stationary law of the induced chain", "state", "mass", true);
  std::vector<double> x, y;
  for (long k = 0; k <= sol.L; ++k) {
    x.push_back(double(k));
    y.push_back(sol.pi[k]);
  }
  svg.series("pi", x, y);
  emit(c, svg);
  return 0;
}

int cmd_simulate(const Config& c) {
  const auto m = load_model(c.model);
  cli::Csv csv(comments(c, m));
  if (c.fluid) {
    csv.header({"axis", "n", "replicas", "slope", "stderr", "V"});
    for (Axis a : {Axis::X, Axis::Y}) {
      const auto est = fluid_limit_experiment(m, a, c.steps, c.reps, c.seed);
      const double V = solve_chain(m, a).V;
      line(fmt::format("slope {}", to_string(a)), fmt::format("{} +- {} (V = {})", num(est.mean), num(est.stderr_), num(V)));
      csv.row({to_string(a), std::to_string(c.steps), std::to_string(est.replicas), num(est.mean),
               num(est.stderr_), num(V)});
    }
    emit(c, csv);
    return 0;
  }
  std::vector<HittingSpec> specs;
  for (const auto& t : c.times) specs.push_back(HittingSpec::parse(t));
  ReplicaConfig rc;
  rc.start = parse_state(c.start);
  rc.max_steps = c.steps;
  rc.replicas = c.reps;
  rc.seed = c.seed;
  const auto rep = hitting_times(m, specs, rc);
  csv.header({"time", "replicas", "finite", "censored", "mean", "stderr"});
  std::cout << fmt::format("{:<12}{:>9}{:>9}{:>9}{:>16}{:>14}\n", "time", "reps", "finite", "censored", "mean", "stderr");
  for (const auto& s : rep.stats) {
    std::cout << fmt::format("{:<12}{:>9}{:>9}{:>9}{:>16.8g}{:>14.6g}\n", s.spec.label(), s.replicas,
                             s.finite, s.censored, s.mean, s.stderr_);
    csv.row({s.spec.label(), std::to_string(s.replicas), std::to_string(s.finite),
             std::to_string(s.censored), num(s.mean), num(s.stderr_)});
  }
  emit(c, csv);
  return 0;
}

int cmd_green(const Config& c) {
  const auto m = load_model(c.model);
  const State src = parse_state(c.source);
  const auto targets = read_targets(c.targets);
  cli::Csv csv(comments(c, m));
  csv.header({"i", "j", "value", "error"});
  auto out = [&](State t, double v, double e) {
    std::cout << fmt::format("({},{})  {:.12g}  +- {:.3g}\n", t.i, t.j, v, e);
    csv.row({std::to_string(t.i), std::to_string(t.j), num(v), num(e)});
  };
  if (c.method == "exact") {
    const auto table = green_exact(m, src, green_options(c, targets));
    for (const auto& t : targets) out(t, table.value(t.i, t.j), table.error_gap(t.i, t.j));
  } else if (c.method == "mc") {
    for (const auto& e : green_mc(m, src, targets, c.steps, c.reps, c.seed)) out(e.target, e.mean, e.half_width);
  } else if (c.method == "contour") {
    for (const auto& t : targets)
      if (t.i < m.k0() || t.j < m.k0()) throw ValidationError("contour targets need i, j >= k0");
    const auto table = green_exact(m, src, green_options(c, {}));
    const GeneratingFunctions gens(m, table);
    const ContourOracle oracle(m, gens, c.eps, c.quad);
    for (const auto& t : targets) {
      const double v = oracle.value(t.i, t.j);
      out(t, v, std::abs(oracle.imaginary(t.i, t.j)));
    }
  } else {
    throw ValidationError("--method must be exact, mc or contour");
  }
  emit(c, csv);
  return 0;
}

int cmd_thm1(const Config& c) {
  const auto m = load_model(c.model);
  const auto in = prepare_asymptotics(m, kernel_options(c));
  if (c.axis != "x" && c.axis != "y") throw ValidationError("--axis must be x or y");
  const Axis axis = c.axis == "x" ? Axis::X : Axis::Y;
  const State src = parse_state(c.source);
  const long fixed = c.fixed >= 0 ? c.fixed : m.k0();
  std::vector<State> pts;
  for (long k = c.from; k <= c.to; ++k) pts.push_back(axis == Axis::X ? State{fixed, k} : State{k, fixed});
  const auto table = green_exact(m, src, green_options(c, pts, 1e-12));
  const auto esc = escape_exact(m, {src}, in.kernel.t0, escape_options(c))[0];
  const auto r = verify_thm1(table, in, esc, axis, fixed, c.from, c.to);
  line("axis", c.axis);
  line("fixed", std::to_string(fixed));
  line("escape", num(r.escape));
  line("limit", num(r.limit));
  line("slope", num(r.slope));
  line("decay", num(r.decay));
  line("pass", r.pass ? "yes" : "no");
  cli::Csv csv(comments(c, m));
  csv.header({"index", "green", "limit", "residual", "gap"});
  std::vector<double> x;
  for (std::size_t k = 0; k < r.index.size(); ++k) {
    csv.row({std::to_string(r.index[k]), num(r.green[k]), num(r.limit), num(r.residual[k]), num(r.gap[k])});
    x.push_back(double(r.index[k]));
  }
  emit(c, csv);
  cli::SvgPlot svg("boundary residual |g - limit|", axis == Axis::X ? "j" : "i", "residual", true);
  svg.series("residual", x, r.residual);
  svg.series("window gap", x, r.gap);
  emit(c, svg);
  return r.pass ? 0 : 1;
}

int cmd_thm2(const Config& c) {
  const auto m = load_model(c.model);
  const auto in = prepare_asymptotics(m, kernel_options(c));
  const State src = parse_state(c.source);
  const double gamma = c.gamma >= 0 ? c.gamma : in.kernel.gamma0;
  const auto table = green_exact(m, src, green_options(c, ray_points(gamma, c.smin, c.smax), 1e-12));
  const auto esc = escape_exact(m, {src}, in.kernel.t0, escape_options(c))[0];
  const auto r = verify_thm2(table, in, esc, gamma, c.smin, c.smax);
  line("gamma", num(gamma));
  line("targets", std::to_string(r.targets.size()));
  line("max |ratio-1|", num(r.max_deviation));
  line("pass", r.pass ? "yes" : "no");
  cli::Csv csv(comments(c, m));
  csv.header({"i", "j", "green", "term1", "term2", "ratio"});
  std::vector<double> x, pred;
  for (std::size_t k = 0; k < r.targets.size(); ++k) {
    const auto& t = r.targets[k];
    csv.row({std::to_string(t.i), std::to_string(t.j), num(r.green[k]), num(r.term1[k]), num(r.term2[k]), num(r.ratio[k])});
    x.push_back(double(t.i + t.j));
    pred.push_back(r.term1[k] + r.term2[k]);
  }
  emit(c, csv);
  cli::SvgPlot svg("Green function along a ray", "i + j", "value", true);
  svg.series("green", x, r.green);
  svg.series("term1 + term2", x, pred);
  emit(c, svg);
  return r.pass ? 0 : 1;
}

void spectrum_rows(cli::Csv& csv, const MartinLimitSet& s) {
  for (std::size_t k = 0; k < s.u.size(); ++k) csv.row({"spectrum", "", "", num(s.exponent[k]), "", num(s.values[k])});
}

void print_spectrum(const MartinLimitSet& s) {
  line("verdict", s.rational ? fmt::format("rational, m0 = {}", s.m0) : "irrational");
  line("topology", s.topology);
  line("points", std::to_string(s.u.size()));
  if (s.stride > 1) line("stride", std::to_string(s.stride));
  line("limit u->0", num(s.limit_low));
  line("limit u->inf", num(s.limit_high));
  line("monotone", s.monotone ? "yes" : "no");
  line("bracketed", s.bracketed ? "yes" : "no");
}

int cmd_thm3(const Config& c) {
  const auto m = load_model(c.model);
  const auto in = prepare_asymptotics(m, kernel_options(c));
  Thm3Options o;
  o.s_min = c.smin;
  o.s_max = c.smax;
  o.spectrum_window = c.spectrum_n;
  if (c.window > 0) o.green.initial_window = o.escape.initial_window = c.window;
  const auto r = verify_thm3(m, in, parse_state(c.source), parse_state(c.ref), o);
  line("gamma above", num(r.above.gamma));
  line("  error", num(r.above.max_rel_error));
  line("gamma below", num(r.below.gamma));
  line("  error", num(r.below.max_rel_error));
  print_spectrum(r.spectrum);
  line("pass", r.pass ? "yes" : "no");
  cli::Csv csv(comments(c, m));
  csv.header({"part", "i", "j", "exponent", "observed", "predicted"});
  cli::SvgPlot svg("Martin kernel against j - i t0", "j - i t0", "kernel", false);
  for (const MartinRayCheck* ray : {&r.above, &r.below}) {
    std::vector<double> x;
    for (std::size_t k = 0; k < ray->targets.size(); ++k) {
      const auto& t = ray->targets[k];
      const double e = double(t.j) - double(t.i) * in.kernel.t0;
      x.push_back(e);
      csv.row({to_string(ray->kind), std::to_string(t.i), std::to_string(t.j), num(e), num(ray->kernel[k]),
               num(ray->predicted[k])});
    }
    svg.series(to_string(ray->kind), x, ray->kernel);
  }
  spectrum_rows(csv, r.spectrum);
  svg.series("spectrum K(y1^e)", r.spectrum.exponent, r.spectrum.values);
  emit(c, csv);
  emit(c, svg);
  return r.pass ? 0 : 1;
}

int cmd_spectrum(const Config& c) {
  const auto m = load_model(c.model);
  const auto in = prepare_asymptotics(m, kernel_options(c));
  const State src = parse_state(c.source), ref = parse_state(c.ref);
  const auto esc = escape_exact(m, {src, ref}, in.kernel.t0, escape_options(c));
  const auto s = boundary_spectrum(in, {esc[0], esc[1]}, c.spectrum_n);
  print_spectrum(s);
  cli::Csv csv(comments(c, m));
  csv.header({"exponent", "u", "value"});
  for (std::size_t k = 0; k < s.u.size(); ++k) csv.row({num(s.exponent[k]), num(s.u[k]), num(s.values[k])});
  emit(c, csv);
  cli::SvgPlot svg("limit Martin kernels at gamma0", "log u / log y1", "kernel", false);
  svg.series("K(u)", s.exponent, s.values);
  emit(c, svg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Reflected random walks in the quadrant: kernels, chains, Green functions, Martin boundary"};
  app.set_version_flag("--version", std::string(QUADRANT_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", c.seed, "Monte Carlo seed");
  app.add_option("--qmax", c.qmax, "largest denominator for the t0 verdict")->check(CLI::PositiveNumber);
  app.add_option("--tol", c.tol, "tolerance for the t0 verdict")->check(CLI::PositiveNumber);
  app.add_option("--window", c.window, "initial side of the Green / escape window")->check(CLI::PositiveNumber);
  app.add_option("--csv", c.csv, "write a CSV table");
  app.add_option("--svg", c.svg, "write an SVG plot");

  auto model_arg = [&](CLI::App* s) {
    s->add_option("model", c.model, "model file or builtin:<name>")->required();
  };

  auto* validate = app.add_subcommand("validate", "check a model file");
  model_arg(validate);

  auto* kernel = app.add_subcommand("kernel", "kernel roots, critical angle, t0 verdict");
  model_arg(kernel);

  auto* chains = app.add_subcommand("chains", "stationary law of an induced chain");
  model_arg(chains);
  chains->add_option("--axis", c.axis, "x or y")->check(CLI::IsMember({"x", "y"}));

  auto* simulate = app.add_subcommand("simulate", "hitting times or fluid-limit slopes by Monte Carlo");
  model_arg(simulate);
  simulate->add_option("--start", c.start, "start state i,j");
  simulate->add_option("--steps", c.steps, "step horizon")->check(CLI::PositiveNumber);
  simulate->add_option("--reps", c.reps, "replicas")->check(CLI::Range(2L, 100'000'000L));
  simulate->add_option("--time", c.times, "hitting time (repeatable): tau, tau1, tau(k,l), tau1(k,l), T1(k), T1k:k, Tk:k, tau2(k)");
  simulate->add_flag("--fluid", c.fluid, "estimate the fluid-limit slopes instead");

  auto* green = app.add_subcommand("green", "Green function at listed targets");
  model_arg(green);
  green->add_option("--source", c.source, "source state i,j");
  green->add_option("--targets", c.targets, "CSV file of i,j lines")->required();
  green->add_option("--method", c.method, "exact, mc or contour")->check(CLI::IsMember({"exact", "mc", "contour"}));
  green->add_option("--steps", c.steps, "Monte Carlo horizon")->check(CLI::PositiveNumber);
  green->add_option("--reps", c.reps, "Monte Carlo replicas")->check(CLI::Range(2L, 100'000'000L));
  green->add_option("--eps", c.eps, "contour radius 1 - eps")->check(CLI::Range(1e-6, 0.999));
  green->add_option("--quad", c.quad, "quadrature nodes per circle")->check(CLI::Range(8, 8192));

  auto* verify = app.add_subcommand("verify", "numerical checks of the asymptotic theorems");
  verify->require_subcommand(1);
  verify->fallthrough();
  auto* thm1 = verify->add_subcommand("thm1", "boundary asymptotics");
  model_arg(thm1);
  thm1->add_option("--source", c.source, "source state i,j");
  thm1->add_option("--axis", c.axis, "x: fixed i, j grows; y: fixed j, i grows")->check(CLI::IsMember({"x", "y"}));
  thm1->add_option("--fixed", c.fixed, "fixed coordinate (default k0)")->check(CLI::NonNegativeNumber);
  thm1->add_option("--from", c.from, "first index")->check(CLI::NonNegativeNumber);
  thm1->add_option("--to", c.to, "last index")->check(CLI::NonNegativeNumber);
  auto* thm2 = verify->add_subcommand("thm2", "interior asymptotics along a ray");
  model_arg(thm2);
  thm2->add_option("--source", c.source, "source state i,j");
  thm2->add_option("--gamma", c.gamma, "ray angle in radians (default gamma0)")->check(CLI::Range(0.0, 1.5707963));
  thm2->add_option("--smin", c.smin, "smallest i + j")->check(CLI::NonNegativeNumber);
  thm2->add_option("--smax", c.smax, "largest i + j")->check(CLI::PositiveNumber);
  auto* thm3 = verify->add_subcommand("thm3", "Martin kernels off and on the critical angle");
  model_arg(thm3);
  thm3->add_option("--source", c.source, "source state i,j")->default_str("3,2");
  thm3->add_option("--ref", c.ref, "reference state i,j");
  thm3->add_option("--smin", c.smin, "smallest i + j")->check(CLI::NonNegativeNumber);
  thm3->add_option("--smax", c.smax, "largest i + j")->check(CLI::PositiveNumber);
  thm3->add_option("--n", c.spectrum_n, "spectrum window")->check(CLI::Range(1L, 1000L));

  auto* spectrum = app.add_subcommand("spectrum", "limit Martin kernels at the critical angle");
  model_arg(spectrum);
  spectrum->add_option("--source", c.source, "source state i,j")->default_str("3,2");
  spectrum->add_option("--ref", c.ref, "reference state i,j");
  spectrum->add_option("--n", c.spectrum_n, "window in powers of y1")->check(CLI::Range(1L, 1000L));

  // thm3 and spectrum default to a source away from the reference.
  thm3->preparse_callback([&](std::size_t) { c.source = "3,2"; });
  spectrum->preparse_callback([&](std::size_t) { c.source = "3,2"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return int(ErrorKind::Validation);
  }

  try {
    if (validate->parsed()) return c.command = "validate", cmd_validate(c);
    if (kernel->parsed()) return c.command = "kernel", cmd_kernel(c);
    if (chains->parsed()) return c.command = "chains", cmd_chains(c);
    if (simulate->parsed()) return c.command = "simulate", cmd_simulate(c);
    if (green->parsed()) return c.command = "green", cmd_green(c);
    if (thm1->parsed()) return c.command = "verify thm1", cmd_thm1(c);
    if (thm2->parsed()) return c.command = "verify thm2", cmd_thm2(c);
    if (thm3->parsed()) return c.command = "verify thm3", cmd_thm3(c);
    if (spectrum->parsed()) return c.command = "spectrum", cmd_spectrum(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(ErrorKind::Numeric);
  }
  return int(ErrorKind::Validation);
}
