// twostage: command-line front end for the simulation and bound studies.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "checks.hpp"
#include "report.hpp"
#include "twostage/critical.hpp"
#include "twostage/engine.hpp"
#include "twostage/errors.hpp"
#include "twostage/meanfield.hpp"
#include "twostage/replicas.hpp"
#include "twostage/saw.hpp"

#ifndef TWOSTAGE_VERSION
#define TWOSTAGE_VERSION "0.0.0"
#endif

using namespace twostage;
using namespace twostage::cli;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kValidation = 2, kBracket = 3 };

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string format = "csv";
  std::string output = "-";
  bool record_time = false;
};

struct Rates {
  double lambda = 0.5;
  double gamma = 1.0;
  double delta = 1.0;
  ProcessParams params() const { return {lambda, gamma, delta}; }
};

struct ProxyOpts {
  double horizon = 100.0;
  std::size_t cap = 0;  // 0 = dimension default
  int radius = 50;
  SurvivalProxy resolve(int d) const {
    SurvivalProxy p = SurvivalProxy::defaults(d);
    p.horizon = horizon;
    p.box_radius = radius;
    if (cap > 0) p.cap = cap;
    return p;
  }
};

void add_rates(CLI::App* sub, Rates& r, bool with_lambda) {
  if (with_lambda) sub->add_option("--lambda", r.lambda, "infection rate")->capture_default_str();
  sub->add_option("--gamma", r.gamma, "maturation rate")->capture_default_str();
  sub->add_option("--delta", r.delta, "extra semi-infected recovery rate")->capture_default_str();
}

void add_proxy(CLI::App* sub, ProxyOpts& p) {
  sub->add_option("--horizon", p.horizon, "survival horizon T")->capture_default_str();
  sub->add_option("--cap", p.cap, "active-site cap counted as survival (0: 5000, or 2000 for d >= 10)")
      ->capture_default_str();
  sub->add_option("--radius", p.radius, "box radius L")->capture_default_str();
}

void echo_rates(Report& r, const ProcessParams& p, bool with_lambda) {
  if (with_lambda) r.add_meta("lambda", p.lambda);
  r.add_meta("gamma", p.gamma);
  r.add_meta("delta", p.delta);
}

void echo_proxy(Report& r, const SurvivalProxy& p) {
  r.add_meta("horizon", p.horizon);
  r.add_meta("cap", integer(p.cap));
  r.add_meta("radius", static_cast<std::int64_t>(p.box_radius));
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + format_double(xs[i]);
  return s;
}

// ---- simulate ------------------------------------------------------------

struct SimulateCmd {
  std::string kind = "contact";
  int d = 2;
  Rates rates;
  std::string geometry = "box";
  int radius = 50;
  int side = 5;
  std::string init = "origin";
  double horizon = 100.0;
  std::size_t cap = 0;
  std::size_t replicas = 100;

  void attach(CLI::App* sub) {
    sub->add_option("--kind", kind, "contact or sir")->capture_default_str();
    sub->add_option("--d", d, "dimension")->capture_default_str();
    add_rates(sub, rates, true);
    sub->add_option("--geometry", geometry, "box or torus")->capture_default_str();
    sub->add_option("--radius", radius, "box radius L")->capture_default_str();
    sub->add_option("--side", side, "torus side M")->capture_default_str();
    sub->add_option("--init", init, "origin ({O: 2}) or all (every site in state 2)")->capture_default_str();
    sub->add_option("--horizon", horizon, "time horizon")->capture_default_str();
    sub->add_option("--cap", cap, "stop once this many sites are active (0: no cap)")->capture_default_str();
    sub->add_option("--replicas", replicas, "independent replicas")->capture_default_str();
  }

  Report run(const Common& c, unsigned threads) const {
    const ProcessKind k = parse_kind(kind);
    const ProcessParams p = rates.params();
    p.validate();
    if (replicas < 1) throw ParameterError("replicas must be >= 1");
    if (geometry != "box" && geometry != "torus") throw ParameterError("geometry must be box or torus");
    const Geometry g = geometry == "box" ? Geometry::box(d, radius) : Geometry::torus(d, side);
    SparseConfig start;
    if (init == "origin") {
      start.set(Site::origin(d), SiteState::fully_infected);
    } else if (init == "all") {
      start = uniform_config(g, SiteState::fully_infected);
    } else {
      throw ParameterError("init must be origin or all");
    }
    SimulateOptions opts;
    opts.horizon = horizon;
    opts.stop.active_cap = cap;
    opts.keep_final_config = true;

    auto runs = run_replicas<TrajectorySummary>(0, replicas, threads, [&](std::size_t r) {
      Rng rng(c.seed, r);
      return simulate(k, start, p, g, opts, rng);
    });

    Report rep;
    rep.command = "simulate";
    rep.add_meta("kind", to_string(k));
    rep.add_meta("d", static_cast<std::int64_t>(d));
    echo_rates(rep, p, true);
    rep.add_meta("geometry", g.describe());
    rep.add_meta("init", init);
    rep.add_meta("horizon", horizon);
    rep.add_meta("cap", integer(cap));
    rep.add_meta("replicas", integer(replicas));
    rep.columns = {"replica", "survived", "hit_cap", "extinction_time", "end_time", "peak_active", "event_count",
                   "final_active"};
    std::size_t survived = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& s = runs[r];
      survived += s.survived();
      rep.add_row({integer(r), s.survived(), s.hit_cap,
                   s.extinction_time ? Value(*s.extinction_time) : Value(std::monostate{}), s.end_time,
                   integer(s.peak_active), integer(s.event_count), integer(s.final_config.active())});
    }
    const Interval ci = wilson_interval(survived, replicas);
    rep.add_summary("survivals", integer(survived));
    rep.add_summary("p_hat", static_cast<double>(survived) / static_cast<double>(replicas));
    rep.add_summary("ci_low", ci.low);
    rep.add_summary("ci_high", ci.high);
    return rep;
  }
};

// ---- sweep ---------------------------------------------------------------

struct SweepCmd {
  std::string kind = "contact";
  int d = 4;
  Rates rates;
  std::vector<double> lambdas;
  ProxyOpts proxy;
  std::size_t replicas = 2000;

  void attach(CLI::App* sub) {
    sub->add_option("--kind", kind, "contact or sir")->capture_default_str();
    sub->add_option("--d", d, "dimension")->capture_default_str();
    add_rates(sub, rates, false);
    sub->add_option("--lambdas", lambdas, "comma-separated lambda grid")->delimiter(',')->required();
    add_proxy(sub, proxy);
    sub->add_option("--replicas", replicas, "replicas per grid point")->capture_default_str();
  }

  Report run(const Common& c, unsigned threads) const {
    const ProcessKind k = parse_kind(kind);
    ProcessParams p = rates.params();
    p.lambda = 0.0;
    p.validate();
    for (double l : lambdas) ProcessParams{l, p.gamma, p.delta}.validate();
    const SurvivalProxy px = proxy.resolve(d);
    const auto rows = sweep(k, d, p, lambdas, px, replicas, c.seed, threads);

    Report rep;
    rep.command = "sweep";
    rep.add_meta("kind", to_string(k));
    rep.add_meta("d", static_cast<std::int64_t>(d));
    echo_rates(rep, p, false);
    rep.add_meta("lambdas", join(lambdas));
    echo_proxy(rep, px);
    rep.add_meta("replicas", integer(replicas));
    rep.add_meta("lower_bound_lambda", lower_bound_lambda(d, p.gamma, p.delta));
    rep.columns = {"d", "lambda", "p_hat", "ci_low", "ci_high", "trials", "survivals"};
    for (const auto& r : rows) {
      rep.add_row({static_cast<std::int64_t>(d), r.lambda, r.estimate.p_hat, r.estimate.ci95.low, r.estimate.ci95.high,
                   integer(r.estimate.trials), integer(r.estimate.survivals)});
    }
    return rep;
  }
};

// ---- bisect and trend ------------------------------------------------------

struct BisectOpts {
  double eps = 0.02;
  double tol = 0.002;
  std::size_t probe_replicas = 2000;
  std::size_t bracket_replicas = 10000;
  double lambda_max = 10.0;
  ProxyOpts proxy;

  void attach(CLI::App* sub) {
    sub->add_option("--eps", eps, "survival level defining the crossing")->capture_default_str();
    sub->add_option("--tol", tol, "final lambda bracket width")->capture_default_str();
    sub->add_option("--probe-replicas", probe_replicas, "replicas per bisection probe")->capture_default_str();
    sub->add_option("--bracket-replicas", bracket_replicas, "replicas per bracketing probe")->capture_default_str();
    sub->add_option("--lambda-max", lambda_max, "give up bracketing above this lambda")->capture_default_str();
    add_proxy(sub, proxy);
  }

  BisectSettings resolve(int d) const {
    BisectSettings s;
    s.eps = eps;
    s.tol = tol;
    s.probe_replicas = probe_replicas;
    s.bracket_replicas = bracket_replicas;
    s.lambda_max = lambda_max;
    s.proxy = proxy.resolve(d);
    return s;
  }

  void echo(Report& r, const BisectSettings& s) const {
    r.add_meta("eps", s.eps);
    r.add_meta("tol", s.tol);
    r.add_meta("probe_replicas", integer(s.probe_replicas));
    r.add_meta("bracket_replicas", integer(s.bracket_replicas));
    r.add_meta("lambda_max", s.lambda_max);
    r.add_meta("horizon", s.proxy.horizon);
    r.add_meta("cap", proxy.cap > 0 ? integer(proxy.cap) : Value(std::string("auto")));
    r.add_meta("radius", static_cast<std::int64_t>(s.proxy.box_radius));
  }
};

struct BisectCmd {
  std::string kind = "contact";
  int d = 4;
  Rates rates;
  BisectOpts opts;

  void attach(CLI::App* sub) {
    sub->add_option("--kind", kind, "contact or sir")->capture_default_str();
    sub->add_option("--d", d, "dimension")->capture_default_str();
    add_rates(sub, rates, false);
    opts.attach(sub);
  }

  Report run(const Common& c, unsigned threads) const {
    const ProcessKind k = parse_kind(kind);
    const BisectSettings s = opts.resolve(d);
    const CriticalEstimate est = bisect_critical(k, d, rates.gamma, rates.delta, s, c.seed, threads);

    Report rep;
    rep.command = "bisect";
    rep.add_meta("kind", to_string(k));
    rep.add_meta("d", static_cast<std::int64_t>(d));
    echo_rates(rep, rates.params(), false);
    opts.echo(rep, s);
    rep.add_meta("proxy", est.proxy);
    rep.add_meta("lower_bound_lambda", lower_bound_lambda(d, rates.gamma, rates.delta));
    rep.add_meta("target", 1.0 + (1.0 + rates.delta) / rates.gamma);
    rep.columns = {"probe", "role", "d", "lambda", "p_hat", "ci_low", "ci_high", "trials", "survivals"};
    for (std::size_t i = 0; i < est.probes.size(); ++i) {
      const Probe& pr = est.probes[i];
      rep.add_row({integer(i), pr.role, static_cast<std::int64_t>(d), pr.lambda, pr.estimate.p_hat,
                   pr.estimate.ci95.low, pr.estimate.ci95.high, integer(pr.estimate.trials),
                   integer(pr.estimate.survivals)});
    }
    rep.add_summary("lambda_hat", est.lambda_hat);
    rep.add_summary("scaled", est.scaled);
    rep.add_summary("lambda_lo", est.lambda_lo);
    rep.add_summary("lambda_hi", est.lambda_hi);
    rep.add_summary("lambda_ci_low", est.lambda_ci.low);
    rep.add_summary("lambda_ci_high", est.lambda_ci.high);
    rep.add_summary("target", 1.0 + (1.0 + rates.delta) / rates.gamma);
    return rep;
  }
};

struct TrendCmd {
  std::string kind = "contact";
  std::vector<int> dims{4, 6, 8};
  Rates rates;
  BisectOpts opts;

  void attach(CLI::App* sub) {
    sub->add_option("--kind", kind, "contact or sir")->capture_default_str();
    sub->add_option("--dims", dims, "comma-separated ascending dimensions")->delimiter(',')->capture_default_str();
    add_rates(sub, rates, false);
    opts.attach(sub);
  }

  Report run(const Common& c, unsigned threads) const {
    const ProcessKind k = parse_kind(kind);
    if (dims.empty()) throw ParameterError("--dims must not be empty");
    const BisectSettings s = opts.resolve(dims.front());
    const TrendResult t = trend_study(k, dims, rates.gamma, rates.delta, s, c.seed, threads, opts.proxy.cap == 0);

    Report rep;
    rep.command = "trend";
    rep.add_meta("kind", to_string(k));
    std::string ds;
    for (std::size_t i = 0; i < dims.size(); ++i) ds += (i ? ";" : "") + std::to_string(dims[i]);
    rep.add_meta("dims", ds);
    echo_rates(rep, rates.params(), false);
    opts.echo(rep, s);
    rep.add_meta("target", t.target);
    rep.columns = {"d", "lambda_hat", "two_d_lambda_hat", "ci_low", "ci_high", "target", "probes", "proxy"};
    for (const TrendRow& r : t.rows) {
      rep.add_row({static_cast<std::int64_t>(r.d), r.lambda_hat, r.scaled, r.scaled_ci.low, r.scaled_ci.high, t.target,
                   integer(r.detail.probes.size()), r.detail.proxy});
    }
    rep.add_summary("target", t.target);
    rep.add_summary("increases_beyond_ci", integer(t.increases));
    return rep;
  }
};

// ---- ode -----------------------------------------------------------------

struct OdeCmd {
  int d = 5;
  Rates rates{0.3, 1.0, 1.0};
  double t_max = 10.0;
  int steps = 10;

  void attach(CLI::App* sub) {
    sub->add_option("--d", d, "dimension")->capture_default_str();
    add_rates(sub, rates, true);
    sub->add_option("--t-max", t_max, "last sample time")->capture_default_str();
    sub->add_option("--steps", steps, "number of sample intervals")->capture_default_str();
  }

  Report run(const Common&, unsigned) const {
    const ProcessParams p = rates.params();
    p.validate();
    if (d < 1) throw DomainError("dimension must be >= 1");
    if (!(t_max >= 0.0) || steps < 1) throw ParameterError("need t_max >= 0 and steps >= 1");
    const MomentMatrix g = build_moment_matrix(d, p);
    const auto [c1, c2] = eigenvalues(g);

    Report rep;
    rep.command = "ode";
    rep.add_meta("d", static_cast<std::int64_t>(d));
    echo_rates(rep, p, true);
    rep.add_meta("t_max", t_max);
    rep.add_meta("steps", static_cast<std::int64_t>(steps));
    rep.add_meta("lower_bound_lambda", lower_bound_lambda(d, p.gamma, p.delta));
    rep.add_meta("target", 1.0 + (1.0 + p.delta) / p.gamma);
    rep.columns = {"t", "E_zeta", "E_theta"};
    for (int i = 0; i <= steps; ++i) {
      const double t = t_max * i / steps;
      const Moments m = solve_moments(d, p, t);
      rep.add_row({t, m.zeta, m.theta});
    }
    rep.add_summary("G", "[[" + format_double(g.entries[0][0]) + ";" + format_double(g.entries[0][1]) + "];[" +
                              format_double(g.entries[1][0]) + ";" + format_double(g.entries[1][1]) + "]]");
    rep.add_summary("c1_re", c1.real());
    rep.add_summary("c1_im", c1.imag());
    rep.add_summary("c2_re", c2.real());
    rep.add_summary("c2_im", c2.imag());
    rep.add_summary("max_real_eigenvalue", max_real_eigenvalue(d, p));
    rep.add_summary("subcritical", is_subcritical(d, p));
    return rep;
  }
};

// ---- sawbound ------------------------------------------------------------

struct SawboundCmd {
  int d = 12;
  Rates rates{0.0, 1.0, 1.0};
  double theta = 0.0;
  std::size_t n_max = 2000;
  std::size_t replicas = 1000;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* theta_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--d", d, "dimension (>= 3)")->capture_default_str();
    lambda_opt = sub->add_option("--lambda", rates.lambda, "infection rate");
    theta_opt = sub->add_option("--theta", theta, "lambda = theta (1 + gamma + delta) / (2 d gamma)");
    lambda_opt->excludes(theta_opt);
    add_rates(sub, rates, false);
    sub->add_option("--n-max", n_max, "walk length")->capture_default_str();
    sub->add_option("--replicas", replicas, "independent walk pairs")->capture_default_str();
  }

  Report run(const Common& c, unsigned threads) const {
    if (lambda_opt->count() == 0 && theta_opt->count() == 0) throw ParameterError("give --lambda or --theta");
    ProcessParams p = rates.params();
    if (theta_opt->count() > 0) p.lambda = lambda_from_theta(d, theta, p.gamma, p.delta);
    const SurvivalBound b = estimate_survival_lower_bound(d, p, n_max, replicas, c.seed, threads);
    const WalkShape shape = WalkShape::for_dimension(d);

    Report rep;
    rep.command = "sawbound";
    rep.add_meta("d", static_cast<std::int64_t>(d));
    if (theta_opt->count() > 0) rep.add_meta("theta", theta);
    echo_rates(rep, p, true);
    rep.add_meta("n_max", integer(n_max));
    rep.add_meta("replicas", integer(replicas));
    rep.add_meta("period", static_cast<std::int64_t>(shape.period));
    rep.add_meta("band", static_cast<std::int64_t>(shape.band));
    rep.add_meta("admissible_floor", static_cast<std::int64_t>(shape.admissible_floor()));
    rep.columns = {"n", "mean_weight", "std_error", "bound"};
    for (const BoundPoint& pt : b.convergence) rep.add_row({integer(pt.n), pt.mean_weight, pt.std_error, pt.bound});
    rep.add_summary("lambda", p.lambda);
    rep.add_summary("bound", b.estimate);
    rep.add_summary("ci_low", b.ci.low);
    rep.add_summary("ci_high", b.ci.high);
    rep.add_summary("relative_change", b.relative_change);
    rep.add_summary("top_share", b.top_share);
    rep.add_summary("heavy_tail", b.heavy_tail);
    return rep;
  }
};

// ---- oracle-check ----------------------------------------------------------

struct OracleCheckCmd {
  std::string suite = "all";
  std::size_t replicas = 20000;

  void attach(CLI::App* sub) {
    sub->add_option("--suite", suite, "all, rates, transient, engine, moments, union or containment")
        ->capture_default_str();
    sub->add_option("--replicas", replicas, "Monte Carlo replicas for the engine suite")->capture_default_str();
  }

  Report run(const Common& c, unsigned threads, bool& all_pass) const {
    if (replicas < 1) throw ParameterError("replicas must be >= 1");
    const auto results = run_checks(suite, replicas, c.seed, threads);
    Report rep;
    rep.command = "oracle-check";
    rep.add_meta("suite", suite);
    rep.add_meta("replicas", integer(replicas));
    rep.columns = {"suite", "check", "status", "value", "tolerance", "detail"};
    std::size_t failed = 0;
    for (const auto& r : results) {
      failed += !r.pass;
      rep.add_row({r.suite, r.check, std::string(r.pass ? "pass" : "fail"), r.value, r.tolerance, r.detail});
    }
    rep.add_summary("checks", integer(results.size()));
    rep.add_summary("failed", integer(failed));
    all_pass = failed == 0;
    return rep;
  }
};

// ---- config files ----------------------------------------------------------

// Flat "key = value" lines; '#' starts a comment. Keys are long option names
// without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Config values go in front of the command-line flags, and only for options
// the command line does not set, so flags win over the file.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::set<std::string>& subcommands) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : rest) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> injected;
  for (const auto& [k, v] : read_config(path)) {
    if (given(k)) continue;
    injected.push_back("--" + k + "=" + v);
  }
  // Injected flags go right after the subcommand name, or at the end if there is none.
  std::size_t sub = 0;
  while (sub < rest.size() && !subcommands.contains(rest[sub])) ++sub;
  const std::size_t at = sub < rest.size() ? sub + 1 : rest.size();
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return rest;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage contact process: simulation, thresholds and bounds"};
  app.set_version_flag("--version", TWOSTAGE_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "master seed")->envname("TWOSTAGE_SEED")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads (0: available parallelism)")
      ->envname("TWOSTAGE_THREADS");
  app.add_option("--format", common.format, "csv or jsonl (json-lines)")->capture_default_str();
  app.add_option("--output,-o", common.output, "output file, - for stdout")->capture_default_str();
  app.add_flag("--record-time", common.record_time, "embed the wall-clock time (output is then not reproducible)");
  app.add_option("--config", "flat key = value file; command-line flags take precedence");

  SimulateCmd simulate_cmd;
  SweepCmd sweep_cmd;
  BisectCmd bisect_cmd;
  TrendCmd trend_cmd;
  OdeCmd ode_cmd;
  SawboundCmd sawbound_cmd;
  OracleCheckCmd oracle_cmd;
  auto* sim = app.add_subcommand("simulate", "per-replica trajectory summaries");
  simulate_cmd.attach(sim);
  auto* swp = app.add_subcommand("sweep", "survival probability over a lambda grid");
  sweep_cmd.attach(swp);
  auto* bis = app.add_subcommand("bisect", "empirical critical lambda by bracketing and bisection");
  bisect_cmd.attach(bis);
  auto* trd = app.add_subcommand("trend", "scaled critical values 2 d lambda_hat over dimensions");
  trend_cmd.attach(trd);
  auto* ode = app.add_subcommand("ode", "moment matrix eigenvalues and first-moment trajectories");
  ode_cmd.attach(ode);
  auto* saw = app.add_subcommand("sawbound", "second-moment survival lower bound from walk pairs");
  sawbound_cmd.attach(saw);
  auto* orc = app.add_subcommand("oracle-check", "exact and brute-force cross-checks");
  oracle_cmd.attach(orc);
  for (auto* sub : {sim, swp, bis, trd, ode, saw, orc}) sub->fallthrough();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::set<std::string> names;
    for (const auto* sub : app.get_subcommands({})) names.insert(sub->get_name());
    args = merge_config(std::move(args), names);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    const Format format = parse_format(common.format);
    const unsigned threads = common.threads > 0 ? common.threads : default_threads();
    Report rep;
    bool checks_pass = true;
    if (sim->parsed()) rep = simulate_cmd.run(common, threads);
    if (swp->parsed()) rep = sweep_cmd.run(common, threads);
    if (bis->parsed()) rep = bisect_cmd.run(common, threads);
    if (trd->parsed()) rep = trend_cmd.run(common, threads);
    if (ode->parsed()) rep = ode_cmd.run(common, threads);
    if (saw->parsed()) rep = sawbound_cmd.run(common, threads);
    if (orc->parsed()) rep = oracle_cmd.run(common, threads, checks_pass);

    // Thread count is left out: results do not depend on it.
    std::vector<std::pair<std::string, Value>> head{{"version", std::string(TWOSTAGE_VERSION)},
                                                    {"seed", static_cast<std::int64_t>(common.seed)}};
    if (common.record_time) head.emplace_back("wall_clock", utc_now());
    rep.meta.insert(rep.meta.begin(), head.begin(), head.end());

    if (common.output == "-") {
      rep.write(std::cout, format);
    } else {
      std::ofstream out(common.output);
      if (!out) throw std::runtime_error("cannot open '" + common.output + "' for writing");
      rep.write(out, format);
    }
    return checks_pass ? kOk : kRuntime;
  } catch (const BracketError& e) {
    std::cerr << "bracket error: " << e.what() << '\n';
    return kBracket;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kBracket;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kValidation;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const ContractError& e) {
    std::cerr << "invalid request: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
