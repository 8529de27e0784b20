// Acceptance run: one PASS/FAIL line per criterion. `--criterion N` runs a
// single criterion; the exit code is 1 if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "twostage/critical.hpp"
#include "twostage/engine.hpp"
#include "twostage/graphical.hpp"
#include "twostage/meanfield.hpp"
#include "twostage/oracle.hpp"
#include "twostage/replicas.hpp"
#include "twostage/saw.hpp"
#include "twostage/stats.hpp"

#ifndef TWOSTAGE_CLI_PATH
#define TWOSTAGE_CLI_PATH "twostage"
#endif

using namespace twostage;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

unsigned threads() { return default_threads(); }

// 1. Rate tables -----------------------------------------------------------

// Expected outgoing transitions of the centre site, written out per state.
std::vector<Transition> expected_rates(ProcessKind kind, SiteState s, int k, const ProcessParams& p) {
  const SiteState out = kind == ProcessKind::contact ? SiteState::healthy : SiteState::recovered;
  switch (s) {
    case SiteState::fully_infected:
      return {{out, 1.0}};
    case SiteState::semi_infected:
      return {{SiteState::fully_infected, p.gamma}, {out, 1.0 + p.delta}};
    case SiteState::healthy:
      if (k == 0) return {};
      return {{SiteState::semi_infected, p.lambda * k}};
    case SiteState::recovered:
      return {};
  }
  return {};
}

Outcome rate_tables() {
  std::size_t rows = 0;
  std::size_t mismatches = 0;
  const std::vector<ProcessParams> grid{{0.1, 2.0, 0.5}, {0.37, 1.0, 1.0}, {1.7, 0.3, 0.0}, {0.0, 1.0, 2.5}};
  auto sorted = [](std::vector<Transition> v) {
    std::sort(v.begin(), v.end(), [](const Transition& a, const Transition& b) { return code(a.target) < code(b.target); });
    return v;
  };
  for (int d : {1, 2, 3}) {
    const Geometry g = Geometry::box(d, 2);
    const Site o = Site::origin(d);
    std::vector<Site> nbrs = g.neighbors(o);
    for (ProcessKind kind : {ProcessKind::contact, ProcessKind::sir}) {
      std::vector<SiteState> states{SiteState::healthy, SiteState::semi_infected, SiteState::fully_infected};
      if (kind == ProcessKind::sir) states.push_back(SiteState::recovered);
      for (const ProcessParams& p : grid) {
        for (SiteState s : states) {
          for (int k = 0; k <= 2 * d; ++k) {
            // k neighbours in state 2; the rest cycle through the other states.
            SparseConfig cfg;
            cfg.set(o, s);
            for (int j = 0; j < 2 * d; ++j) {
              if (j < k) {
                cfg.set(nbrs[j], SiteState::fully_infected);
              } else {
                const int filler = j % (kind == ProcessKind::sir ? 3 : 2);
                cfg.set(nbrs[j], filler == 0 ? SiteState::healthy
                                 : filler == 1 ? SiteState::semi_infected
                                               : SiteState::recovered);
              }
            }
            ++rows;
            if (sorted(site_rates(kind, cfg, o, p, g)) != sorted(expected_rates(kind, s, k, p))) ++mismatches;
          }
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(rows) + " rows, " + std::to_string(mismatches) + " mismatches"};
}

// 2. Ring marginals against uniformization -----------------------------------

Outcome ring_oracle() {
  const Geometry g = Geometry::torus(1, 3);
  const ProcessParams p{0.7, 1.3, 0.4};
  const std::size_t n = 100000;
  const std::vector<double> times{0.5, 1.0, 2.0};
  SparseConfig init;
  init.set(Site{0}, SiteState::fully_infected);
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (ProcessKind kind : {ProcessKind::contact, ProcessKind::sir}) {
    const ExactChain chain = build_exact(kind, g, p);
    SimulateOptions opts;
    opts.horizon = times.back();
    opts.sample_times = times;
    opts.keep_final_config = false;
    auto runs = run_replicas<std::vector<SparseConfig>>(0, n, threads(), [&](std::size_t r) {
      Rng rng(derive_seed(kSeed, 2 + static_cast<std::uint64_t>(kind)), r);
      return simulate(kind, init, p, g, opts, rng).samples;
    });
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const auto dist = transient(chain, chain.index_of(init), times[ti]);
      for (std::size_t site = 0; site < chain.sites().size(); ++site) {
        const auto exact = site_marginal(chain, dist, site);
        std::array<std::size_t, 4> counts{};
        for (const auto& s : runs) ++counts[static_cast<std::size_t>(code(s[ti].get(chain.sites()[site])) + 1)];
        for (std::size_t c = 0; c < 4; ++c) {
          const double q = exact[c];
          if (q <= 0.0) {
            worst = counts[c] > 0 ? INFINITY : worst;
            continue;
          }
          const double se = std::sqrt(q * (1 - q) / n);
          worst = std::max(worst, std::abs(static_cast<double>(counts[c]) / n - q) / se);
          ++comparisons;
        }
      }
    }
  }
  return {worst <= 3.0, std::to_string(comparisons) + " marginals, max |z| = " + fmt(worst)};
}

// 3. Moment matrix threshold -----------------------------------------------

Outcome ode_threshold() {
  const int d = 5;
  const double below = max_real_eigenvalue(d, {0.29, 1, 1});
  const double at = max_real_eigenvalue(d, {0.30, 1, 1});
  const double above = max_real_eigenvalue(d, {0.31, 1, 1});
  // Central differences of the closed form against G m(t).
  double worst = 0.0;
  for (double lambda : {0.29, 0.30, 0.31}) {
    const ProcessParams p{lambda, 1, 1};
    const MomentMatrix g = build_moment_matrix(d, p);
    for (double t : {0.25, 1.0, 3.0, 10.0}) {
      const double h = 1e-5 * std::max(1.0, t);
      const Moments a = solve_moments(d, p, t - h);
      const Moments b = solve_moments(d, p, t + h);
      const Moments m = solve_moments(d, p, t);
      const double dz = (b.zeta - a.zeta) / (2 * h);
      const double dth = (b.theta - a.theta) / (2 * h);
      const double rz = g.entries[0][0] * m.zeta + g.entries[0][1] * m.theta;
      const double rth = g.entries[1][0] * m.zeta + g.entries[1][1] * m.theta;
      worst = std::max(worst, std::abs(dz - rz) / std::abs(rz));
      worst = std::max(worst, std::abs(dth - rth) / std::abs(rth));
    }
  }
  const bool pass = below < 0.0 && std::abs(at) <= 1e-12 && above > 0.0 && worst <= 1e-4;
  return {pass, "eig(0.29) = " + fmt(below) + ", eig(0.30) = " + fmt(at) + ", eig(0.31) = " + fmt(above) +
                    ", max relative ODE residual = " + fmt(worst)};
}

// 4 and 5. Torus linear system ----------------------------------------------

struct TorusSetting {
  Geometry g = Geometry::torus(2, 5);
  ProcessParams p{0.4, 1.0, 1.0};
  double t = 1.0;
  std::size_t n = 100000;
};

std::vector<LinearValue> linear_at_origin(const TorusSetting& s) {
  LinearConfig init;
  for (const Site& x : s.g.all_sites()) init.set(x, {1, 0});
  return run_replicas<LinearValue>(0, s.n, threads(), [&](std::size_t r) {
    Rng rng(derive_seed(kSeed, 4), r);
    return simulate_linear(init, s.p, s.g, s.t, {s.t}, rng).front().get(Site::origin(2));
  });
}

Outcome torus_moments() {
  const TorusSetting s;
  const auto values = linear_at_origin(s);
  RunningStats z, th;
  for (const auto& v : values) {
    z.add(static_cast<double>(v.zeta));
    th.add(static_cast<double>(v.theta));
  }
  const Moments m = solve_moments(2, s.p, s.t);
  const double zz = std::abs(z.mean() - m.zeta) / z.std_error();
  const double zt = std::abs(th.mean() - m.theta) / th.std_error();
  return {zz <= 3.0 && zt <= 3.0, "E zeta: " + fmt(z.mean(), 6) + " vs " + fmt(m.zeta, 6) + " (|z| = " + fmt(zz, 3) +
                                      "), E theta: " + fmt(th.mean(), 6) + " vs " + fmt(m.theta, 6) +
                                      " (|z| = " + fmt(zt, 3) + ")"};
}

Outcome projection_law() {
  const TorusSetting s;
  std::array<std::size_t, 3> lin{};
  for (const auto& v : linear_at_origin(s)) {
    LinearConfig one;
    one.set(Site::origin(2), v);
    ++lin[static_cast<std::size_t>(code(project_linear(one).get(Site::origin(2))))];
  }
  SimulateOptions opts;
  opts.horizon = s.t;
  opts.sample_times = {s.t};
  opts.keep_final_config = false;
  const SparseConfig init = uniform_config(s.g, SiteState::fully_infected);
  const auto direct = run_replicas<int>(0, s.n, threads(), [&](std::size_t r) {
    Rng rng(derive_seed(kSeed, 5), r);
    return code(simulate(ProcessKind::contact, init, s.p, s.g, opts, rng).samples.front().get(Site::origin(2)));
  });
  std::array<std::size_t, 3> con{};
  for (int c : direct) ++con[static_cast<std::size_t>(c)];
  double worst = 0.0;
  std::ostringstream os;
  for (std::size_t c = 0; c < 3; ++c) {
    const double a = static_cast<double>(lin[c]) / s.n;
    const double b = static_cast<double>(con[c]) / s.n;
    const double se = proportion_diff_se(a, s.n, b, s.n);
    const double z = se > 0 ? std::abs(a - b) / se : (a == b ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    os << "P(" << c << ") " << fmt(a) << " vs " << fmt(b) << "; ";
  }
  os << "max |z| = " << fmt(worst, 3);
  return {worst <= 3.0, os.str()};
}

// 6. Path event implies the end is reached ------------------------------------

Outcome containment() {
  const int d = 6;
  const ProcessParams p{0.375, 1.0, 1.0};
  const Region region = Region::box(Geometry::box(d, 21));
  std::size_t violations = 0;
  std::size_t with_event = 0;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng(derive_seed(kSeed, 6), i);
    const std::size_t n = 1 + rng.below(20);
    const WalkPath w = sample_walk(d, n, rng);
    ClockBundle clocks(region, p, rng());
    // Half the bundles are conditioned on the path event so that the
    // implication is exercised on its non-trivial side as well.
    if (i % 2 == 1) condition_on_path(clocks, w.sites(), rng);
    const bool a = event_A(w.sites(), clocks);
    with_event += a;
    if (a) {
      SparseConfig init;
      init.set(Site::origin(d), SiteState::fully_infected);
      if (!sir_from_clocks(clocks, init).ever_fully_infected.contains(w.back())) ++violations;
    }
  }
  return {violations == 0, std::to_string(draws) + " draws, " + std::to_string(with_event) + " with the path event, " +
                               std::to_string(violations) + " violations"};
}

// 7. Admissible-set floor ---------------------------------------------------

Outcome admissible_floor() {
  std::ostringstream os;
  bool pass = true;
  for (int d : {10, 50, 200}) {
    const int band = static_cast<int>(std::floor(d / std::log(d)));
    const int period = static_cast<int>(std::floor(std::log(d)));
    const int floor_h = 2 * (d - band) - period;
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t disagreements = 0;
    for (std::size_t w = 0; checked < 100000; ++w) {
      Rng rng(derive_seed(kSeed, 7 + static_cast<std::uint64_t>(d)), w);
      WalkPath path(d);
      std::set<Site> seen{path.back()};
      for (std::size_t i = 1; i <= 2000; ++i) {
        if (i % static_cast<std::size_t>(period) != 0) {
          int h = 0;
          for (int axis = 0; axis < d - band; ++axis) {
            for (int sign : {-1, 1}) {
              Site y = path.back();
              y[axis] += sign;
              h += !seen.contains(y);
            }
          }
          ++checked;
          violations += h < floor_h;
          disagreements += static_cast<std::size_t>(h) != admissible_count(path);
        }
        seen.insert(step_walk(path, rng));
      }
    }
    pass = pass && violations == 0 && disagreements == 0;
    os << "d=" << d << ": floor " << floor_h << ", " << checked << " steps, " << violations << " violations, "
       << disagreements << " count mismatches; ";
  }
  return {pass, os.str()};
}

// 8. Union lower bound -----------------------------------------------------

Outcome union_bound() {
  Rng rng(kSeed, 8);
  const UnionCheckReport r = brute_union_spaces(1000, rng);
  return {r.spaces == 1000 && r.violations == 0,
          std::to_string(r.spaces) + " spaces, " + std::to_string(r.violations) +
              " violations, max bound / P(union) = " + fmt(r.max_ratio, 6)};
}

// 9. Contact survival dominates SIR survival ----------------------------------

Outcome sir_ordering() {
  const int d = 4;
  const std::size_t n = 10000;
  const SurvivalProxy proxy = SurvivalProxy::defaults(d);
  std::ostringstream os;
  bool pass = true;
  for (double lambda : {0.4, 0.6, 0.8}) {
    const ProcessParams p{lambda, 1, 1};
    const auto c = estimate_survival(ProcessKind::contact, d, p, proxy, n, derive_seed(kSeed, 90), threads());
    const auto s = estimate_survival(ProcessKind::sir, d, p, proxy, n, derive_seed(kSeed, 91), threads());
    const double se = proportion_diff_se(c.p_hat, n, s.p_hat, n);
    pass = pass && c.p_hat >= s.p_hat - 3.0 * se;
    os << "lambda=" << lambda << ": contact " << fmt(c.p_hat) << ", sir " << fmt(s.p_hat) << "; ";
  }
  return {pass, os.str() + "proxy " + proxy.describe(d)};
}

// 10. Below the mean-field bound ---------------------------------------------

Outcome below_lower_bound() {
  const std::size_t n = 10000;
  std::ostringstream os;
  bool pass = true;
  for (int d : {4, 6}) {
    const double lambda = 0.9 * 3.0 / (2.0 * d);
    const auto e = estimate_survival(ProcessKind::contact, d, {lambda, 1, 1}, SurvivalProxy::defaults(d), n,
                                     derive_seed(kSeed, 100 + static_cast<std::uint64_t>(d)), threads());
    pass = pass && e.survivals == 0 && e.ci95.high < 5e-4;
    os << "d=" << d << " lambda=" << fmt(lambda) << ": " << e.survivals << "/" << n << " survived, Wilson upper "
       << fmt(e.ci95.high, 3) << "; ";
  }
  return {pass, os.str()};
}

// 11. Scaled critical values over dimensions -----------------------------------

Outcome trend() {
  const BisectSettings settings;
  const TrendResult t = trend_study(ProcessKind::contact, {4, 6, 8}, 1.0, 1.0, settings, derive_seed(kSeed, 11),
                                    threads());
  bool pass = t.increases == 0;
  std::ostringstream os;
  os << "target " << t.target << "; ";
  for (const TrendRow& r : t.rows) {
    pass = pass && r.scaled >= t.target - 0.1;
    os << "d=" << r.d << ": 2d lambda_hat = " << fmt(r.scaled) << " [" << fmt(r.scaled_ci.low) << ", "
       << fmt(r.scaled_ci.high) << "]; ";
  }
  os << t.increases << " increases beyond the combined interval";
  return {pass, os.str()};
}

// 12. Direct union probability against the second-moment bound -----------------

Outcome second_moment() {
  const int d = 6;
  const std::size_t n = 8;
  const ProcessParams p{1.5 * 3.0 / 12.0, 1, 1};
  const UnionEstimate direct = estimate_union_probability(d, p, n, 10000000, derive_seed(kSeed, 120), threads());
  const SurvivalBound bound = estimate_survival_lower_bound(d, p, n, 100000, derive_seed(kSeed, 121), threads());
  const double bound_se = (bound.ci.high - bound.ci.low) / (2 * 1.96);
  const double sigma = std::hypot(direct.std_error, bound_se);
  const bool pass = direct.p_hat >= bound.estimate - 3.0 * sigma;
  return {pass, "direct " + fmt(direct.p_hat) + " (se " + fmt(direct.std_error, 2) + "), bound " +
                    fmt(bound.estimate) + " (se " + fmt(bound_se, 2) + ")"};
}

// 13. Byte-identical CLI reruns --------------------------------------------------

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("twostage-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "gamma = 1\ndelta = 1\n";
  }
  const std::string cfg = (dir / "run.cfg").string();
  const std::vector<std::string> commands{
      "simulate --d 2 --lambda 0.8 --replicas 200 --horizon 10",
      "simulate --kind sir --geometry torus --d 2 --side 5 --init all --lambda 0.5 --replicas 50 --horizon 2",
      "sweep --d 3 --lambdas 0.3,0.5,0.7 --replicas 200 --horizon 20 --cap 500",
      "bisect --d 2 --horizon 10 --cap 200 --probe-replicas 100 --bracket-replicas 100 --tol 0.05",
      "trend --dims 2,3 --horizon 5 --cap 100 --probe-replicas 50 --bracket-replicas 50 --tol 0.1",
      "ode --d 5 --lambda 0.29 --t-max 50 --steps 10",
      "sawbound --d 10 --theta 0.5 --n-max 400 --replicas 200",
      "oracle-check --replicas 2000"};
  std::size_t identical = 0;
  std::string failed;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      for (const char* format : {"csv", "jsonl"}) {
        const fs::path out = dir / ("out" + std::to_string(i) + "_" + std::to_string(run) + "." + format);
        // The second run uses a different worker count; results must not depend on it.
        // oracle-check takes no rate options, so the rate config is not passed to it.
        const std::string config = commands[i].rfind("oracle-check", 0) == 0 ? "" : " --config \"" + cfg + "\"";
        const std::string cmd = std::string("\"") + TWOSTAGE_CLI_PATH + "\" --seed 7 --threads " +
                                std::to_string(run + 1) + config + " --format " + format +
                                " --output \"" + out.string() + "\" " + commands[i] + " 2>/dev/null";
        const int rc = std::system(cmd.c_str());
        std::ifstream in(out, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        outputs[run] += "rc=" + std::to_string(rc) + "\n" + buf.str();
      }
    }
    if (outputs[0] == outputs[1] && outputs[0].find("rc=0\n#") == 0) {
      ++identical;
    } else {
      failed += " [" + commands[i] + "]";
    }
  }
  fs::remove_all(dir);
  return {identical == commands.size(), std::to_string(identical) + "/" + std::to_string(commands.size()) +
                                            " commands byte-identical in csv and jsonl" +
                                            (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "rate tables", 1, rate_tables},
      {2, "ring marginals vs uniformization", 120, ring_oracle},
      {3, "moment matrix threshold", 1, ode_threshold},
      {4, "torus linear-system moments", 180, torus_moments},
      {5, "projection law", 180, projection_law},
      {6, "path event containment", 120, containment},
      {7, "admissible-set floor", 60, admissible_floor},
      {8, "union lower bound", 60, union_bound},
      {9, "contact vs sir survival", 300, sir_ordering},
      {10, "no survival below the mean-field bound", 300, below_lower_bound},
      {11, "scaled critical value trend", 3600, trend},
      {12, "direct union vs second-moment bound", 600, second_moment},
      {13, "cli determinism", 60, determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all = true;
  bool ran = false;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::printf("%s %2d %s: %s; %.1fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  if (!ran) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }
  return all ? 0 : 1;
}
