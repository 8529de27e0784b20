#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "twostage/errors.hpp"
#include "twostage/graphical.hpp"
#include "twostage/meanfield.hpp"
#include "twostage/oracle.hpp"
#include "twostage/replicas.hpp"
#include "twostage/saw.hpp"

namespace twostage::cli {

namespace {

CheckResult make(std::string suite, std::string check, double value, double tolerance, std::string detail = "") {
  return {std::move(suite), std::move(check), value <= tolerance, value, tolerance, std::move(detail)};
}

// The engine's per-site rate rows against the exact chain's off-diagonal entries.
std::size_t rate_mismatches(ProcessKind kind, const Geometry& g, const ProcessParams& p) {
  const ExactChain chain = build_exact(kind, g, p);
  std::size_t bad = 0;
  for (std::size_t s = 0; s < chain.state_count(); ++s) {
    const SparseConfig cfg = chain.config(s);
    std::vector<std::pair<std::size_t, double>> engine_row;
    for (const Site& x : chain.sites()) {
      for (const Transition& tr : site_rates(kind, cfg, x, p, g)) {
        SparseConfig next = cfg;
        next.set(x, tr.target);
        engine_row.emplace_back(chain.index_of(next), tr.rate);
      }
    }
    auto oracle_row = chain.row(s);
    std::sort(engine_row.begin(), engine_row.end());
    std::sort(oracle_row.begin(), oracle_row.end());
    if (engine_row != oracle_row) ++bad;
  }
  return bad;
}

std::vector<CheckResult> rates_suite() {
  std::vector<CheckResult> out;
  const ProcessParams p{0.7, 1.3, 0.4};
  for (ProcessKind kind : {ProcessKind::contact, ProcessKind::sir}) {
    for (const Geometry& g : {Geometry::box(1, 0), Geometry::torus(1, 3), Geometry::box(2, 1)}) {
      if (kind == ProcessKind::sir && g.site_count() > 8) continue;
      const std::string name = to_string(kind) + " " + g.describe();
      out.push_back(make("rates", "engine rows = generator rows, " + name,
                         static_cast<double>(rate_mismatches(kind, g, p)), 0.0));
      const ExactChain chain = build_exact(kind, g, p);
      double worst = 0.0;
      for (std::size_t s = 0; s < chain.state_count(); ++s) {
        double sum = -chain.exit_rate(s);
        for (const auto& [j, r] : chain.row(s)) sum += r;
        worst = std::max(worst, std::abs(sum));
      }
      out.push_back(make("rates", "generator row sums, " + name, worst, 1e-12));
    }
  }
  return out;
}

std::vector<CheckResult> transient_suite() {
  std::vector<CheckResult> out;
  const ExactChain c = build_exact(ProcessKind::contact, Geometry::box(1, 0), {0.5, 1.0, 1.0});
  SparseConfig full;
  full.set(Site{0}, SiteState::fully_infected);
  const std::size_t start = c.index_of(full);
  const std::size_t empty = c.index_of(SparseConfig{});
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0}) worst = std::max(worst, std::abs(transient(c, start, t)[empty] - (1 - std::exp(-t))));
  out.push_back(make("transient", "single-site death law 1 - exp(-t)", worst, 1e-10));

  const ExactChain ring = build_exact(ProcessKind::sir, Geometry::torus(1, 5), {1.1, 0.9, 0.3});
  double mass = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto v = transient(ring, ring.index_of(full), t);
    mass = std::max(mass, std::abs(std::accumulate(v.begin(), v.end(), 0.0) - 1.0));
  }
  out.push_back(make("transient", "probability mass on a 5-ring", mass, 1e-9));
  return out;
}

std::vector<CheckResult> engine_suite(std::size_t replicas, std::uint64_t seed, unsigned threads) {
  // Monte Carlo marginals of the origin against uniformization on the 3-ring.
  // Many comparisons share one exit code, so the band is 4 sigma here.
  std::vector<CheckResult> out;
  const Geometry g = Geometry::torus(1, 3);
  const ProcessParams p{0.7, 1.3, 0.4};
  SparseConfig init;
  init.set(Site{0}, SiteState::fully_infected);
  for (ProcessKind kind : {ProcessKind::contact, ProcessKind::sir}) {
    const ExactChain chain = build_exact(kind, g, p);
    const double t = 1.0;
    const auto exact = site_marginal(chain, transient(chain, chain.index_of(init), t), 0);
    SimulateOptions opts;
    opts.horizon = t;
    opts.sample_times = {t};
    opts.keep_final_config = false;
    auto codes = run_replicas<int>(0, replicas, threads, [&](std::size_t r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)), r);
      return code(simulate(kind, init, p, g, opts, rng).samples.front().get(Site{0}));
    });
    double worst = 0.0;
    for (int c = kind == ProcessKind::sir ? -1 : 0; c <= 2; ++c) {
      const double q = exact[static_cast<std::size_t>(c + 1)];
      const double hat =
          static_cast<double>(std::count(codes.begin(), codes.end(), c)) / static_cast<double>(replicas);
      const double se = std::sqrt(std::max(q * (1 - q), 1e-300) / static_cast<double>(replicas));
      worst = std::max(worst, std::abs(hat - q) / se);
    }
    out.push_back(make("engine", to_string(kind) + " 3-ring marginal at t=1, max |z|", worst, 4.0));
  }
  return out;
}

std::vector<CheckResult> moments_suite() {
  std::vector<CheckResult> out;
  out.push_back(make("moments", "top eigenvalue at 2 d lambda gamma = 1 + gamma + delta",
                     std::abs(max_real_eigenvalue(5, {0.3, 1, 1})), 1e-12));
  double worst = 0.0;
  const ProcessParams p{0.31, 1.0, 1.0};
  const MomentMatrix g = build_moment_matrix(5, p);
  for (double t : {0.3, 1.0, 2.5, 7.0}) {
    const double h = 1e-5;
    const Moments a = solve_moments(5, p, t + h);
    const Moments b = solve_moments(5, p, t - h);
    const Moments m = solve_moments(5, p, t);
    const double fz = g.entries[0][0] * m.zeta + g.entries[0][1] * m.theta;
    const double ft = g.entries[1][0] * m.zeta + g.entries[1][1] * m.theta;
    worst = std::max(worst, std::abs((a.zeta - b.zeta) / (2 * h) - fz) / std::abs(fz));
    worst = std::max(worst, std::abs((a.theta - b.theta) / (2 * h) - ft) / std::abs(ft));
  }
  out.push_back(make("moments", "closed form satisfies the ODE (relative)", worst, 1e-4));
  return out;
}

std::vector<CheckResult> union_suite(std::uint64_t seed) {
  Rng rng(seed, 0x756e);
  const UnionCheckReport r = brute_union_spaces(1000, rng);
  std::ostringstream os;
  os << "max bound/P(union) = " << r.max_ratio;
  return {make("union", "second-moment bound <= exact union, 1000 spaces", static_cast<double>(r.violations), 0.0,
               os.str()),
          make("union", "single-event equality", static_cast<double>(r.single_event_mismatches), 0.0)};
}

std::vector<CheckResult> containment_suite(std::uint64_t seed) {
  const int d = 6;
  const ProcessParams p{0.3, 1.0, 1.0};
  const Region region = Region::box(Geometry::box(d, 22));
  std::size_t violations = 0;
  std::size_t with_event = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    Rng rng(seed, 0x6c34 + i);
    const std::size_t n = 1 + rng.below(20);
    WalkPath w = sample_walk(d, n, rng);
    ClockBundle c(region, p, rng());
    if (i % 2 == 0) condition_on_path(c, w.sites(), rng);
    with_event += event_A(w.sites(), c);
    violations += !verify_path_containment(w.sites(), c);
  }
  std::ostringstream os;
  os << with_event << " draws had the path event";
  return {make("containment", "path event implies the end is ever fully infected, 1000 draws",
               static_cast<double>(violations), 0.0, os.str())};
}

}  // namespace

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> names{"rates", "transient", "engine", "moments", "union", "containment"};
  return names;
}

std::vector<CheckResult> run_checks(const std::string& suite, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads) {
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (const auto& name : check_suites()) {
      auto part = run_checks(name, replicas, seed, threads);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (suite == "rates") return rates_suite();
  if (suite == "transient") return transient_suite();
  if (suite == "engine") return engine_suite(replicas, seed, threads);
  if (suite == "moments") return moments_suite();
  if (suite == "union") return union_suite(seed);
  if (suite == "containment") return containment_suite(seed);
  throw ParameterError("unknown suite '" + suite + "'");
}

}  // namespace twostage::cli
