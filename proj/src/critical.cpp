#include "twostage/critical.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "twostage/errors.hpp"
#include "twostage/meanfield.hpp"
#include "twostage/replicas.hpp"

namespace twostage {

SurvivalProxy SurvivalProxy::defaults(int d) {
  SurvivalProxy p;
  if (d >= 10) p.cap = 2000;
  return p;
}

void SurvivalProxy::validate() const {
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ParameterError("horizon must be positive");
  if (cap < 1) throw ParameterError("cap must be >= 1");
  if (box_radius < 1) throw ParameterError("box radius must be >= 1");
}

std::string SurvivalProxy::describe(int d) const {
  std::ostringstream os;
  os << "T=" << horizon << ";cap=" << cap << ";" << Geometry::box(d, box_radius).describe();
  return os.str();
}

SurvivalEstimate estimate_survival(ProcessKind kind, int d, const ProcessParams& p, const SurvivalProxy& proxy,
                                   std::size_t replicas, std::uint64_t seed, unsigned threads) {
  p.validate();
  proxy.validate();
  if (replicas < 1) throw ParameterError("replicas must be >= 1");
  const Geometry g = Geometry::box(d, proxy.box_radius);
  SparseConfig init;
  init.set(Site::origin(d), SiteState::fully_infected);
  SimulateOptions opts;
  opts.horizon = proxy.horizon;
  opts.stop.active_cap = proxy.cap;
  opts.keep_final_config = false;

  auto alive = run_replicas<char>(0, replicas, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    return static_cast<char>(simulate(kind, init, p, g, opts, rng).survived());
  });
  SurvivalEstimate out;
  out.trials = replicas;
  for (char a : alive) out.survivals += static_cast<std::size_t>(a);
  out.p_hat = static_cast<double>(out.survivals) / static_cast<double>(replicas);
  out.ci95 = wilson_interval(out.survivals, replicas);
  out.proxy = proxy.describe(d);
  return out;
}

std::uint64_t probe_seed(std::uint64_t master, double lambda) {
  return derive_seed(master, std::bit_cast<std::uint64_t>(lambda));
}

std::vector<SweepRow> sweep(ProcessKind kind, int d, const ProcessParams& p, const std::vector<double>& lambdas,
                            const SurvivalProxy& proxy, std::size_t replicas, std::uint64_t seed,
                            unsigned threads) {
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    ProcessParams q = p;
    q.lambda = lambda;
    rows.push_back({lambda, estimate_survival(kind, d, q, proxy, replicas, probe_seed(seed, lambda), threads)});
  }
  return rows;
}

namespace {
double half_width(const Interval& ci) { return (ci.high - ci.low) / 2.0; }
}  // namespace

std::size_t monotonicity_violations(const std::vector<SweepRow>& rows) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i].estimate;
    const auto& b = rows[i + 1].estimate;
    if (rows[i + 1].lambda < rows[i].lambda) throw DomainError("sweep rows must be in ascending lambda");
    if (a.p_hat - b.p_hat > half_width(a.ci95) + half_width(b.ci95)) ++bad;
  }
  return bad;
}

void BisectSettings::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (probe_replicas < 1 || bracket_replicas < 1) throw ParameterError("replica budgets must be >= 1");
  if (!(lambda_max > 0.0)) throw ParameterError("lambda_max must be positive");
  proxy.validate();
}

CriticalEstimate bisect_critical(ProcessKind kind, int d, double gamma, double delta, const BisectSettings& settings,
                                 std::uint64_t seed, unsigned threads) {
  settings.validate();
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (!(gamma > 0.0) || !(delta >= 0.0)) throw ParameterError("need gamma > 0 and delta >= 0");

  CriticalEstimate out;
  out.kind = kind;
  out.d = d;
  out.gamma = gamma;
  out.delta = delta;
  out.threshold_eps = settings.eps;
  out.resolution = settings.tol;
  out.proxy = settings.proxy.describe(d);

  auto probe = [&](double lambda, std::size_t replicas, const char* role) {
    ProcessParams p{lambda, gamma, delta};
    Probe pr{lambda, role,
             estimate_survival(kind, d, p, settings.proxy, replicas, probe_seed(seed, lambda), threads)};
    out.probes.push_back(pr);
    return pr.estimate.p_hat;
  };

  double lo = lower_bound_lambda(d, gamma, delta);
  while (probe(lo, settings.bracket_replicas, "bracket") >= settings.eps) {
    if (lo < settings.tol) throw BracketError("no lambda with survival below eps was found");
    lo /= 2.0;
  }
  double hi = 2.0 * lo;
  for (;;) {
    if (hi > settings.lambda_max) {
      std::ostringstream os;
      os << "no lambda <= " << settings.lambda_max << " with survival above " << settings.eps
         << " (last probe lambda=" << out.probes.back().lambda << ", p_hat=" << out.probes.back().estimate.p_hat
         << ")";
      throw BracketError(os.str());
    }
    if (probe(hi, settings.bracket_replicas, "bracket") > settings.eps) break;
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > settings.tol) {
    const double mid = (lo + hi) / 2.0;
    if (probe(mid, settings.probe_replicas, "bisect") > settings.eps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.lambda_lo = lo;
  out.lambda_hi = hi;
  out.lambda_hat = (lo + hi) / 2.0;
  out.scaled = 2.0 * d * out.lambda_hat;

  out.lambda_ci = {lo, hi};
  double below = -1.0;
  double above = -1.0;
  for (const Probe& pr : out.probes) {
    if (pr.estimate.ci95.high < settings.eps && pr.lambda > below) below = pr.lambda;
    if (pr.estimate.ci95.low > settings.eps && (above < 0.0 || pr.lambda < above)) above = pr.lambda;
  }
  if (below >= 0.0) out.lambda_ci.low = std::min(below, lo);
  if (above >= 0.0) out.lambda_ci.high = std::max(above, hi);
  return out;
}

TrendResult trend_study(ProcessKind kind, const std::vector<int>& d_list, double gamma, double delta,
                        const BisectSettings& settings, std::uint64_t seed, unsigned threads,
                        bool per_dimension_proxy) {
  if (d_list.empty()) throw ParameterError("d_list must not be empty");
  for (std::size_t i = 0; i + 1 < d_list.size(); ++i) {
    if (d_list[i] >= d_list[i + 1]) throw ParameterError("d_list must be strictly ascending");
  }
  TrendResult out;
  out.target = 1.0 + (1.0 + delta) / gamma;
  for (int d : d_list) {
    BisectSettings s = settings;
    if (per_dimension_proxy) s.proxy.cap = SurvivalProxy::defaults(d).cap;
    CriticalEstimate est = bisect_critical(kind, d, gamma, delta, s, derive_seed(seed, static_cast<std::uint64_t>(d)),
                                           threads);
    TrendRow row;
    row.d = d;
    row.lambda_hat = est.lambda_hat;
    row.scaled = est.scaled;
    row.scaled_ci = {2.0 * d * est.lambda_ci.low, 2.0 * d * est.lambda_ci.high};
    row.detail = std::move(est);
    out.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
    const TrendRow& a = out.rows[i];
    const TrendRow& b = out.rows[i + 1];
    if (b.scaled - a.scaled > half_width(a.scaled_ci) + half_width(b.scaled_ci)) ++out.increases;
  }
  return out;
}

}  // namespace twostage
