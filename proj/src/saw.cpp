#include "twostage/saw.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "twostage/errors.hpp"
#include "twostage/replicas.hpp"

namespace twostage {

WalkShape WalkShape::for_dimension(int d) {
  if (d < 3) throw ContractError("the drifting walk needs d >= 3 (floor(log d) >= 1)");
  const double ln = std::log(static_cast<double>(d));
  WalkShape s;
  s.d = d;
  s.period = static_cast<int>(std::floor(ln));
  s.band = static_cast<int>(std::floor(static_cast<double>(d) / ln));
  if (s.period < 1 || s.band < 1 || s.admissible_floor() < 1) {
    throw ContractError("2(d - floor(d/log d)) - floor(log d) >= 1 fails for d = " + std::to_string(d));
  }
  return s;
}

std::int64_t drift_level(const Site& x, const WalkShape& shape) {
  std::int64_t u = 0;
  for (int j = shape.d - shape.band; j < shape.d; ++j) u += std::abs(static_cast<std::int64_t>(x[j]));
  return u;
}

WalkPath::WalkPath(int d) : WalkPath(WalkShape::for_dimension(d)) {}

WalkPath::WalkPath(const WalkShape& shape) : shape_(shape) {
  sites_.push_back(Site::origin(shape.d));
  keys_.push_back(0);
  index_.emplace(0, 0);
}

std::optional<std::size_t> WalkPath::find(std::uint64_t key, const Site& x) const {
  auto [lo, hi] = index_.equal_range(key);
  for (auto it = lo; it != hi; ++it) {
    if (sites_[it->second] == x) return it->second;
  }
  return std::nullopt;
}

std::optional<std::size_t> WalkPath::index_of(const Site& x) const {
  if (x.dim() != shape_.d) return std::nullopt;
  return find(linear_key(x.coords()), x);
}

bool WalkPath::visited_step(int axis, int sign) const {
  const Site& cur = sites_.back();
  const std::uint64_t key = keys_.back() + static_cast<std::uint64_t>(static_cast<std::int64_t>(sign)) * axis_key(axis);
  auto [lo, hi] = index_.equal_range(key);
  for (auto it = lo; it != hi; ++it) {
    const Site& y = sites_[it->second];
    bool same = true;
    for (int j = 0; j < shape_.d && same; ++j) same = y[j] == (j == axis ? cur[j] + sign : cur[j]);
    if (same) return true;
  }
  return false;
}

void WalkPath::push(Site x) {
  if (x.dim() != shape_.d) throw DomainError("dimension mismatch");
  if (l1_distance(x, sites_.back()) != 1) throw DomainError("walk steps must be unit steps");
  const std::uint64_t key = linear_key(x.coords());
  if (find(key, x)) throw DomainError("walk would revisit " + x.str());
  index_.emplace(key, static_cast<std::uint32_t>(sites_.size()));
  keys_.push_back(key);
  sites_.push_back(std::move(x));
}

bool in_path_class(std::span<const Site> path, const WalkShape& shape) {
  if (path.empty() || path[0] != Site::origin(shape.d)) return false;
  std::unordered_map<Site, std::size_t, SiteHash> seen;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].dim() != shape.d || !seen.emplace(path[i], i).second) return false;
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    int axis = -1;
    int sign = 0;
    for (int j = 0; j < shape.d; ++j) {
      const Coord diff = path[i + 1][j] - path[i][j];
      if (diff == 0) continue;
      if (axis >= 0 || std::abs(diff) != 1) return false;
      axis = j;
      sign = diff;
    }
    if (axis < 0) return false;
    const bool drift = (i + 1) % static_cast<std::size_t>(shape.period) == 0;
    if (drift && !(shape.is_drift_axis(axis) && sign == 1)) return false;
    if (!drift && shape.is_drift_axis(axis)) return false;
  }
  return true;
}

namespace {

void require_free_step(const WalkPath& history) {
  if (history.shape().is_drift_step(history.steps() + 1)) {
    throw ContractError("admissible set requested at a drift step");
  }
}

}  // namespace

std::vector<Site> admissible_next(const WalkPath& history) {
  require_free_step(history);
  std::vector<Site> out;
  for (int axis = 0; axis < history.shape().free_axes(); ++axis) {
    for (int sign : {1, -1}) {
      if (!history.visited_step(axis, sign)) out.push_back(history.back().shifted(axis, sign));
    }
  }
  return out;
}

std::size_t admissible_count(const WalkPath& history) {
  require_free_step(history);
  std::size_t n = 0;
  for (int axis = 0; axis < history.shape().free_axes(); ++axis) {
    for (int sign : {1, -1}) n += history.visited_step(axis, sign) ? 0 : 1;
  }
  return n;
}

const Site& step_walk(WalkPath& history, Rng& rng) {
  const WalkShape& shape = history.shape();
  if (shape.is_drift_step(history.steps() + 1)) {
    const int axis = shape.d - shape.band + static_cast<int>(rng.below(static_cast<std::size_t>(shape.band)));
    history.push(history.back().shifted(axis, 1));
    return history.back();
  }
  std::vector<std::pair<int, int>> moves;
  moves.reserve(static_cast<std::size_t>(2 * shape.free_axes()));
  for (int axis = 0; axis < shape.free_axes(); ++axis) {
    for (int sign : {1, -1}) {
      if (!history.visited_step(axis, sign)) moves.emplace_back(axis, sign);
    }
  }
  if (moves.empty()) throw ContractError("walk has no admissible step");
  const auto [axis, sign] = moves[rng.below(moves.size())];
  history.push(history.back().shifted(axis, sign));
  return history.back();
}

WalkPath sample_walk(int d, std::size_t steps, Rng& rng) {
  WalkPath w(d);
  for (std::size_t i = 0; i < steps; ++i) step_walk(w, rng);
  return w;
}

PairStats pair_stats(const WalkPath& s, const WalkPath& v, std::size_t n) {
  if (s.steps() < n || v.steps() < n) throw ContractError("pair_stats needs both walks to have >= n steps");
  PairStats out;
  for (std::size_t i = 0; i <= n; ++i) {
    const auto j = s.index_of(v[i]);
    if (!j || *j > n) continue;
    ++out.f_size;
    const bool shared_edge = i < n && *j < n && s[*j + 1] == v[i + 1];
    if (shared_edge) {
      ++out.k_size;
    } else {
      ++out.f_minus_k_size;
    }
  }
  return out;
}

namespace {

void check_weight_inputs(const PairStats& stats, const ProcessParams& p) {
  if (stats.f_size == 0) throw ContractError("F is never empty: both walks start at the origin");
  p.validate();
  if (p.lambda <= 0.0 || p.gamma <= 0.0) throw ParameterError("the weight needs lambda > 0 and gamma > 0");
}

}  // namespace

double pair_weight(const PairStats& stats, const ProcessParams& p) {
  check_weight_inputs(stats, p);
  const double site_factor = (1.0 + p.gamma + p.delta) / p.gamma;
  const double edge_factor = (p.lambda + 1.0) / p.lambda;
  return std::pow(2.0, static_cast<double>(stats.f_minus_k_size)) *
         std::pow(site_factor, static_cast<double>(stats.f_size - 1)) *
         std::pow(edge_factor, static_cast<double>(stats.k_size));
}

double log_pair_weight(const PairStats& stats, const ProcessParams& p) {
  check_weight_inputs(stats, p);
  return static_cast<double>(stats.f_minus_k_size) * std::log(2.0) +
         static_cast<double>(stats.f_size - 1) * std::log((1.0 + p.gamma + p.delta) / p.gamma) +
         static_cast<double>(stats.k_size) * std::log((p.lambda + 1.0) / p.lambda);
}

SurvivalBound estimate_survival_lower_bound(int d, const ProcessParams& p, std::size_t n_max, std::size_t replicas,
                                            std::uint64_t seed, unsigned threads) {
  p.validate();
  if (p.lambda <= 0.0 || p.gamma <= 0.0) throw ParameterError("the bound needs lambda > 0 and gamma > 0");
  if (n_max < 4) throw ParameterError("n_max must be >= 4");
  if (replicas < 2) throw ParameterError("replicas must be >= 2");
  const WalkShape shape = WalkShape::for_dimension(d);
  const std::array<std::size_t, 3> depths{n_max / 4, n_max / 2, n_max};

  auto weights = run_replicas<std::array<double, 3>>(0, replicas, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    WalkPath s(shape);
    WalkPath v(shape);
    for (std::size_t i = 0; i < n_max; ++i) step_walk(s, rng);
    for (std::size_t i = 0; i < n_max; ++i) step_walk(v, rng);
    std::array<double, 3> w{};
    for (std::size_t k = 0; k < depths.size(); ++k) w[k] = pair_weight(pair_stats(s, v, depths[k]), p);
    return w;
  });

  SurvivalBound out;
  out.replicas = replicas;
  for (std::size_t k = 0; k < depths.size(); ++k) {
    RunningStats acc;
    for (const auto& w : weights) acc.add(w[k]);
    out.convergence.push_back({depths[k], acc.mean(), acc.std_error(), 1.0 / acc.mean()});
  }
  const BoundPoint& last = out.convergence.back();
  out.estimate = last.bound;
  const double se_bound = last.std_error / (last.mean_weight * last.mean_weight);
  out.ci = {std::max(0.0, last.bound - 1.96 * se_bound), std::min(1.0, last.bound + 1.96 * se_bound)};
  out.relative_change = std::abs(last.bound - out.convergence[1].bound) / last.bound;

  std::vector<double> tail;
  tail.reserve(weights.size());
  for (const auto& w : weights) tail.push_back(w[2]);
  std::sort(tail.begin(), tail.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(1, (replicas + 99) / 100);
  const double total = std::accumulate(tail.begin(), tail.end(), 0.0);
  const double head = std::accumulate(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
  out.top_share = head / total;
  out.heavy_tail = out.top_share > 0.5;
  return out;
}

double lambda_from_theta(int d, double theta, double gamma, double delta) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (!(theta > 0.0) || !(gamma > 0.0)) throw ParameterError("theta and gamma must be positive");
  return theta * (1.0 + gamma + delta) / (2.0 * d * gamma);
}

double union_lower_bound(std::span<const double> probs, const std::vector<std::vector<double>>& pair_probs,
                         std::span<const double> weights) {
  const std::size_t n = probs.size();
  if (n == 0) throw DomainError("at least one event is required");
  if (weights.size() != n || pair_probs.size() != n) throw DomainError("size mismatch");
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(probs[i] > 0.0)) throw DomainError("every event needs positive probability");
    if (!(weights[i] > 0.0)) throw DomainError("weights must be positive");
    if (pair_probs[i].size() != n) throw DomainError("pair probability matrix must be square");
    wsum += weights[i];
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw DomainError("weights must sum to 1");
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      denom += weights[i] * weights[j] * pair_probs[i][j] / (probs[i] * probs[j]);
    }
  }
  return 1.0 / denom;
}

}  // namespace twostage
