#include "twostage/graphical.hpp"

#include <cmath>
#include <queue>
#include <tuple>

#include "twostage/errors.hpp"
#include "twostage/replicas.hpp"

namespace twostage {

Region Region::box(const Geometry& g) {
  if (g.is_torus()) throw DomainError("clock regions are boxes or explicit site sets");
  Region r;
  r.d_ = g.dim();
  r.box_ = g;
  return r;
}

Region Region::sites(const std::vector<Site>& sites) {
  if (sites.empty()) throw DomainError("clock region must not be empty");
  Region r;
  r.d_ = sites.front().dim();
  for (const Site& x : sites) {
    if (x.dim() != r.d_) throw DomainError("region sites must share a dimension");
    r.set_.insert(x);
  }
  return r;
}

bool Region::contains(const Site& x) const {
  if (x.dim() != d_) return false;
  return box_ ? box_->contains(x) : set_.contains(x);
}

std::vector<Site> Region::neighbors(const Site& x) const {
  std::vector<Site> out;
  for (int dir = 0; dir < 2 * d_; ++dir) {
    Site y = x.shifted(direction_axis(dir), direction_sign(dir));
    if (contains(y)) out.push_back(std::move(y));
  }
  return out;
}

std::vector<Site> Region::enumerate() const {
  if (box_) return box_->all_sites();
  std::vector<Site> out(set_.begin(), set_.end());
  std::sort(out.begin(), out.end());
  return out;
}

ClockBundle::ClockBundle(Region region, const ProcessParams& p, std::uint64_t seed)
    : region_(std::move(region)), params_(p), seed_(seed) {
  params_.validate();
}

void ClockBundle::check_site(const Site& x) const {
  if (!region_.contains(x)) throw DomainError("site " + x.str() + " is outside the clock region");
}

double ClockBundle::derive(Kind kind, const Site& x, const Site* y, double rate) const {
  std::uint64_t h = mix64(seed_ ^ (static_cast<std::uint64_t>(kind) * 0x9e3779b97f4a7c15ULL));
  for (Coord c : x.coords()) h = mix64(h ^ static_cast<std::uint32_t>(c));
  if (y) {
    h = mix64(h ^ 0xa5a5a5a5ULL);
    for (Coord c : y->coords()) h = mix64(h ^ static_cast<std::uint32_t>(c));
  }
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(to_open_unit(h)) / rate;
}

double ClockBundle::recovery(const Site& x) const {
  check_site(x);
  auto it = recovery_.find(x);
  return it != recovery_.end() ? it->second : derive(Kind::recovery, x, nullptr, 1.0);
}

double ClockBundle::removal(const Site& x) const {
  check_site(x);
  auto it = removal_.find(x);
  return it != removal_.end() ? it->second : derive(Kind::removal, x, nullptr, 1.0 + params_.delta);
}

double ClockBundle::maturation(const Site& x) const {
  check_site(x);
  auto it = maturation_.find(x);
  return it != maturation_.end() ? it->second : derive(Kind::maturation, x, nullptr, params_.gamma);
}

double ClockBundle::infection(const Site& x, const Site& y) const {
  check_site(x);
  check_site(y);
  if (l1_distance(x, y) != 1) throw DomainError("infection clocks live on neighbouring pairs");
  auto it = infection_.find({x, y});
  return it != infection_.end() ? it->second : derive(Kind::infection, x, &y, params_.lambda);
}

namespace {
void check_clock_value(double v) {
  if (!(v > 0.0)) throw DomainError("clock values must be strictly positive");
}
}  // namespace

void ClockBundle::set_recovery(const Site& x, double v) {
  check_site(x);
  check_clock_value(v);
  recovery_[x] = v;
}

void ClockBundle::set_removal(const Site& x, double v) {
  check_site(x);
  check_clock_value(v);
  removal_[x] = v;
}

void ClockBundle::set_maturation(const Site& x, double v) {
  check_site(x);
  check_clock_value(v);
  maturation_[x] = v;
}

void ClockBundle::set_infection(const Site& x, const Site& y, double v) {
  check_site(x);
  check_site(y);
  if (l1_distance(x, y) != 1) throw DomainError("infection clocks live on neighbouring pairs");
  check_clock_value(v);
  infection_[{x, y}] = v;
}

ClockBundle::Counts ClockBundle::counts() const {
  Counts c;
  for (const Site& x : region_.enumerate()) {
    ++c.sites;
    c.ordered_pairs += region_.neighbors(x).size();
  }
  return c;
}

ClockBundle sample_clocks(const Region& region, const ProcessParams& p, Rng& rng) {
  return ClockBundle(region, p, rng());
}

namespace {

void check_path(std::span<const Site> path, const ClockBundle& clocks) {
  if (path.empty()) throw DomainError("path must contain the origin");
  const int d = clocks.region().dim();
  if (path.front() != Site::origin(d)) throw DomainError("path must start at the origin");
  std::unordered_set<Site, SiteHash> seen;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!clocks.region().contains(path[i])) throw DomainError("path leaves the clock region at " + path[i].str());
    if (!seen.insert(path[i]).second) throw DomainError("path is not self-avoiding");
    if (i > 0 && l1_distance(path[i - 1], path[i]) != 1) throw DomainError("path steps must be unit steps");
  }
}

bool edge_open(const ClockBundle& c, const Site& x, const Site& y) {
  return c.infection(x, y) < c.recovery(x) && c.maturation(y) < c.removal(y);
}

}  // namespace

bool event_A(std::span<const Site> path, const ClockBundle& clocks) {
  check_path(path, clocks);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!edge_open(clocks, path[i], path[i + 1])) return false;
  }
  return true;
}

void condition_on_path(ClockBundle& clocks, std::span<const Site> path, Rng& rng) {
  check_path(path, clocks);
  const ProcessParams& p = clocks.params();
  if (p.lambda <= 0.0 || p.gamma <= 0.0) throw ParameterError("conditioning needs lambda > 0 and gamma > 0");
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    // Given U < W, U is the minimum (rate lambda + 1) and W - U is a fresh rate-1 clock.
    const double u = rng.exponential(p.lambda + 1.0);
    clocks.set_infection(path[i], path[i + 1], u);
    clocks.set_recovery(path[i], u + rng.exponential(1.0));
    const double g = rng.exponential(p.gamma + 1.0 + p.delta);
    clocks.set_maturation(path[i + 1], g);
    clocks.set_removal(path[i + 1], g + rng.exponential(1.0 + p.delta));
  }
}

SirTrajectory sir_from_clocks(const ClockBundle& clocks, const SparseConfig& init) {
  enum class Action { attempt = 0, mature = 1, remove = 2, recover = 3 };
  using Pending = std::tuple<double, Site, Action>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::map<Site, SiteState> state;
  auto state_of = [&](const Site& x) {
    auto it = state.find(x);
    return it == state.end() ? SiteState::healthy : it->second;
  };

  SirTrajectory out;
  std::size_t active = 0;

  auto become_full = [&](const Site& x, double t) {
    state[x] = SiteState::fully_infected;
    out.ever_fully_infected.insert(x);
    const double w = clocks.recovery(x);
    queue.emplace(t + w, x, Action::recover);
    for (const Site& y : clocks.region().neighbors(x)) {
      const double u = clocks.infection(x, y);
      if (u < w) queue.emplace(t + u, y, Action::attempt);
    }
  };

  for (const auto& [x, s] : init.entries()) {
    if (s != SiteState::fully_infected) throw DomainError("initial states must be 0 or 2");
    if (!clocks.region().contains(x)) throw DomainError("initial site outside the clock region");
  }
  for (const auto& [x, s] : init.entries()) {
    become_full(x, 0.0);
    ++active;
  }

  while (!queue.empty()) {
    auto [t, x, action] = queue.top();
    queue.pop();
    switch (action) {
      case Action::attempt:
        if (state_of(x) != SiteState::healthy) break;
        state[x] = SiteState::semi_infected;
        ++active;
        out.events.push_back({t, x, SiteState::semi_infected});
        if (clocks.maturation(x) < clocks.removal(x)) {
          queue.emplace(t + clocks.maturation(x), x, Action::mature);
        } else {
          queue.emplace(t + clocks.removal(x), x, Action::remove);
        }
        break;
      case Action::mature:
        out.events.push_back({t, x, SiteState::fully_infected});
        become_full(x, t);
        break;
      case Action::remove:
      case Action::recover:
        state[x] = SiteState::recovered;
        out.events.push_back({t, x, SiteState::recovered});
        if (--active == 0) out.extinction_time = t;
        break;
    }
  }
  return out;
}

bool verify_path_containment(std::span<const Site> path, const ClockBundle& clocks) {
  if (!event_A(path, clocks)) return true;
  SparseConfig init;
  init.set(path.front(), SiteState::fully_infected);
  return sir_from_clocks(clocks, init).ever_fully_infected.contains(path.back());
}

namespace {

bool extend_open(const ClockBundle& clocks, const WalkShape& shape, std::vector<Site>& path,
                 std::unordered_set<Site, SiteHash>& on_path, std::size_t n) {
  const std::size_t i = path.size();  // index of the site being added
  if (i > n) return true;
  const Site x = path.back();
  auto try_step = [&](int axis, int sign) {
    Site y = x.shifted(axis, sign);
    if (on_path.contains(y) || !edge_open(clocks, x, y)) return false;
    path.push_back(y);
    on_path.insert(y);
    const bool ok = extend_open(clocks, shape, path, on_path, n);
    on_path.erase(path.back());
    path.pop_back();
    return ok;
  };
  if (shape.is_drift_step(i)) {
    for (int axis = shape.d - shape.band; axis < shape.d; ++axis) {
      if (try_step(axis, 1)) return true;
    }
    return false;
  }
  for (int axis = 0; axis < shape.free_axes(); ++axis) {
    for (int sign : {1, -1}) {
      if (try_step(axis, sign)) return true;
    }
  }
  return false;
}

}  // namespace

bool union_event(const ClockBundle& clocks, const WalkShape& shape, std::size_t n) {
  if (clocks.region().dim() != shape.d) throw DomainError("dimension mismatch");
  std::vector<Site> path{Site::origin(shape.d)};
  std::unordered_set<Site, SiteHash> on_path{path.front()};
  return extend_open(clocks, shape, path, on_path, n);
}

UnionEstimate estimate_union_probability(int d, const ProcessParams& p, std::size_t n, std::size_t samples,
                                         std::uint64_t seed, unsigned threads) {
  if (samples == 0) throw ParameterError("samples must be >= 1");
  const WalkShape shape = WalkShape::for_dimension(d);
  const Region region = Region::box(Geometry::box(d, static_cast<int>(n)));
  auto hits = run_replicas<char>(0, samples, threads, [&](std::size_t i) {
    const ClockBundle clocks(region, p, derive_seed(seed, i));
    return static_cast<char>(union_event(clocks, shape, n));
  });
  UnionEstimate out;
  out.samples = samples;
  for (char h : hits) out.hits += static_cast<std::size_t>(h);
  out.p_hat = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(samples));
  return out;
}

}  // namespace twostage
