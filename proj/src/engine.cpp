#include "twostage/engine.hpp"

#include <algorithm>
#include <cmath>

#include "site_table.hpp"
#include "twostage/errors.hpp"
#include "twostage/replicas.hpp"

namespace twostage {

using detail::IndexedSet;
using detail::SiteTable;

void ProcessParams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(lambda)) throw ParameterError("lambda must be finite and non-negative");
  if (!ok(gamma)) throw ParameterError("gamma must be finite and non-negative");
  if (!ok(delta)) throw ParameterError("delta must be finite and non-negative");
}

std::string to_string(ProcessKind kind) { return kind == ProcessKind::contact ? "contact" : "sir"; }

ProcessKind parse_kind(const std::string& name) {
  if (name == "contact") return ProcessKind::contact;
  if (name == "sir") return ProcessKind::sir;
  throw ParameterError("unknown process kind '" + name + "'");
}

SiteState state_from_code(int c) {
  if (c < -1 || c > 2) throw DomainError("state code out of range: " + std::to_string(c));
  return static_cast<SiteState>(c);
}

SiteState SparseConfig::get(const Site& x) const {
  auto it = states_.find(x);
  return it == states_.end() ? SiteState::healthy : it->second;
}

void SparseConfig::set(const Site& x, SiteState s) {
  if (s == SiteState::healthy) {
    states_.erase(x);
  } else {
    states_[x] = s;
  }
}

std::size_t SparseConfig::count(SiteState s) const {
  return static_cast<std::size_t>(
      std::ranges::count_if(states_, [s](const auto& kv) { return kv.second == s; }));
}

std::size_t SparseConfig::active() const {
  return count(SiteState::semi_infected) + count(SiteState::fully_infected);
}

SparseConfig uniform_config(const Geometry& g, SiteState s) {
  SparseConfig cfg;
  for (const Site& x : g.all_sites()) cfg.set(x, s);
  return cfg;
}

LinearValue LinearConfig::get(const Site& x) const {
  auto it = values_.find(x);
  return it == values_.end() ? LinearValue{} : it->second;
}

void LinearConfig::set(const Site& x, LinearValue v) {
  if (v.zeta < 0 || v.theta < 0) throw DomainError("linear system values must be non-negative");
  if (v.zeta == 0 && v.theta == 0) {
    values_.erase(x);
  } else {
    values_[x] = v;
  }
}

namespace {

std::size_t infected_neighbours(const SparseConfig& cfg, const Site& x, const Geometry& g) {
  std::size_t k = 0;
  for (const Site& y : g.neighbors(x)) {
    if (cfg.get(y) == SiteState::fully_infected) ++k;
  }
  return k;
}

std::vector<Transition> rates_impl(ProcessKind kind, const SparseConfig& cfg, const Site& x,
                                   const ProcessParams& p, const Geometry& g) {
  if (!g.contains(x)) throw DomainError("site " + x.str() + " outside " + g.describe());
  const SiteState removed = kind == ProcessKind::contact ? SiteState::healthy : SiteState::recovered;
  switch (cfg.get(x)) {
    case SiteState::fully_infected:
      return {{removed, 1.0}};
    case SiteState::semi_infected:
      if (kind == ProcessKind::contact) return {{SiteState::fully_infected, p.gamma}, {removed, 1.0 + p.delta}};
      return {{removed, 1.0 + p.delta}, {SiteState::fully_infected, p.gamma}};
    case SiteState::healthy: {
      const std::size_t k = infected_neighbours(cfg, x, g);
      if (k == 0) return {};
      return {{SiteState::semi_infected, p.lambda * static_cast<double>(k)}};
    }
    case SiteState::recovered:
      if (kind == ProcessKind::contact) throw DomainError("state -1 is not part of the contact process");
      return {};
  }
  return {};
}

void check_sample_times(const std::vector<double>& times, double horizon) {
  if (!std::isfinite(horizon) || horizon <= 0.0) throw ParameterError("horizon must be a positive real");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || times[i] > horizon) throw ParameterError("sample times must lie in [0, horizon]");
    if (i > 0 && times[i] < times[i - 1]) throw ParameterError("sample times must be ascending");
  }
}

// State of one contact/SIR replica on interned sites.
class Replica {
 public:
  Replica(ProcessKind kind, const ProcessParams& p, const Geometry& g, bool track_ever)
      : kind_(kind), p_(p), table_(g), degree_(g.degree()), track_ever_(track_ever) {}

  void load(const SparseConfig& init) {
    for (const auto& [x, s] : init.entries()) {
      if (kind_ == ProcessKind::contact && s == SiteState::recovered) {
        throw DomainError("state -1 is not part of the contact process");
      }
      set(table_.intern(x.coords()), s);
    }
  }

  std::size_t active() const { return semi_.size() + full_.size(); }

  double total_rate() const {
    return static_cast<double>(full_.size()) * (1.0 + static_cast<double>(degree_) * p_.lambda) +
           static_cast<double>(semi_.size()) * (1.0 + p_.gamma + p_.delta);
  }

  // Apply one event drawn proportionally to rate. Infection uses thinning: a
  // fully infected source and a direction are drawn uniformly and the attempt
  // only takes effect on a healthy in-domain neighbour, which realises rate
  // lambda * #(fully infected neighbours) for every healthy site.
  bool step(Rng& rng, double total) {
    const double n2 = static_cast<double>(full_.size());
    const double recover = n2;
    const double infect = n2 * static_cast<double>(degree_) * p_.lambda;
    const double u = rng.uniform() * total;
    const SiteState removed = kind_ == ProcessKind::contact ? SiteState::healthy : SiteState::recovered;
    if (u < recover) {
      set(full_.at(rng.below(full_.size())), removed);
      return true;
    }
    if (u < recover + infect) {
      const std::size_t pick = rng.below(full_.size() * static_cast<std::size_t>(degree_));
      const std::int32_t src = full_.at(pick / static_cast<std::size_t>(degree_));
      const std::int32_t dst = table_.neighbor(src, static_cast<int>(pick % static_cast<std::size_t>(degree_)));
      grow();
      if (dst < 0 || state_[static_cast<std::size_t>(dst)] != SiteState::healthy) return false;
      set(dst, SiteState::semi_infected);
      return true;
    }
    const std::int32_t s = semi_.at(rng.below(semi_.size()));
    const double mature = p_.gamma / (1.0 + p_.gamma + p_.delta);
    set(s, rng.uniform() < mature ? SiteState::fully_infected : removed);
    return true;
  }

  SparseConfig snapshot(double t) const {
    SparseConfig cfg(t);
    for (std::size_t id = 0; id < state_.size(); ++id) {
      if (state_[id] != SiteState::healthy) cfg.set(table_.site(static_cast<std::int32_t>(id)), state_[id]);
    }
    return cfg;
  }

  std::set<Site> ever_state2() const {
    std::set<Site> out;
    for (std::size_t id = 0; id < ever_.size(); ++id) {
      if (ever_[id]) out.insert(table_.site(static_cast<std::int32_t>(id)));
    }
    return out;
  }

 private:
  void grow() {
    if (state_.size() < table_.size()) {
      state_.resize(table_.size(), SiteState::healthy);
      if (track_ever_) ever_.resize(table_.size(), 0);
    }
  }

  void set(std::int32_t id, SiteState s) {
    grow();
    const auto i = static_cast<std::size_t>(id);
    state_[i] = s;
    if (s == SiteState::semi_infected) {
      semi_.insert(id);
    } else {
      semi_.erase(id);
    }
    if (s == SiteState::fully_infected) {
      full_.insert(id);
      if (track_ever_) ever_[i] = 1;
    } else {
      full_.erase(id);
    }
  }

  ProcessKind kind_;
  ProcessParams p_;
  SiteTable table_;
  int degree_;
  bool track_ever_;
  std::vector<SiteState> state_;
  std::vector<char> ever_;
  IndexedSet semi_;
  IndexedSet full_;
};

}  // namespace

std::vector<Transition> site_rates_contact(const SparseConfig& cfg, const Site& x, const ProcessParams& p,
                                           const Geometry& g) {
  return rates_impl(ProcessKind::contact, cfg, x, p, g);
}

std::vector<Transition> site_rates_sir(const SparseConfig& cfg, const Site& x, const ProcessParams& p,
                                       const Geometry& g) {
  return rates_impl(ProcessKind::sir, cfg, x, p, g);
}

std::vector<Transition> site_rates(ProcessKind kind, const SparseConfig& cfg, const Site& x,
                                   const ProcessParams& p, const Geometry& g) {
  return rates_impl(kind, cfg, x, p, g);
}

TrajectorySummary simulate(ProcessKind kind, const SparseConfig& init, const ProcessParams& p, const Geometry& g,
                           const SimulateOptions& opts, Rng& rng) {
  p.validate();
  check_sample_times(opts.sample_times, opts.horizon);
  if (!(std::isfinite(init.time()) && init.time() >= 0.0)) {
    throw ParameterError("initial time must be finite and non-negative");
  }

  Replica rep(kind, p, g, opts.track_ever_state2);
  rep.load(init);

  TrajectorySummary out;
  std::size_t next_sample = 0;
  auto flush_before = [&](double limit) {
    while (next_sample < opts.sample_times.size() && opts.sample_times[next_sample] < limit) {
      out.samples.push_back(rep.snapshot(opts.sample_times[next_sample]));
      ++next_sample;
    }
  };

  double t = init.time();
  out.peak_active = rep.active();
  for (;;) {
    const std::size_t active = rep.active();
    if (active == 0) {
      out.extinction_time = t;
      flush_before(std::numeric_limits<double>::infinity());
      break;
    }
    if (opts.stop.active_cap > 0 && active >= opts.stop.active_cap) {
      out.hit_cap = true;
      flush_before(std::nextafter(t, std::numeric_limits<double>::infinity()));
      break;
    }
    const double total = rep.total_rate();
    const double next = t + rng.exponential(total);
    if (next > opts.horizon) {
      t = opts.horizon;
      flush_before(std::numeric_limits<double>::infinity());
      break;
    }
    flush_before(next);
    t = next;
    if (rep.step(rng, total)) {
      ++out.event_count;
      out.peak_active = std::max(out.peak_active, rep.active());
    }
  }
  out.end_time = t;
  if (opts.keep_final_config) out.final_config = rep.snapshot(t);
  if (opts.track_ever_state2) out.ever_state2 = rep.ever_state2();
  return out;
}

std::vector<LinearConfig> simulate_linear(const LinearConfig& init, const ProcessParams& p, const Geometry& g,
                                          double horizon, const std::vector<double>& sample_times, Rng& rng) {
  p.validate();
  check_sample_times(sample_times, horizon);

  SiteTable table(g);
  std::vector<LinearValue> value;
  IndexedSet nonzero;  // (zeta, theta) != (0, 0)
  IndexedSet sources;  // zeta > 0
  auto grow = [&] {
    if (value.size() < table.size()) value.resize(table.size());
  };
  auto assign = [&](std::int32_t id, LinearValue v) {
    grow();
    value[static_cast<std::size_t>(id)] = v;
    if (v.zeta != 0 || v.theta != 0) {
      nonzero.insert(id);
    } else {
      nonzero.erase(id);
    }
    if (v.zeta > 0) {
      sources.insert(id);
    } else {
      sources.erase(id);
    }
  };
  for (const auto& [x, v] : init.entries()) {
    if (!g.contains(x)) throw DomainError("initial site " + x.str() + " outside " + g.describe());
    assign(table.intern(x.coords()), v);
  }

  auto snapshot = [&](double t) {
    LinearConfig cfg(t);
    for (std::size_t id = 0; id < value.size(); ++id) {
      if (value[id].zeta != 0 || value[id].theta != 0) cfg.set(table.site(static_cast<std::int32_t>(id)), value[id]);
    }
    return cfg;
  };

  std::vector<LinearConfig> out;
  std::size_t next_sample = 0;
  auto flush_before = [&](double limit) {
    while (next_sample < sample_times.size() && sample_times[next_sample] < limit) {
      out.push_back(snapshot(sample_times[next_sample]));
      ++next_sample;
    }
  };

  const double degree = static_cast<double>(g.degree());
  const double local = 1.0 + p.delta + p.gamma;
  double t = init.time();
  while (next_sample < sample_times.size()) {
    if (nonzero.size() == 0) {
      flush_before(std::numeric_limits<double>::infinity());
      break;
    }
    const double own = static_cast<double>(nonzero.size()) * local;
    const double spread = static_cast<double>(sources.size()) * degree * p.lambda;
    const double total = own + spread;
    const double next = t + rng.exponential(total);
    flush_before(next);
    if (next > horizon) break;
    t = next;
    if (rng.uniform() * total < own) {
      const std::int32_t id = nonzero.at(rng.below(nonzero.size()));
      LinearValue v = value[static_cast<std::size_t>(id)];
      const double u = rng.uniform() * local;
      if (u < 1.0) {
        v = {};
      } else if (u < 1.0 + p.delta) {
        v.theta = 0;
      } else {
        v.zeta += v.theta;
        v.theta = 0;
      }
      assign(id, v);
    } else {
      // One rate-lambda clock per ordered pair (x, y): x's theta grows by zeta(y).
      const std::size_t pick = rng.below(sources.size() * static_cast<std::size_t>(g.degree()));
      const std::int32_t src = sources.at(pick / static_cast<std::size_t>(g.degree()));
      const std::int32_t dst = table.neighbor(src, static_cast<int>(pick % static_cast<std::size_t>(g.degree())));
      grow();
      if (dst >= 0) {
        LinearValue v = value[static_cast<std::size_t>(dst)];
        v.theta += value[static_cast<std::size_t>(src)].zeta;
        assign(dst, v);
      }
    }
  }
  return out;
}

SparseConfig project_linear(const LinearConfig& lc) {
  SparseConfig cfg(lc.time());
  for (const auto& [x, v] : lc.entries()) {
    if (v.zeta > 0) {
      cfg.set(x, SiteState::fully_infected);
    } else if (v.theta > 0) {
      cfg.set(x, SiteState::semi_infected);
    }
  }
  return cfg;
}

std::set<Site> fully_infected_set(const SparseConfig& cfg) {
  std::set<Site> out;
  for (const auto& [x, s] : cfg.entries()) {
    if (s == SiteState::fully_infected) out.insert(x);
  }
  return out;
}

OccupationFractions occupation_fractions(const ProcessParams& p, const Geometry& torus, double t,
                                         std::size_t replicas, std::uint64_t seed) {
  if (!torus.is_torus()) throw DomainError("occupation fractions need a torus");
  if (replicas == 0) throw ParameterError("replicas must be >= 1");
  const SparseConfig init = uniform_config(torus, SiteState::fully_infected);
  const double sites = static_cast<double>(torus.site_count());
  SimulateOptions opts;
  opts.horizon = t;
  opts.sample_times = {t};
  opts.keep_final_config = false;
  OccupationFractions acc;
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(seed, r);
    const auto run = simulate(ProcessKind::contact, init, p, torus, opts, rng);
    const SparseConfig& snap = run.samples.front();
    const double semi = static_cast<double>(snap.count(SiteState::semi_infected)) / sites;
    const double full = static_cast<double>(snap.count(SiteState::fully_infected)) / sites;
    acc.semi += semi;
    acc.full += full;
    acc.healthy += 1.0 - semi - full;
  }
  const double n = static_cast<double>(replicas);
  return {acc.healthy / n, acc.semi / n, acc.full / n};
}

}  // namespace twostage
