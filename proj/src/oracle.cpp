#include "twostage/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "twostage/errors.hpp"
#include "twostage/saw.hpp"

namespace twostage {

int ExactChain::digit(SiteState s) const {
  return kind_ == ProcessKind::sir ? code(s) + 1 : code(s);
}

SiteState ExactChain::site_state(std::size_t index, std::size_t site) const {
  const int dgt = static_cast<int>((index / place_[site]) % base_);
  return state_from_code(kind_ == ProcessKind::sir ? dgt - 1 : dgt);
}

std::size_t ExactChain::index_of(const SparseConfig& cfg) const {
  std::size_t index = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const SiteState s = cfg.get(sites_[i]);
    if (s != SiteState::healthy) ++matched;
    if (kind_ == ProcessKind::contact && s == SiteState::recovered) {
      throw DomainError("state -1 does not exist in the contact process");
    }
    index += static_cast<std::size_t>(digit(s)) * place_[i];
  }
  if (matched != cfg.size()) throw DomainError("configuration has sites outside the geometry");
  return index;
}

SparseConfig ExactChain::config(std::size_t index) const {
  if (index >= state_count()) throw DomainError("state index out of range");
  SparseConfig cfg;
  for (std::size_t i = 0; i < sites_.size(); ++i) cfg.set(sites_[i], site_state(index, i));
  return cfg;
}

std::vector<std::pair<std::size_t, double>> ExactChain::row(std::size_t index) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t k = row_start_[index]; k < row_start_[index + 1]; ++k) out.emplace_back(target_[k], rate_[k]);
  return out;
}

double ExactChain::entry(std::size_t i, std::size_t j) const {
  if (i == j) return -exit_rate_[i];
  for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
    if (target_[k] == j) return rate_[k];
  }
  return 0.0;
}

double ExactChain::max_exit_rate() const {
  return exit_rate_.empty() ? 0.0 : *std::max_element(exit_rate_.begin(), exit_rate_.end());
}

ExactChain build_exact(ProcessKind kind, const Geometry& g, const ProcessParams& p) {
  p.validate();
  ExactChain c;
  c.kind_ = kind;
  c.geometry_ = g;
  c.params_ = p;
  c.base_ = kind == ProcessKind::sir ? 4 : 3;

  const std::uint64_t n_sites = g.site_count();
  std::size_t states = 1;
  for (std::uint64_t i = 0; i < n_sites; ++i) {
    if (states > ExactChain::kMaxStates / c.base_) {
      throw ResourceError("exact state space of " + g.describe() + " exceeds 10^6 states");
    }
    states *= c.base_;
  }
  c.sites_ = g.all_sites();
  std::map<Site, std::size_t> position;
  for (std::size_t i = 0; i < c.sites_.size(); ++i) {
    position[c.sites_[i]] = i;
    c.place_.push_back(i == 0 ? 1 : c.place_[i - 1] * c.base_);
  }
  // Neighbour lists with multiplicity (a torus of side 2 would repeat them).
  std::vector<std::vector<std::size_t>> nbrs(c.sites_.size());
  for (std::size_t i = 0; i < c.sites_.size(); ++i) {
    for (const Site& y : g.neighbors(c.sites_[i])) nbrs[i].push_back(position.at(y));
  }

  const int full = c.digit(SiteState::fully_infected);
  const int semi = c.digit(SiteState::semi_infected);
  const int healthy = c.digit(SiteState::healthy);
  const int recovered = kind == ProcessKind::sir ? c.digit(SiteState::recovered) : -1;

  c.row_start_.reserve(states + 1);
  c.exit_rate_.resize(states);
  std::vector<int> digits(c.sites_.size());
  for (std::size_t s = 0; s < states; ++s) {
    c.row_start_.push_back(c.target_.size());
    std::size_t rest = s;
    for (auto& dg : digits) {
      dg = static_cast<int>(rest % c.base_);
      rest /= c.base_;
    }
    double total = 0.0;
    auto add = [&](std::size_t site, int to, double rate) {
      if (rate <= 0.0) return;
      const auto from = static_cast<std::ptrdiff_t>(digits[site]);
      const std::size_t target = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) +
                                                          (to - from) * static_cast<std::ptrdiff_t>(c.place_[site]));
      c.target_.push_back(static_cast<std::uint32_t>(target));
      c.rate_.push_back(rate);
      total += rate;
    };
    for (std::size_t i = 0; i < digits.size(); ++i) {
      const int dg = digits[i];
      if (dg == full) {
        add(i, kind == ProcessKind::sir ? recovered : healthy, 1.0);
      } else if (dg == semi) {
        add(i, full, p.gamma);
        add(i, kind == ProcessKind::sir ? recovered : healthy, 1.0 + p.delta);
      } else if (dg == healthy) {
        int k = 0;
        for (std::size_t j : nbrs[i]) k += digits[j] == full ? 1 : 0;
        add(i, semi, p.lambda * k);
      }
    }
    c.exit_rate_[s] = total;
  }
  c.row_start_.push_back(c.target_.size());
  return c;
}

std::vector<double> transient(const ExactChain& chain, std::size_t init, double t) {
  if (init >= chain.state_count()) throw DomainError("initial state index out of range");
  if (!(std::isfinite(t) && t >= 0.0)) throw DomainError("t must be finite and non-negative");
  std::vector<double> v(chain.state_count(), 0.0);
  v[init] = 1.0;
  const double rate = chain.max_exit_rate();
  if (t == 0.0 || rate == 0.0) return v;

  const double mu = rate * t;
  std::vector<double> out(v.size(), 0.0);
  std::vector<double> next(v.size());
  double cumulative = 0.0;
  const auto k_max = static_cast<std::size_t>(std::ceil(mu + 20.0 * std::sqrt(mu) + 100.0));
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double w = std::exp(-mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += w * v[i];
    cumulative += w;
    if (static_cast<double>(k) > mu && 1.0 - cumulative < 1e-11) break;
    // v <- v (I + Q / rate)
    for (std::size_t i = 0; i < v.size(); ++i) next[i] = v[i] * (1.0 - chain.exit_rate(i) / rate);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      for (const auto& [j, r] : chain.row(i)) next[j] += v[i] * r / rate;
    }
    v.swap(next);
  }
  return out;
}

std::array<double, 4> site_marginal(const ExactChain& chain, const std::vector<double>& dist, std::size_t site) {
  if (dist.size() != chain.state_count()) throw DomainError("distribution size does not match the chain");
  if (site >= chain.sites().size()) throw DomainError("site index out of range");
  std::array<double, 4> m{};
  for (std::size_t s = 0; s < dist.size(); ++s) m[static_cast<std::size_t>(code(chain.site_state(s, site)) + 1)] += dist[s];
  return m;
}

UnionCheckReport brute_union_spaces(std::size_t count, Rng& rng) {
  UnionCheckReport report;
  for (std::size_t trial = 0; trial < count; ++trial) {
    const std::size_t outcomes = 2 + rng.below(11);
    std::vector<double> mass(outcomes);
    for (double& m : mass) m = rng.exponential(1.0);
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (double& m : mass) m /= total;

    const std::size_t n_events = 1 + rng.below(6);
    std::vector<std::vector<char>> events;
    while (events.size() < n_events) {
      std::vector<char> ev(outcomes);
      for (char& e : ev) e = static_cast<char>(rng.bernoulli(0.4));
      if (std::find(ev.begin(), ev.end(), 1) != ev.end()) events.push_back(std::move(ev));
    }
    std::vector<double> probs(n_events, 0.0);
    std::vector<std::vector<double>> pair(n_events, std::vector<double>(n_events, 0.0));
    double union_p = 0.0;
    for (std::size_t o = 0; o < outcomes; ++o) {
      bool any = false;
      for (std::size_t i = 0; i < n_events; ++i) {
        if (!events[i][o]) continue;
        any = true;
        probs[i] += mass[o];
        for (std::size_t j = 0; j < n_events; ++j) {
          if (events[j][o]) pair[i][j] += mass[o];
        }
      }
      if (any) union_p += mass[o];
    }
    std::vector<double> weights(n_events);
    for (double& w : weights) w = rng.exponential(1.0);
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;
    // Renormalised weights can miss 1 by an ulp or two; fold the error into the last one.
    weights.back() = 1.0 - std::accumulate(weights.begin(), weights.end() - 1, 0.0);

    const double bound = union_lower_bound(probs, pair, weights);
    ++report.spaces;
    report.max_ratio = std::max(report.max_ratio, bound / union_p);
    if (bound > union_p * (1.0 + 1e-12)) {
      ++report.violations;
      std::ostringstream os;
      os << "space " << trial << ": bound " << bound << " > P(union) " << union_p;
      report.failures.push_back(os.str());
    }
    if (n_events == 1 && std::abs(bound - union_p) > 1e-12 * union_p) ++report.single_event_mismatches;
  }
  return report;
}

}  // namespace twostage
