#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twostage/lattice.hpp"
#include "twostage/rng.hpp"

namespace twostage {

/// Infection rate lambda, maturation rate gamma, extra semi-infected recovery delta.
struct ProcessParams {
  double lambda = 0.0;
  double gamma = 1.0;
  double delta = 1.0;

  /// Throws ParameterError unless every rate is finite and non-negative.
  void validate() const;
};

enum class ProcessKind { contact, sir };

std::string to_string(ProcessKind kind);
ProcessKind parse_kind(const std::string& name);

enum class SiteState : std::int8_t {
  recovered = -1,  // SIR only, absorbing
  healthy = 0,
  semi_infected = 1,
  fully_infected = 2,
};

inline int code(SiteState s) { return static_cast<int>(s); }
SiteState state_from_code(int c);

/// Site -> state with healthy sites left implicit. Iteration is in site order.
class SparseConfig {
 public:
  SparseConfig() = default;
  explicit SparseConfig(double time) : time_(time) {}

  SiteState get(const Site& x) const;
  void set(const Site& x, SiteState s);

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::size_t size() const { return states_.size(); }
  const std::map<Site, SiteState>& entries() const { return states_; }
  std::size_t count(SiteState s) const;
  /// Sites in state 1 or 2.
  std::size_t active() const;

  friend bool operator==(const SparseConfig&, const SparseConfig&) = default;

 private:
  std::map<Site, SiteState> states_;
  double time_ = 0.0;
};

/// Every site in the geometry set to `s` (torus or small box).
SparseConfig uniform_config(const Geometry& g, SiteState s);

struct LinearValue {
  std::int64_t zeta = 0;
  std::int64_t theta = 0;
  friend bool operator==(const LinearValue&, const LinearValue&) = default;
};

/// Site -> (zeta, theta) with (0, 0) left implicit.
class LinearConfig {
 public:
  LinearConfig() = default;
  explicit LinearConfig(double time) : time_(time) {}

  LinearValue get(const Site& x) const;
  void set(const Site& x, LinearValue v);

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  std::size_t size() const { return values_.size(); }
  const std::map<Site, LinearValue>& entries() const { return values_; }

  friend bool operator==(const LinearConfig&, const LinearConfig&) = default;

 private:
  std::map<Site, LinearValue> values_;
  double time_ = 0.0;
};

struct Transition {
  SiteState target;
  double rate;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Outgoing transitions of site x in the two-stage contact process.
std::vector<Transition> site_rates_contact(const SparseConfig& cfg, const Site& x, const ProcessParams& p,
                                           const Geometry& g);
/// Outgoing transitions of site x in the two-stage SIR model.
std::vector<Transition> site_rates_sir(const SparseConfig& cfg, const Site& x, const ProcessParams& p,
                                       const Geometry& g);
std::vector<Transition> site_rates(ProcessKind kind, const SparseConfig& cfg, const Site& x,
                                   const ProcessParams& p, const Geometry& g);

struct StopRule {
  /// Stop (and count as survival) once this many sites are in state 1 or 2. 0 disables.
  std::size_t active_cap = 0;
};

struct SimulateOptions {
  double horizon = 100.0;
  StopRule stop;
  bool track_ever_state2 = false;
  bool keep_final_config = true;
  /// Ascending times at which to snapshot the configuration. Times past the
  /// stopping point of a capped run are not filled in.
  std::vector<double> sample_times;
};

struct TrajectorySummary {
  SparseConfig final_config;
  /// Time of the last transition when no site is left in state 1 or 2.
  std::optional<double> extinction_time;
  bool hit_cap = false;
  double end_time = 0.0;
  std::size_t peak_active = 0;
  std::uint64_t event_count = 0;
  std::optional<std::set<Site>> ever_state2;
  std::vector<SparseConfig> samples;

  bool survived() const { return !extinction_time.has_value(); }
};

/// Exact-in-law next-event simulation of the contact or SIR process.
TrajectorySummary simulate(ProcessKind kind, const SparseConfig& init, const ProcessParams& p, const Geometry& g,
                           const SimulateOptions& opts, Rng& rng);

/// Simulate the (zeta, theta) linear system and return snapshots at `sample_times`
/// (ascending, each <= horizon).
std::vector<LinearConfig> simulate_linear(const LinearConfig& init, const ProcessParams& p, const Geometry& g,
                                          double horizon, const std::vector<double>& sample_times, Rng& rng);

/// 2 where zeta > 0, 1 where zeta == 0 < theta, 0 elsewhere.
SparseConfig project_linear(const LinearConfig& lc);

/// Sites in state 2.
std::set<Site> fully_infected_set(const SparseConfig& cfg);

/// Long-run occupation fractions of states 0, 1, 2 on a torus started from
/// all-2, averaged over replicas. Diagnostic only.
struct OccupationFractions {
  double healthy = 0.0;
  double semi = 0.0;
  double full = 0.0;
};
OccupationFractions occupation_fractions(const ProcessParams& p, const Geometry& torus, double t,
                                         std::size_t replicas, std::uint64_t seed);

}  // namespace twostage
