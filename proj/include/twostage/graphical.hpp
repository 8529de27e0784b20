#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "twostage/engine.hpp"
#include "twostage/lattice.hpp"
#include "twostage/rng.hpp"
#include "twostage/saw.hpp"

namespace twostage {

/// Finite set of sites carrying clocks: either a whole box or an explicit list.
class Region {
 public:
  static Region box(const Geometry& g);
  static Region sites(const std::vector<Site>& sites);

  int dim() const { return d_; }
  bool contains(const Site& x) const;
  /// The 2d lattice neighbours of x that lie in the region.
  std::vector<Site> neighbors(const Site& x) const;
  std::vector<Site> enumerate() const;

 private:
  int d_ = 0;
  std::optional<Geometry> box_;
  std::unordered_set<Site, SiteHash> set_;
};

/// Independent exponential clocks of the SIR graphical construction:
///   recovery(x)     rate 1         fully infected -> recovered
///   removal(x)      rate 1 + delta semi-infected -> recovered
///   maturation(x)   rate gamma     semi-infected -> fully infected
///   infection(x, y) rate lambda    x infects y (ordered pair)
/// Each clock is a fixed function of (seed, kind, key), derived on first use,
/// so a bundle over a large region only pays for the keys it touches.
class ClockBundle {
 public:
  ClockBundle(Region region, const ProcessParams& p, std::uint64_t seed);

  double recovery(const Site& x) const;
  double removal(const Site& x) const;
  double maturation(const Site& x) const;
  double infection(const Site& x, const Site& y) const;

  void set_recovery(const Site& x, double v);
  void set_removal(const Site& x, double v);
  void set_maturation(const Site& x, double v);
  void set_infection(const Site& x, const Site& y, double v);

  const Region& region() const { return region_; }
  const ProcessParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  struct Counts {
    std::size_t sites = 0;          // each of recovery / removal / maturation
    std::size_t ordered_pairs = 0;  // infection clocks
  };
  Counts counts() const;

 private:
  enum class Kind : std::uint64_t { recovery = 1, removal = 2, maturation = 3, infection = 4 };
  double derive(Kind kind, const Site& x, const Site* y, double rate) const;
  void check_site(const Site& x) const;

  Region region_;
  ProcessParams params_;
  std::uint64_t seed_;
  std::map<Site, double> recovery_;
  std::map<Site, double> removal_;
  std::map<Site, double> maturation_;
  std::map<std::pair<Site, Site>, double> infection_;
};

/// Draw a bundle over `region`; throws DomainError for an empty region.
ClockBundle sample_clocks(const Region& region, const ProcessParams& p, Rng& rng);

/// Along the path, every infection clock beats the source's recovery clock and
/// every maturation clock beats the target's removal clock.
bool event_A(std::span<const Site> path, const ClockBundle& clocks);

/// Overwrite the clocks along `path` with a draw from their law conditioned on
/// event_A holding. Other clocks are untouched.
void condition_on_path(ClockBundle& clocks, std::span<const Site> path, Rng& rng);

struct SirEvent {
  double time = 0.0;
  Site site;
  SiteState to = SiteState::healthy;
};

struct SirTrajectory {
  std::vector<SirEvent> events;  // in time order
  std::set<Site> ever_fully_infected;
  double extinction_time = 0.0;
};

/// Deterministic two-stage SIR trajectory driven by the clocks. Simultaneous
/// events are ordered lexicographically by site.
SirTrajectory sir_from_clocks(const ClockBundle& clocks, const SparseConfig& init);

/// true iff event_A fails or the path end is ever fully infected.
bool verify_path_containment(std::span<const Site> path, const ClockBundle& clocks);

/// Whether some path of the drifting walk class with n steps has event_A.
bool union_event(const ClockBundle& clocks, const WalkShape& shape, std::size_t n);

struct UnionEstimate {
  std::size_t samples = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
};

/// Direct Monte Carlo estimate of P(some n-step path in the class has event_A).
UnionEstimate estimate_union_probability(int d, const ProcessParams& p, std::size_t n, std::size_t samples,
                                         std::uint64_t seed, unsigned threads = 1);

}  // namespace twostage
