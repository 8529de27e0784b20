#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "twostage/engine.hpp"
#include "twostage/lattice.hpp"
#include "twostage/rng.hpp"

namespace twostage {

/// Full-state-space generator of the contact or SIR process on a tiny geometry.
/// Configuration index = sum_i digit(site i) * base^i with digit = state code + 1
/// for SIR (base 4) and the state code for the contact process (base 3); sites
/// are in Geometry::all_sites() order.
class ExactChain {
 public:
  static constexpr std::size_t kMaxStates = 1'000'000;

  ProcessKind kind() const { return kind_; }
  const Geometry& geometry() const { return geometry_; }
  const ProcessParams& params() const { return params_; }
  const std::vector<Site>& sites() const { return sites_; }
  std::size_t state_count() const { return exit_rate_.size(); }

  std::size_t index_of(const SparseConfig& cfg) const;
  SparseConfig config(std::size_t index) const;
  SiteState site_state(std::size_t index, std::size_t site) const;

  /// Off-diagonal transitions out of `index` as (target, rate).
  std::vector<std::pair<std::size_t, double>> row(std::size_t index) const;
  /// Generator entry Q(i, j), diagonal included.
  double entry(std::size_t i, std::size_t j) const;
  double exit_rate(std::size_t i) const { return exit_rate_[i]; }
  double max_exit_rate() const;

 private:
  friend ExactChain build_exact(ProcessKind, const Geometry&, const ProcessParams&);
  int digit(SiteState s) const;

  ProcessKind kind_ = ProcessKind::contact;
  Geometry geometry_ = Geometry::box(1, 0);
  ProcessParams params_;
  std::vector<Site> sites_;
  std::size_t base_ = 3;
  std::vector<std::size_t> place_;  // base^i
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> target_;
  std::vector<double> rate_;
  std::vector<double> exit_rate_;
};

/// Throws ResourceError if the state space exceeds ExactChain::kMaxStates.
ExactChain build_exact(ProcessKind kind, const Geometry& g, const ProcessParams& p);

/// Row `init` of exp(tQ) by uniformization; Poisson tail below 1e-11.
std::vector<double> transient(const ExactChain& chain, std::size_t init, double t);

/// P(site is in each state) under `dist`, indexed by state code + 1.
std::array<double, 4> site_marginal(const ExactChain& chain, const std::vector<double>& dist, std::size_t site);

struct UnionCheckReport {
  std::size_t spaces = 0;
  std::size_t violations = 0;
  std::size_t single_event_mismatches = 0;  // single-event families must give equality
  double max_ratio = 0.0;                   // largest bound / P(union)
  std::vector<std::string> failures;
};

/// Random finite probability spaces and event families: the union lower bound
/// is compared against the exact union probability from enumeration.
UnionCheckReport brute_union_spaces(std::size_t count, Rng& rng);

}  // namespace twostage
