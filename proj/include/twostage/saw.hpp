#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "twostage/engine.hpp"
#include "twostage/lattice.hpp"
#include "twostage/rng.hpp"
#include "twostage/stats.hpp"

namespace twostage {

/// Layout of the drifting self-avoiding walk in dimension d (natural log):
/// every `period` = floor(log d) steps the walk moves +e_j along one of the
/// last `band` = floor(d / log d) axes; all other steps are +/- e_j along the
/// first d - band axes and avoid previously visited sites.
struct WalkShape {
  int d = 0;
  int period = 0;
  int band = 0;

  /// Throws ContractError unless 2 (d - band) - period >= 1 (needs d >= 3).
  static WalkShape for_dimension(int d);

  int free_axes() const { return d - band; }
  /// Whether the step that produces site i (i >= 1) is a drift step.
  bool is_drift_step(std::size_t i) const { return i >= 1 && i % static_cast<std::size_t>(period) == 0; }
  /// Guaranteed minimum size of the admissible set at non-drift steps.
  int admissible_floor() const { return 2 * (d - band) - period; }
  bool is_drift_axis(int axis) const { return axis >= d - band; }
};

/// Sum of |x_j| over the drift axes.
std::int64_t drift_level(const Site& x, const WalkShape& shape);

/// A self-avoiding path from the origin with O(1) membership lookup.
class WalkPath {
 public:
  explicit WalkPath(int d);
  explicit WalkPath(const WalkShape& shape);

  const WalkShape& shape() const { return shape_; }
  int dim() const { return shape_.d; }
  /// Number of steps n (the path has n + 1 sites).
  std::size_t steps() const { return sites_.size() - 1; }
  std::span<const Site> sites() const { return sites_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  const Site& back() const { return sites_.back(); }

  /// Index of x in the path, if visited.
  std::optional<std::size_t> index_of(const Site& x) const;
  bool contains(const Site& x) const { return index_of(x).has_value(); }
  /// Whether back() + sign * e_{axis+1} was visited.
  bool visited_step(int axis, int sign) const;

  /// Append a site; throws DomainError unless it is an unvisited neighbour of back().
  void push(Site x);

 private:
  std::optional<std::size_t> find(std::uint64_t key, const Site& x) const;

  WalkShape shape_;
  std::vector<Site> sites_;
  std::vector<std::uint64_t> keys_;
  std::unordered_multimap<std::uint64_t, std::uint32_t> index_;
};

/// Path-class membership: starts at O, self-avoiding, step i -> i+1 is +e_j on
/// a drift axis when period divides i + 1, and +/- e_j on a free axis otherwise.
bool in_path_class(std::span<const Site> path, const WalkShape& shape);

/// Unvisited sites one free-axis step from the end of the history. Only
/// defined when the next step is not a drift step (ContractError otherwise).
std::vector<Site> admissible_next(const WalkPath& history);
std::size_t admissible_count(const WalkPath& history);

/// Extend the walk by one step and return the new site.
const Site& step_walk(WalkPath& history, Rng& rng);
WalkPath sample_walk(int d, std::size_t steps, Rng& rng);

struct PairStats {
  std::size_t f_size = 0;         // i <= n with V_i on S
  std::size_t k_size = 0;         // i <= n-1 where (V_i, V_i+1) is an edge (S_j, S_j+1)
  std::size_t f_minus_k_size = 0;  // |F \ K|
};

/// Overlap statistics of two walks truncated at n steps.
PairStats pair_stats(const WalkPath& s, const WalkPath& v, std::size_t n);

/// 2^|F\K| ((1+gamma+delta)/gamma)^(|F|-1) ((lambda+1)/lambda)^|K|.
double pair_weight(const PairStats& stats, const ProcessParams& p);
double log_pair_weight(const PairStats& stats, const ProcessParams& p);

struct BoundPoint {
  std::size_t n = 0;
  double mean_weight = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 1 / mean_weight
};

struct SurvivalBound {
  double estimate = 0.0;  // 1 / mean weight at n_max
  Interval ci;            // delta-method 95% interval
  std::vector<BoundPoint> convergence;  // n_max/4, n_max/2, n_max
  double relative_change = 0.0;  // |bound(n_max) - bound(n_max/2)| / bound(n_max)
  double top_share = 0.0;        // share of the weight sum carried by the top 1%
  bool heavy_tail = false;       // top_share > 0.5
  std::size_t replicas = 0;
};

/// Monte Carlo second-moment lower bound on the survival probability from
/// independent walk pairs.
SurvivalBound estimate_survival_lower_bound(int d, const ProcessParams& p, std::size_t n_max, std::size_t replicas,
                                            std::uint64_t seed, unsigned threads = 1);

/// lambda = theta (1 + gamma + delta) / (2 d gamma).
double lambda_from_theta(int d, double theta, double gamma, double delta);

/// 1 / sum_ij w_i w_j P(B_i & B_j) / (P(B_i) P(B_j)), a lower bound on P(union B_i).
double union_lower_bound(std::span<const double> probs, const std::vector<std::vector<double>>& pair_probs,
                         std::span<const double> weights);

}  // namespace twostage
