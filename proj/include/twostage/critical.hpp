#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twostage/engine.hpp"
#include "twostage/stats.hpp"

namespace twostage {

/// Finite stand-in for "the infection never dies out": a run survives if it
/// reaches `cap` active sites or is still active at `horizon`.
struct SurvivalProxy {
  double horizon = 100.0;
  std::size_t cap = 5000;
  int box_radius = 50;

  /// T = 100, box radius 50, cap 5000 (2000 from d = 10 on).
  static SurvivalProxy defaults(int d);
  void validate() const;
  std::string describe(int d) const;
};

struct SurvivalEstimate {
  std::size_t trials = 0;
  std::size_t survivals = 0;
  double p_hat = 0.0;
  Interval ci95;
  std::string proxy;
};

/// Replica r runs from {O: 2} with Rng(seed, r).
SurvivalEstimate estimate_survival(ProcessKind kind, int d, const ProcessParams& p, const SurvivalProxy& proxy,
                                   std::size_t replicas, std::uint64_t seed, unsigned threads = 1);

/// Seed used for the estimate at a given lambda; depends only on (master, lambda).
std::uint64_t probe_seed(std::uint64_t master, double lambda);

struct SweepRow {
  double lambda = 0.0;
  SurvivalEstimate estimate;
};

std::vector<SweepRow> sweep(ProcessKind kind, int d, const ProcessParams& p, const std::vector<double>& lambdas,
                            const SurvivalProxy& proxy, std::size_t replicas, std::uint64_t seed,
                            unsigned threads = 1);

/// Adjacent pairs whose estimates decrease by more than their combined 95% half-widths.
std::size_t monotonicity_violations(const std::vector<SweepRow>& rows);

struct BisectSettings {
  double eps = 0.02;                    // survival level that defines the crossing
  double tol = 0.002;                   // final bracket width in lambda
  std::size_t probe_replicas = 2000;
  std::size_t bracket_replicas = 10000;
  double lambda_max = 10.0;
  SurvivalProxy proxy;

  void validate() const;
};

struct Probe {
  double lambda = 0.0;
  std::string role;  // "bracket" or "bisect"
  SurvivalEstimate estimate;
};

struct CriticalEstimate {
  ProcessKind kind = ProcessKind::contact;
  int d = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double lambda_hat = 0.0;
  double threshold_eps = 0.0;
  double resolution = 0.0;
  double scaled = 0.0;  // 2 d lambda_hat
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  /// Largest probe clearly below eps and smallest probe clearly above it.
  Interval lambda_ci;
  std::vector<Probe> probes;
  std::string proxy;
};

/// Bracket by doubling up from lower_bound_lambda, then bisect until the
/// bracket is at most tol wide. Throws BracketError past lambda_max.
CriticalEstimate bisect_critical(ProcessKind kind, int d, double gamma, double delta, const BisectSettings& settings,
                                 std::uint64_t seed, unsigned threads = 1);

struct TrendRow {
  int d = 0;
  double lambda_hat = 0.0;
  double scaled = 0.0;
  Interval scaled_ci;
  CriticalEstimate detail;
};

struct TrendResult {
  std::vector<TrendRow> rows;
  double target = 0.0;  // 1 + (1 + delta) / gamma
  /// Adjacent rows where the scaled value rises by more than the combined half-widths.
  std::size_t increases = 0;
};

/// Bisection per dimension; `d_list` must be strictly ascending.
TrendResult trend_study(ProcessKind kind, const std::vector<int>& d_list, double gamma, double delta,
                        const BisectSettings& settings, std::uint64_t seed, unsigned threads = 1,
                        bool per_dimension_proxy = true);

}  // namespace twostage
