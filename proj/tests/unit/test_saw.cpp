#include <array>
#include <cmath>
#include <map>

#include "doctest.h"
#include "twostage/errors.hpp"
#include "twostage/saw.hpp"

using namespace twostage;

namespace {

// Quadratic-time reference for the overlap statistics.
PairStats brute_pair_stats(const WalkPath& s, const WalkPath& v, std::size_t n) {
  PairStats out;
  for (std::size_t i = 0; i <= n; ++i) {
    bool in_f = false;
    bool in_k = false;
    for (std::size_t j = 0; j <= n; ++j) {
      if (v[i] != s[j]) continue;
      in_f = true;
      if (i < n && j < n && v[i + 1] == s[j + 1]) in_k = true;
    }
    out.f_size += in_f;
    out.k_size += in_k;
    out.f_minus_k_size += in_f && !in_k;
  }
  return out;
}

}  // namespace

TEST_SUITE("saw") {
  TEST_CASE("walk shapes with the natural log") {
    const std::array<std::array<int, 4>, 6> table{{
        {3, 1, 2, 1}, {6, 1, 3, 5}, {10, 2, 4, 10}, {12, 2, 4, 14}, {50, 3, 12, 73}, {200, 5, 37, 321},
    }};
    for (const auto& [d, period, band, floor] : table) {
      const WalkShape s = WalkShape::for_dimension(d);
      CHECK(s.period == period);
      CHECK(s.band == band);
      CHECK(s.admissible_floor() == floor);
    }
    CHECK_THROWS_AS(WalkShape::for_dimension(2), ContractError);
  }

  TEST_CASE("first admissible set at d = 10") {
    WalkPath w(10);
    CHECK(admissible_count(w) == 12);
    CHECK(admissible_next(w).size() == 12);
  }

  TEST_CASE("admissible sets are undefined at drift steps") {
    WalkPath w(10);
    w.push(Site::unit(10, 0));
    CHECK_THROWS_AS(admissible_next(w), ContractError);
    CHECK_THROWS_AS(admissible_count(w), ContractError);
  }

  TEST_CASE("straight-line history") {
    // d = 50: period 3, 38 free axes. Free moves along +e_1 with the forced
    // drift +e_50 at steps 3, 6, ...; only the site one step back is ever
    // adjacent, and only at the second free step of each block.
    WalkPath w(50);
    for (std::size_t i = 1; i <= 12; ++i) {
      const bool drift = i % 3 == 0;
      if (!drift) CHECK(admissible_count(w) == (i % 3 == 1 ? 76u : 75u));
      w.push(w.back().shifted(drift ? 49 : 0, 1));
    }
    CHECK(in_path_class(w.sites(), WalkShape::for_dimension(50)));
  }

  TEST_CASE("Eq 4.4 and 4.5 on sampled walks") {
    for (int d : {10, 12, 50, 200}) {
      const WalkShape shape = WalkShape::for_dimension(d);
      for (std::size_t r = 0; r < 20; ++r) {
        Rng rng(8, r);
        WalkPath w(shape);
        for (std::size_t i = 1; i <= 500; ++i) {
          if (!shape.is_drift_step(i)) {
            const std::size_t h = admissible_count(w);
            REQUIRE(h >= static_cast<std::size_t>(shape.admissible_floor()));
            REQUIRE(2 * static_cast<std::size_t>(shape.free_axes()) - h <= static_cast<std::size_t>(shape.period));
          }
          step_walk(w, rng);
        }
      }
    }
  }

  TEST_CASE("sampled walks are in the path class and drift level rises at drift steps") {
    for (int d : {3, 6, 10, 50}) {
      const WalkShape shape = WalkShape::for_dimension(d);
      Rng rng(31, static_cast<std::uint64_t>(d));
      WalkPath w = sample_walk(d, 300, rng);
      CHECK(in_path_class(w.sites(), shape));
      for (std::size_t i = 1; i <= 300; ++i) {
        const auto diff = drift_level(w[i], shape) - drift_level(w[i - 1], shape);
        CHECK(diff == (shape.is_drift_step(i) ? 1 : 0));
      }
    }
  }

  TEST_CASE("path class validator rejects bad paths") {
    const WalkShape s = WalkShape::for_dimension(10);
    const Site o = Site::origin(10);
    std::vector<Site> good{o, Site::unit(10, 2), Site::unit(10, 2).shifted(9, 1)};
    CHECK(in_path_class(good, s));
    std::vector<Site> drift_first{o, Site::unit(10, 9)};
    CHECK_FALSE(in_path_class(drift_first, s));
    std::vector<Site> wrong_drift{o, Site::unit(10, 2), Site::unit(10, 2).shifted(3, 1)};
    CHECK_FALSE(in_path_class(wrong_drift, s));
    std::vector<Site> negative_drift{o, Site::unit(10, 2), Site::unit(10, 2).shifted(9, -1)};
    CHECK_FALSE(in_path_class(negative_drift, s));
    // d = 50 has two free steps per block, so a path can step straight back.
    std::vector<Site> revisit{Site::origin(50), Site::unit(50, 0), Site::origin(50)};
    CHECK_FALSE(in_path_class(revisit, WalkShape::for_dimension(50)));
    CHECK_FALSE(in_path_class(std::vector<Site>{Site::unit(10, 0)}, s));
  }

  TEST_CASE("drift moves are uniform over the band") {
    // d = 10: drift steps are i = 2, 4, ... over axes 7..10 (0-based 6..9).
    std::map<int, std::size_t> counts;
    std::size_t total = 0;
    for (std::size_t r = 0; total < 100000; ++r) {
      Rng rng(12, r);
      WalkPath w = sample_walk(10, 40, rng);
      for (std::size_t i = 2; i <= 40; i += 2) {
        for (int axis = 6; axis < 10; ++axis) {
          if (w[i][axis] != w[i - 1][axis]) ++counts[axis];
        }
        ++total;
      }
    }
    double chi2 = 0;
    const double expected = static_cast<double>(total) / 4.0;
    for (const auto& [axis, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(counts.size() == 4);
    CHECK(chi2 < 16.27);  // chi-square, 3 degrees of freedom, p = 0.001
  }

  TEST_CASE("pair statistics: closed cases") {
    Rng rng(4);
    WalkPath s = sample_walk(10, 50, rng);
    const PairStats same = pair_stats(s, s, 50);
    CHECK(same.f_size == 51);
    CHECK(same.k_size == 50);
    CHECK(same.f_minus_k_size == 1);

    WalkPath a(10);
    WalkPath b(10);
    a.push(Site::unit(10, 0));
    b.push(Site::unit(10, 0).shifted(0, -2));
    const PairStats apart = pair_stats(a, b, 1);
    CHECK(apart.f_size == 1);
    CHECK(apart.k_size == 0);
    CHECK(apart.f_minus_k_size == 1);
    CHECK_THROWS_AS(pair_stats(a, b, 2), ContractError);
  }

  TEST_CASE("pair statistics agree with the brute-force matcher") {
    for (std::size_t r = 0; r < 200; ++r) {
      Rng rng(19, r);
      // d = 6 overlaps often (every step drifts); d = 10 is the target setting.
      const int d = r % 2 == 0 ? 10 : 6;
      WalkPath s = sample_walk(d, 200, rng);
      WalkPath v = sample_walk(d, 200, rng);
      for (std::size_t n : {1u, 7u, 50u, 200u}) {
        const PairStats fast = pair_stats(s, v, n);
        const PairStats slow = brute_pair_stats(s, v, n);
        REQUIRE(fast.f_size == slow.f_size);
        REQUIRE(fast.k_size == slow.k_size);
        REQUIRE(fast.f_minus_k_size == slow.f_minus_k_size);
      }
    }
  }

  TEST_CASE("weights") {
    CHECK(pair_weight({1, 0, 1}, {0.3, 1, 1}) == doctest::Approx(2.0));
    for (std::size_t n : {1u, 5u, 12u}) {
      const double want = 2.0 * std::pow(3.0, n) * std::pow(2.0, n);
      CHECK(pair_weight({n + 1, n, 1}, {1, 1, 1}) == doctest::Approx(want).epsilon(1e-13));
      CHECK(log_pair_weight({n + 1, n, 1}, {1, 1, 1}) == doctest::Approx(std::log(want)).epsilon(1e-13));
    }
    CHECK(pair_weight({3, 1, 2}, {0.5, 1, 1}) == doctest::Approx(108.0));
    CHECK_THROWS_AS(pair_weight({0, 0, 0}, {1, 1, 1}), ContractError);
    CHECK_THROWS_AS(pair_weight({1, 0, 1}, {0, 1, 1}), ParameterError);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
      WalkPath s = sample_walk(6, 30, rng);
      WalkPath v = sample_walk(6, 30, rng);
      CHECK(pair_weight(pair_stats(s, v, 30), {0.2, 0.7, 1.1}) >= 1.0);
    }
  }

  TEST_CASE("survival lower bound at d = 12") {
    const double lambda = lambda_from_theta(12, 1.5, 1, 1);
    CHECK(lambda == doctest::Approx(1.5 * 3 / 24));
    const SurvivalBound b = estimate_survival_lower_bound(12, {lambda, 1, 1}, 400, 2000, 5, 1);
    CHECK(b.estimate > 0.0);
    CHECK(b.estimate <= 1.0);
    CHECK(std::isfinite(b.estimate));
    CHECK(b.ci.low <= b.estimate);
    CHECK(b.estimate <= b.ci.high);
    REQUIRE(b.convergence.size() == 3);
    CHECK(b.convergence[0].n == 100);
    CHECK(b.convergence[2].n == 400);
    CHECK(b.replicas == 2000);
    auto again = estimate_survival_lower_bound(12, {lambda, 1, 1}, 400, 2000, 5, 3);
    CHECK(again.estimate == b.estimate);
  }

  TEST_CASE("union lower bound") {
    std::vector<double> one{0.37};
    CHECK(union_lower_bound(one, {{0.37}}, std::vector<double>{1.0}) == doctest::Approx(0.37).epsilon(1e-15));
    // Independent events: closed form against inclusion-exclusion.
    const double p1 = 0.3, p2 = 0.6;
    std::vector<double> probs{p1, p2};
    const std::vector<std::vector<double>> pair{{p1, p1 * p2}, {p1 * p2, p2}};
    const double bound = union_lower_bound(probs, pair, std::vector<double>{0.5, 0.5});
    CHECK(bound == doctest::Approx(1.0 / (0.25 * (1 / p1 + 1 / p2 + 2))).epsilon(1e-14));
    CHECK(bound <= p1 + p2 - p1 * p2);
    std::vector<double> with_zero{0.0, 0.5};
    CHECK_THROWS_AS(union_lower_bound(with_zero, pair, std::vector<double>{0.5, 0.5}), DomainError);
    CHECK_THROWS_AS(union_lower_bound(probs, pair, std::vector<double>{0.5, 0.6}), DomainError);
  }

  TEST_CASE("walk push validation") {
    WalkPath w(10);
    CHECK_THROWS_AS(w.push(Site::unit(10, 0).shifted(1, 1)), DomainError);
    w.push(Site::unit(10, 0));
    CHECK_THROWS_AS(w.push(Site::origin(10)), DomainError);
    CHECK(w.index_of(Site::unit(10, 0)) == std::optional<std::size_t>{1});
    CHECK(w.visited_step(0, -1));
    CHECK_FALSE(w.visited_step(0, 1));
  }
}
