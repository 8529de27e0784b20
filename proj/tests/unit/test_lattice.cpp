#include <algorithm>
#include <set>

#include "doctest.h"
#include "twostage/errors.hpp"
#include "twostage/lattice.hpp"

using namespace twostage;

TEST_SUITE("lattice") {
  TEST_CASE("l1 norm") {
    CHECK(l1_norm(Site::origin(3)) == 0);
    CHECK(l1_norm(Site{1, -2, 0}) == 3);
    for (int d = 1; d <= 6; ++d) {
      for (int j = 0; j < d; ++j) CHECK(l1_norm(Site::unit(d, j)) == 1);
    }
    CHECK(l1_distance(Site{1, 2}, Site{-1, 2}) == 2);
  }

  TEST_CASE("neighbours of the origin on a 2d torus") {
    const Geometry g = Geometry::torus(2, 5);
    auto nb = g.neighbors(Site::origin(2));
    std::set<Site> got(nb.begin(), nb.end());
    const std::set<Site> want{{1, 0}, {4, 0}, {0, 1}, {0, 4}};
    CHECK(got == want);
  }

  TEST_CASE("box boundary drops the outside candidate") {
    const Geometry g = Geometry::box(3, 4);
    auto nb = g.neighbors(Site{4, 0, 0});
    CHECK(nb.size() == 5);
    CHECK(std::find(nb.begin(), nb.end(), Site{5, 0, 0}) == nb.end());
  }

  TEST_CASE("smallest torus keeps neighbours distinct") {
    const Geometry g = Geometry::torus(1, 3);
    auto nb = g.neighbors(Site{0});
    std::set<Site> got(nb.begin(), nb.end());
    CHECK(got == std::set<Site>{Site{1}, Site{2}});
  }

  TEST_CASE("invalid geometries and outside sites") {
    CHECK_THROWS_AS(Geometry::torus(2, 2), DomainError);
    CHECK_THROWS_AS(Geometry::box(0, 3), DomainError);
    CHECK_THROWS_AS(Geometry::box(2, -1), DomainError);
    CHECK_THROWS_AS(Geometry::box(2, 3).neighbors(Site{4, 0}), DomainError);
    CHECK_THROWS_AS(Geometry::torus(2, 5).neighbors(Site{5, 0}), DomainError);
    CHECK_THROWS_AS(Geometry::box(2, 3).neighbors(Site{0, 0, 0}), DomainError);
  }

  TEST_CASE("symmetry, degree and unit distance") {
    for (const Geometry& g : {Geometry::torus(2, 3), Geometry::torus(3, 4), Geometry::box(2, 2), Geometry::box(3, 1)}) {
      for (const Site& x : g.all_sites()) {
        auto nb = g.neighbors(x);
        std::set<Site> distinct(nb.begin(), nb.end());
        CHECK(distinct.size() == nb.size());
        bool interior = g.is_torus();
        if (!interior) {
          interior = std::all_of(x.coords().begin(), x.coords().end(),
                                 [&](Coord c) { return c > -g.extent() && c < g.extent(); });
        }
        if (interior) CHECK(nb.size() == static_cast<std::size_t>(g.degree()));
        for (const Site& y : nb) {
          auto back = g.neighbors(y);
          CHECK(std::find(back.begin(), back.end(), x) != back.end());
        }
        for (int dir = 0; dir < g.degree(); ++dir) {
          const Site pre = x.shifted(direction_axis(dir), direction_sign(dir));
          CHECK(l1_distance(pre, x) == 1);
        }
      }
    }
  }

  TEST_CASE("site counts and enumeration") {
    CHECK(Geometry::box(2, 1).site_count() == 9);
    CHECK(Geometry::torus(3, 3).site_count() == 27);
    auto all = Geometry::torus(2, 3).all_sites();
    CHECK(all.size() == 9);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK_THROWS_AS(Geometry::box(200, 50).site_count(), ResourceError);
  }

  TEST_CASE("linear key moves by one axis key per unit step") {
    const Site x{3, -7, 11, 0};
    for (int axis = 0; axis < 4; ++axis) {
      CHECK(linear_key(x.shifted(axis, 1).coords()) == linear_key(x.coords()) + axis_key(axis));
      CHECK(linear_key(x.shifted(axis, -1).coords()) == linear_key(x.coords()) - axis_key(axis));
    }
  }

  TEST_CASE("describe") {
    CHECK(Geometry::box(3, 50).describe() == "box(d=3,L=50)");
    CHECK(Site{1, -2, 0}.str() == "(1,-2,0)");
  }
}
