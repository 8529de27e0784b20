#include "twostage/lattice.hpp"

#include <cstdlib>
#include <limits>

#include "twostage/errors.hpp"

namespace twostage {

Site Site::origin(int d) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  return Site(std::vector<Coord>(static_cast<std::size_t>(d), 0));
}

Site Site::unit(int d, int axis) {
  Site e = origin(d);
  if (axis < 0 || axis >= d) throw DomainError("axis out of range");
  e[axis] = 1;
  return e;
}

Site Site::shifted(int axis, int sign) const {
  Site y = *this;
  y[axis] += sign;
  return y;
}

std::string Site::str() const {
  std::string out = "(";
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(coords_[i]);
  }
  return out + ")";
}

std::int64_t l1_norm(const Site& x) {
  std::int64_t s = 0;
  for (Coord c : x.coords()) s += std::llabs(c);
  return s;
}

std::int64_t l1_distance(const Site& a, const Site& b) {
  if (a.dim() != b.dim()) throw DomainError("dimension mismatch");
  std::int64_t s = 0;
  for (int i = 0; i < a.dim(); ++i) s += std::llabs(static_cast<std::int64_t>(a[i]) - b[i]);
  return s;
}

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finaliser
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t axis_key(int axis) {
  return mix64(0x5eed0000ULL + static_cast<std::uint64_t>(axis)) | 1ULL;
}

std::uint64_t linear_key(std::span<const Coord> coords) {
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    k += static_cast<std::uint64_t>(static_cast<std::int64_t>(coords[j])) * axis_key(static_cast<int>(j));
  }
  return k;
}

Geometry Geometry::box(int d, int radius) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (radius < 0) throw DomainError("box radius must be >= 0");
  return Geometry(d, Domain::box, radius);
}

Geometry Geometry::torus(int d, int side) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (side < 3) throw DomainError("torus side must be >= 3");
  return Geometry(d, Domain::torus, side);
}

bool Geometry::contains(std::span<const Coord> x) const {
  if (static_cast<int>(x.size()) != d_) return false;
  for (Coord c : x) {
    if (domain_ == Domain::box) {
      if (c < -extent_ || c > extent_) return false;
    } else if (c < 0 || c >= extent_) {
      return false;
    }
  }
  return true;
}

bool Geometry::contains(const Site& x) const { return contains(x.coords()); }

std::optional<Site> Geometry::neighbor(const Site& x, int dir) const {
  if (!contains(x)) throw DomainError("site " + x.str() + " outside " + describe());
  if (dir < 0 || dir >= degree()) throw DomainError("direction out of range");
  const int axis = direction_axis(dir);
  Site y = x.shifted(axis, direction_sign(dir));
  if (domain_ == Domain::torus) {
    y[axis] = (y[axis] % extent_ + extent_) % extent_;
    return y;
  }
  if (y[axis] < -extent_ || y[axis] > extent_) return std::nullopt;
  return y;
}

std::vector<Site> Geometry::neighbors(const Site& x) const {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(degree()));
  for (int dir = 0; dir < degree(); ++dir) {
    if (auto y = neighbor(x, dir)) out.push_back(std::move(*y));
  }
  return out;
}

std::uint64_t Geometry::site_count() const {
  const std::uint64_t width =
      domain_ == Domain::box ? 2 * static_cast<std::uint64_t>(extent_) + 1 : static_cast<std::uint64_t>(extent_);
  std::uint64_t n = 1;
  for (int i = 0; i < d_; ++i) {
    if (n > std::numeric_limits<std::uint64_t>::max() / width) throw ResourceError("site count overflows");
    n *= width;
  }
  return n;
}

std::vector<Site> Geometry::all_sites() const {
  const std::uint64_t n = site_count();
  if (n > (1ULL << 26)) throw ResourceError("geometry too large to enumerate");
  const Coord lo = domain_ == Domain::box ? -extent_ : 0;
  const Coord hi = domain_ == Domain::box ? extent_ : extent_ - 1;
  std::vector<Site> out;
  out.reserve(n);
  Site x(std::vector<Coord>(static_cast<std::size_t>(d_), lo));
  for (std::uint64_t k = 0; k < n; ++k) {
    out.push_back(x);
    // odometer with the last coordinate fastest, so output is lexicographic
    for (int i = d_ - 1; i >= 0; --i) {
      if (x[i] < hi) {
        ++x[i];
        break;
      }
      x[i] = lo;
    }
  }
  return out;
}

std::string Geometry::describe() const {
  if (domain_ == Domain::box) {
    return "box(d=" + std::to_string(d_) + ",L=" + std::to_string(extent_) + ")";
  }
  return "torus(d=" + std::to_string(d_) + ",M=" + std::to_string(extent_) + ")";
}

}  // namespace twostage
