#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twostage {

using Coord = std::int32_t;

/// A point of Z^d. The dimension is the length of the coordinate vector.
class Site {
 public:
  Site() = default;
  explicit Site(std::vector<Coord> coords) : coords_(std::move(coords)) {}
  Site(std::initializer_list<Coord> coords) : coords_(coords) {}

  static Site origin(int d);
  /// The unit vector along `axis` (0-based, so axis 0 is e_1).
  static Site unit(int d, int axis);

  int dim() const { return static_cast<int>(coords_.size()); }
  Coord operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }
  std::span<const Coord> coords() const { return coords_; }

  /// x + sign * e_{axis+1}, with no wrapping.
  Site shifted(int axis, int sign) const;

  std::string str() const;

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

 private:
  std::vector<Coord> coords_;
};

std::int64_t l1_norm(const Site& x);
std::int64_t l1_distance(const Site& a, const Site& b);

// Hashing. The linear key is sum_j coords[j] * axis_key(j) mod 2^64, so a unit
// step along axis j changes it by exactly +/- axis_key(j). Walks and the sparse
// site tables use this to look up neighbours without rehashing d coordinates.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t axis_key(int axis);
std::uint64_t linear_key(std::span<const Coord> coords);

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    return static_cast<std::size_t>(mix64(linear_key(s.coords())));
  }
};

enum class Domain { box, torus };

/// A finite truncation of Z^d: the box [-L, L]^d with a permanently healthy
/// exterior, or the torus (Z/MZ)^d with coordinates kept in [0, M).
class Geometry {
 public:
  static Geometry box(int d, int radius);
  static Geometry torus(int d, int side);

  int dim() const { return d_; }
  Domain domain() const { return domain_; }
  bool is_torus() const { return domain_ == Domain::torus; }
  /// Box radius L, or torus side M.
  int extent() const { return extent_; }
  int degree() const { return 2 * d_; }

  bool contains(const Site& x) const;
  bool contains(std::span<const Coord> x) const;

  /// Direction index `dir` in [0, 2d): axis dir / 2, sign + for even dir.
  /// Returns nullopt when the step leaves a box. Throws DomainError if x is outside.
  std::optional<Site> neighbor(const Site& x, int dir) const;
  std::vector<Site> neighbors(const Site& x) const;

  /// Number of sites; throws ResourceError if it does not fit in 64 bits.
  std::uint64_t site_count() const;
  /// Every site in lexicographic order (tiny geometries only).
  std::vector<Site> all_sites() const;

  std::string describe() const;

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  Geometry(int d, Domain domain, int extent) : d_(d), domain_(domain), extent_(extent) {}

  int d_ = 1;
  Domain domain_ = Domain::box;
  int extent_ = 1;
};

inline int direction_axis(int dir) { return dir / 2; }
inline int direction_sign(int dir) { return (dir % 2 == 0) ? 1 : -1; }

}  // namespace twostage
