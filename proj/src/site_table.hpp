#pragma once

// Interning of lattice sites into dense ids, with a lazily filled neighbour
// cache. Used by the event-driven simulators; not part of the public API.

#include <cstdint>
#include <span>
#include <vector>

#include "twostage/lattice.hpp"

namespace twostage::detail {

class SiteTable {
 public:
  explicit SiteTable(const Geometry& g);

  /// Id of the site, inserting it if needed. The site must lie in the geometry.
  std::int32_t intern(std::span<const Coord> c);
  /// Id of the site or -1.
  std::int32_t find(std::span<const Coord> c) const;
  /// Id of the neighbour in direction dir, or -1 if it is outside a box.
  std::int32_t neighbor(std::int32_t id, int dir);

  std::span<const Coord> coords(std::int32_t id) const {
    return {coords_.data() + static_cast<std::size_t>(id) * d_, static_cast<std::size_t>(d_)};
  }
  Site site(std::int32_t id) const {
    auto c = coords(id);
    return Site(std::vector<Coord>(c.begin(), c.end()));
  }
  std::size_t size() const { return keys_.size(); }
  const Geometry& geometry() const { return geometry_; }

 private:
  static constexpr std::int32_t kUnknown = -2;

  std::int32_t lookup(std::span<const Coord> c, std::uint64_t key) const;
  std::int32_t insert(std::span<const Coord> c, std::uint64_t key);
  void rehash(std::size_t capacity);

  Geometry geometry_;
  std::size_t d_;
  std::vector<Coord> coords_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::int32_t> nbr_;
  std::vector<std::int32_t> slots_;  // id + 1, 0 = empty
  std::size_t mask_ = 0;
  std::vector<Coord> scratch_;
};

/// Set of ids with O(1) insert, erase, and uniform selection.
class IndexedSet {
 public:
  void ensure(std::size_t n) {
    if (pos_.size() < n) pos_.resize(n, -1);
  }
  bool contains(std::int32_t id) const {
    return static_cast<std::size_t>(id) < pos_.size() && pos_[static_cast<std::size_t>(id)] >= 0;
  }
  void insert(std::int32_t id) {
    ensure(static_cast<std::size_t>(id) + 1);
    if (pos_[static_cast<std::size_t>(id)] >= 0) return;
    pos_[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(items_.size());
    items_.push_back(id);
  }
  void erase(std::int32_t id) {
    if (!contains(id)) return;
    const auto p = static_cast<std::size_t>(pos_[static_cast<std::size_t>(id)]);
    const std::int32_t last = items_.back();
    items_[p] = last;
    pos_[static_cast<std::size_t>(last)] = static_cast<std::int32_t>(p);
    items_.pop_back();
    pos_[static_cast<std::size_t>(id)] = -1;
  }
  std::size_t size() const { return items_.size(); }
  std::int32_t at(std::size_t i) const { return items_[i]; }

 private:
  std::vector<std::int32_t> items_;
  std::vector<std::int32_t> pos_;
};

}  // namespace twostage::detail
