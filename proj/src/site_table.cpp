#include "site_table.hpp"

#include <algorithm>

#include "twostage/errors.hpp"

namespace twostage::detail {

SiteTable::SiteTable(const Geometry& g)
    : geometry_(g), d_(static_cast<std::size_t>(g.dim())), scratch_(static_cast<std::size_t>(g.dim())) {
  rehash(64);
}

std::int32_t SiteTable::lookup(std::span<const Coord> c, std::uint64_t key) const {
  for (std::size_t b = mix64(key) & mask_;; b = (b + 1) & mask_) {
    const std::int32_t slot = slots_[b];
    if (slot == 0) return -1;
    const std::int32_t id = slot - 1;
    if (keys_[static_cast<std::size_t>(id)] == key && std::ranges::equal(coords(id), c)) return id;
  }
}

std::int32_t SiteTable::insert(std::span<const Coord> c, std::uint64_t key) {
  if ((keys_.size() + 1) * 2 > slots_.size()) rehash(slots_.size() * 2);
  const auto id = static_cast<std::int32_t>(keys_.size());
  coords_.insert(coords_.end(), c.begin(), c.end());
  keys_.push_back(key);
  nbr_.resize(nbr_.size() + 2 * d_, kUnknown);
  std::size_t b = mix64(key) & mask_;
  while (slots_[b] != 0) b = (b + 1) & mask_;
  slots_[b] = id + 1;
  return id;
}

void SiteTable::rehash(std::size_t capacity) {
  slots_.assign(capacity, 0);
  mask_ = capacity - 1;
  for (std::size_t id = 0; id < keys_.size(); ++id) {
    std::size_t b = mix64(keys_[id]) & mask_;
    while (slots_[b] != 0) b = (b + 1) & mask_;
    slots_[b] = static_cast<std::int32_t>(id) + 1;
  }
}

std::int32_t SiteTable::find(std::span<const Coord> c) const { return lookup(c, linear_key(c)); }

std::int32_t SiteTable::intern(std::span<const Coord> c) {
  if (!geometry_.contains(c)) throw DomainError("site outside " + geometry_.describe());
  const std::uint64_t key = linear_key(c);
  const std::int32_t id = lookup(c, key);
  return id >= 0 ? id : insert(c, key);
}

std::int32_t SiteTable::neighbor(std::int32_t id, int dir) {
  const std::size_t slot = static_cast<std::size_t>(id) * 2 * d_ + static_cast<std::size_t>(dir);
  if (nbr_[slot] != kUnknown) return nbr_[slot];

  const int axis = direction_axis(dir);
  auto c = coords(id);
  std::copy(c.begin(), c.end(), scratch_.begin());
  Coord& x = scratch_[static_cast<std::size_t>(axis)];
  const Coord old = x;
  x += direction_sign(dir);
  std::int32_t result = -1;
  const int extent = geometry_.extent();
  bool inside = true;
  if (geometry_.is_torus()) {
    x = (x % extent + extent) % extent;
  } else if (x < -extent || x > extent) {
    inside = false;
  }
  if (inside) {
    const std::uint64_t key =
        keys_[static_cast<std::size_t>(id)] +
        static_cast<std::uint64_t>(static_cast<std::int64_t>(x) - old) * axis_key(axis);
    result = lookup(scratch_, key);
    if (result < 0) {
      const std::vector<Coord> copy = scratch_;
      result = insert(copy, key);
    }
  }
  nbr_[slot] = result;
  // the relation is symmetric, so fill the reverse link as well
  if (result >= 0) {
    const int back = dir ^ 1;
    nbr_[static_cast<std::size_t>(result) * 2 * d_ + static_cast<std::size_t>(back)] = id;
  }
  return result;
}

}  // namespace twostage::detail
