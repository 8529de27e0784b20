#include "twostage/rng.hpp"

#include <cmath>

#include "twostage/lattice.hpp"

namespace twostage {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x74776f73U};
  engine_.seed(seq);
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(to_open_unit(engine_())) / rate;
}

Rng Rng::split(std::uint64_t stream) { return Rng(engine_(), stream); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
  return mix64(mix64(master) ^ (label * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

}  // namespace twostage
