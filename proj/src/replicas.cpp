#include "twostage/replicas.hpp"

#include <cstdlib>
#include <string>

namespace twostage {

unsigned default_threads() {
  if (const char* env = std::getenv("TWOSTAGE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace twostage
