#include "ifl/parallel.hpp"

#include <cstdlib>

namespace ifl {

unsigned default_threads() {
  if (const char* env = std::getenv("IFL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ifl
