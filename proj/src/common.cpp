#include "hetlink/common.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hetlink {

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("HETLINK_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) omp_set_num_threads(cap);
  }
#endif
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace hetlink
