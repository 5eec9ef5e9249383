#include "fttm/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace fttm::parallel {

void configure_from_env() {
  const char* env = std::getenv("FTTM_THREADS");
  if (env == nullptr) return;
  try {
    const int n = std::stoi(env);
    if (n > 0) set_max_threads(std::min(n, max_threads()));
  } catch (const std::exception&) {
    // unparsable value: keep the runtime default
  }
}

int max_threads() { return omp_get_max_threads(); }
void set_max_threads(int n) { omp_set_num_threads(n); }

}  // namespace fttm::parallel
