#include "spofe/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace spofe {

int configure_threads_from_env() {
  if (const char* env = std::getenv("SPOFE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
    }
  }
  return thread_count();
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace spofe
