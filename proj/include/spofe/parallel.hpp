#pragma once

namespace spofe {

// Reads SPOFE_THREADS and caps the OpenMP team size. Unset or invalid values
// leave the runtime default alone. Returns the resulting thread cap.
int configure_threads_from_env();

void set_thread_count(int n);
int thread_count();

}  // namespace spofe
