#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace sigabc {

/// Number of OpenMP threads parallel kernels will use.
inline int thread_count() { return omp_get_max_threads(); }

/// Sets the OpenMP thread count; values < 1 are ignored.
inline void set_thread_count(int n) {
    if (n >= 1) omp_set_num_threads(n);
}

/// Reads SIGABC_NUM_THREADS and applies it.  Returns the effective count.
int apply_thread_env();

/// Runs body(i) for i in [0, n) on the OpenMP team.  Each index is written
/// by exactly one thread, so results land in caller-owned slots and the outcome
/// never depends on scheduling.  The exception from the lowest failing index is
/// rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex guard;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

/// Serial counterpart of parallel_for; the reference path in tests and benches.
template <typename Body>
void serial_for(std::size_t n, Body&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace sigabc
