#pragma once

#include <exception>
#include <mutex>

namespace safecct {

enum class Exec { serial, parallel };

/// Runs body(k) for k in [0, n).  The first exception thrown by any iteration is rethrown afterwards.
template <class Body>
void for_each_index(long n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (long k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < n; ++k) {
    try {
      body(k);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace safecct
