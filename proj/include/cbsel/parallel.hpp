#pragma once

#include <cstddef>
#include <exception>

namespace cbsel {

// Every data-parallel kernel has a serial reference path. Both paths
// write into index-addressed slots and reduce in index order, so they
// produce bit-identical results.
enum class Execution { Serial, Parallel };

template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  // Exceptions may not cross the parallel region; the first one is rethrown.
  std::exception_ptr failure;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cbsel_for_each_index)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cbsel
