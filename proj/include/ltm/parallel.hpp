#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace ltm {

enum class Execution { serial, parallel };

namespace kernels {

// Reference loop: out[i] = fn(i), in index order.
template <typename Fn>
std::vector<double> map_serial(std::size_t n, Fn&& fn) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  return out;
}

// OpenMP loop with the same result as map_serial. Exceptions cannot leave a
// parallel region, so each index records its own and the lowest failing
// index is rethrown after the loop.
template <typename Fn>
std::vector<double> map_parallel(std::size_t n, Fn&& fn) {
  std::vector<double> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out[idx] = fn(idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template <typename Fn>
std::vector<double> map_indices(std::size_t n, Fn&& fn, Execution execution) {
  if (execution == Execution::serial) return map_serial(n, fn);
  return map_parallel(n, fn);
}

}  // namespace kernels
}  // namespace ltm
