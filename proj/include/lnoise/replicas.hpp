#pragma once

#include <cstddef>
#include <type_traits>
#include <vector>

namespace lnoise {

/**
 * Evaluates f(0), ..., f(count-1) and returns the results in index order.
 *
 * Replicas must be independent (own seeds, no shared mutable state), so the
 * parallel and serial paths return identical vectors.
 */
template <class F>
auto map_replicas(std::size_t count, bool parallel, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out(count);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
  } else {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
  }
  return out;
}

}  // namespace lnoise
