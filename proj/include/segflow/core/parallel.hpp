#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace segflow::parallel {

// Worker count used by parallel_for. 0 selects hardware_concurrency().
void set_threads(std::size_t n);
std::size_t threads();

// Runs body(i) for i in [0, n). Work is handed out by an atomic counter, so
// callers must write results into index-addressed storage. Nested calls run
// sequentially on the calling worker. If several bodies throw, the exception
// from the smallest index is rethrown, independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

} // namespace segflow::parallel
