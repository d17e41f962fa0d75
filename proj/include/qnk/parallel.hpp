#pragma once

#include <cstddef>
#include <functional>

namespace qnk {

/// Number of worker threads used by parallel loops.
///
/// Defaults to the value of the QNK_THREADS environment variable (or 1 when
/// unset). Results never depend on this value: every parallel loop writes to
/// per-index slots and reductions happen afterwards in index order.
std::size_t thread_count();

/// Overrides the thread count for the current process; 0 restores the
/// environment default.
void set_thread_count(std::size_t n);

/// Calls body(i) for i in [0, n), distributing indices over thread_count()
/// workers. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// RAII override of the thread count.
class ScopedThreadCount {
 public:
  explicit ScopedThreadCount(std::size_t n);
  ~ScopedThreadCount();
  ScopedThreadCount(const ScopedThreadCount&) = delete;
  ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

 private:
  std::size_t previous_;
};

}  // namespace qnk
