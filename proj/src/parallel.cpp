#include "qnk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qnk {
namespace {

std::atomic<std::size_t> g_override{0};
thread_local bool t_in_worker = false;

std::size_t env_threads() {
  const char* raw = std::getenv("QNK_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    const long v = std::stol(raw);
    return v < 1 ? 1 : static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace

std::size_t thread_count() {
  const std::size_t o = g_override.load();
  return o != 0 ? o : env_threads();
}

void set_thread_count(std::size_t n) { g_override.store(n); }

ScopedThreadCount::ScopedThreadCount(std::size_t n) : previous_(g_override.load()) {
  set_thread_count(n);
}

ScopedThreadCount::~ScopedThreadCount() { set_thread_count(previous_); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = t_in_worker ? 1 : std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    const bool was_worker = t_in_worker;
    t_in_worker = true;
    struct Restore {
      bool v;
      ~Restore() { t_in_worker = v; }
    } restore{was_worker};
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qnk
