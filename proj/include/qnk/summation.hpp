#pragma once

#include <cstddef>
#include <span>

namespace qnk {

/// Pairwise (cascade) summation with a fixed split tree, so the result depends
/// only on the input order.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 32;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Pairwise sum of f(i) for i in [0, n).
template <typename F>
double pairwise_sum_fn(std::size_t begin, std::size_t end, const F& f) {
  constexpr std::size_t kBlock = 32;
  if (end - begin <= kBlock) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += f(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum_fn(begin, mid, f) + pairwise_sum_fn(mid, end, f);
}

}  // namespace qnk
