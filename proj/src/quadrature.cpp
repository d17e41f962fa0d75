#include "qnk/quadrature.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "qnk/error.hpp"
#include "qnk/summation.hpp"

namespace qnk {

std::string_view to_string(WeightRule rule) {
  switch (rule) {
    case WeightRule::uniform:
      return "uniform";
    case WeightRule::trapezoid:
      return "trapezoid";
    case WeightRule::simpson:
      return "simpson";
    case WeightRule::boole:
      return "boole";
    case WeightRule::control_volume:
      return "control_volume";
    case WeightRule::mixed:
      return "mixed";
  }
  return "unknown";
}

WeightRule parse_weight_rule(std::string_view name) {
  for (auto r : {WeightRule::uniform, WeightRule::trapezoid, WeightRule::simpson, WeightRule::boole,
                 WeightRule::control_volume}) {
    if (to_string(r) == name) return r;
  }
  throw DomainError("unknown weight rule '" + std::string(name) + "'");
}

std::vector<double> uniform_weights_1d(const Axis1D& axis) {
  const std::size_t n = axis.size();
  if (n < 1) throw InvalidGridError("empty axis");
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> trapezoid_weights_1d(const Axis1D& axis) {
  const std::size_t n = axis.size();
  if (axis.kind == AxisKind::periodic) return uniform_weights_1d(axis);
  if (axis.kind == AxisKind::nonuniform) {
    throw InvalidGridError("trapezoid weights need a uniform axis; use control_volume_weights_1d for nonuniform axes");
  }
  if (n < 2) throw InvalidGridError("trapezoid weights need n >= 2");
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> w(n, h);
  w.front() = h / 2.0;
  w.back() = h / 2.0;
  return w;
}

std::vector<double> newton_cotes_weights_1d(WeightRule rule, const Axis1D& axis) {
  if (axis.kind != AxisKind::uniform_endpoint) {
    throw InvalidGridError(std::string(to_string(rule)) + " weights need an endpoint-inclusive uniform axis");
  }
  const std::size_t n = axis.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> w(n, 0.0);
  if (rule == WeightRule::simpson) {
    if (n < 3 || (n - 1) % 2 != 0) {
      throw CompatibilityError("simpson needs n-1 divisible by 2, got n=" + std::to_string(n));
    }
    for (std::size_t p = 0; p + 2 < n; p += 2) {
      w[p] += h / 3.0;
      w[p + 1] += 4.0 * h / 3.0;
      w[p + 2] += h / 3.0;
    }
  } else if (rule == WeightRule::boole) {
    if (n < 5 || (n - 1) % 4 != 0) {
      throw CompatibilityError("boole needs n-1 divisible by 4, got n=" + std::to_string(n));
    }
    const double s = 2.0 * h / 45.0;
    for (std::size_t p = 0; p + 4 < n; p += 4) {
      w[p] += 7.0 * s;
      w[p + 1] += 32.0 * s;
      w[p + 2] += 12.0 * s;
      w[p + 3] += 32.0 * s;
      w[p + 4] += 7.0 * s;
    }
  } else {
    throw DomainError("newton_cotes_weights_1d accepts simpson or boole");
  }
  return w;
}

std::vector<double> control_volume_weights_1d(const Axis1D& axis) {
  const auto& x = axis.coords;
  const std::size_t n = x.size();
  if (axis.kind == AxisKind::periodic) return uniform_weights_1d(axis);
  if (n < 2) throw InvalidGridError("control volumes need n >= 2");
  std::vector<double> w(n);
  w.front() = (x[1] - x[0]) / 2.0;
  w.back() = (x[n - 1] - x[n - 2]) / 2.0;
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = (x[i + 1] - x[i - 1]) / 2.0;
  return w;
}

std::vector<double> weights_1d(WeightRule rule, const Axis1D& axis) {
  switch (rule) {
    case WeightRule::uniform:
      return uniform_weights_1d(axis);
    case WeightRule::trapezoid:
      return trapezoid_weights_1d(axis);
    case WeightRule::simpson:
    case WeightRule::boole:
      return newton_cotes_weights_1d(rule, axis);
    case WeightRule::control_volume:
      return control_volume_weights_1d(axis);
    case WeightRule::mixed:
      break;
  }
  throw DomainError("cannot build 1D weights for a mixed rule");
}

WeightRule natural_rule(const Axis1D& axis) {
  return axis.kind == AxisKind::nonuniform ? WeightRule::control_volume : WeightRule::trapezoid;
}

double WeightField::total() const { return pairwise_sum(weights); }

WeightField tensor_product_weights(std::vector<std::vector<double>> per_axis, const GridSpec& grid,
                                   std::span<const WeightRule> rules) {
  if (per_axis.size() != grid.dim()) {
    throw ShapeError("got " + std::to_string(per_axis.size()) + " weight vectors for a " +
                     std::to_string(grid.dim()) + "D grid");
  }
  if (!rules.empty() && rules.size() != grid.dim()) throw ShapeError("need one rule per axis");
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    if (per_axis[k].size() != grid.axis(k).size()) {
      throw ShapeError("weight vector " + std::to_string(k) + " has length " + std::to_string(per_axis[k].size()) +
                       ", axis has " + std::to_string(grid.axis(k).size()) + " nodes");
    }
  }

  WeightField wf;
  wf.grid = grid;
  wf.axis_rules.assign(rules.begin(), rules.end());
  if (rules.empty()) {
    wf.rule = WeightRule::mixed;
  } else {
    wf.rule = rules[0];
    for (auto r : rules) {
      if (r != rules[0]) wf.rule = WeightRule::mixed;
    }
  }

  std::vector<double> acc{1.0};
  for (const auto& v : per_axis) {
    std::vector<double> next;
    next.reserve(acc.size() * v.size());
    for (double a : acc) {
      for (double b : v) next.push_back(a * b);
    }
    acc = std::move(next);
  }
  wf.weights = std::move(acc);
  wf.per_axis = std::move(per_axis);
  return wf;
}

namespace {

using CacheKey = std::tuple<WeightRule, AxisKind, std::vector<double>>;

struct WeightCache {
  std::shared_mutex mutex;
  std::map<CacheKey, std::shared_ptr<const std::vector<double>>> entries;
};

WeightCache& cache() {
  static WeightCache c;
  return c;
}

}  // namespace

std::shared_ptr<const std::vector<double>> cached_weights_1d(WeightRule rule, const Axis1D& axis) {
  CacheKey key{rule, axis.kind, axis.coords};
  auto& c = cache();
  {
    std::shared_lock lock(c.mutex);
    if (auto it = c.entries.find(key); it != c.entries.end()) return it->second;
  }
  auto w = std::make_shared<const std::vector<double>>(weights_1d(rule, axis));
  std::unique_lock lock(c.mutex);
  auto [it, inserted] = c.entries.emplace(std::move(key), std::move(w));
  return it->second;
}

std::size_t weight_cache_size() {
  std::shared_lock lock(cache().mutex);
  return cache().entries.size();
}

void clear_weight_cache() {
  std::unique_lock lock(cache().mutex);
  cache().entries.clear();
}

WeightField weight_field(const GridSpec& grid, WeightRule rule) {
  std::vector<std::vector<double>> per_axis;
  std::vector<WeightRule> rules(grid.dim(), rule);
  for (const auto& a : grid.axes()) per_axis.push_back(*cached_weights_1d(rule, a));
  return tensor_product_weights(std::move(per_axis), grid, rules);
}

WeightField quadrature_weight_field(const GridSpec& grid) {
  std::vector<std::vector<double>> per_axis;
  std::vector<WeightRule> rules;
  for (const auto& a : grid.axes()) {
    rules.push_back(natural_rule(a));
    per_axis.push_back(*cached_weights_1d(rules.back(), a));
  }
  return tensor_product_weights(std::move(per_axis), grid, rules);
}

}  // namespace qnk
