#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "qnk/grid.hpp"

namespace qnk {

enum class WeightRule { uniform, trapezoid, simpson, boole, control_volume, mixed };

std::string_view to_string(WeightRule rule);
WeightRule parse_weight_rule(std::string_view name);

/// Point weights 1/n.
std::vector<double> uniform_weights_1d(const Axis1D& axis);

/// h/2 at the ends and h inside for endpoint-inclusive axes, 1/n on periodic ones.
std::vector<double> trapezoid_weights_1d(const Axis1D& axis);

/// Composite Simpson or Boole weights. Throws CompatibilityError when n-1 is
/// not a multiple of the panel width.
std::vector<double> newton_cotes_weights_1d(WeightRule rule, const Axis1D& axis);

/// Half-cell control volumes (x_{i+1} - x_{i-1}) / 2, with one-sided halves at the ends.
std::vector<double> control_volume_weights_1d(const Axis1D& axis);

/// Dispatches on rule; `mixed` is not a valid request here.
std::vector<double> weights_1d(WeightRule rule, const Axis1D& axis);

/// The rule quadrature normalization uses on an axis: trapezoid on uniform and
/// periodic axes, control volumes on nonuniform ones.
WeightRule natural_rule(const Axis1D& axis);

/// Per-node weights of a tensor-product grid, total mass |Omega|.
struct WeightField {
  std::vector<double> weights;
  std::vector<std::vector<double>> per_axis;
  std::vector<WeightRule> axis_rules;
  WeightRule rule = WeightRule::uniform;
  GridSpec grid;

  double total() const;
};

/// Outer product of per-axis vectors. `rules` may be empty (recorded as mixed)
/// or hold one rule per axis.
WeightField tensor_product_weights(std::vector<std::vector<double>> per_axis, const GridSpec& grid,
                                   std::span<const WeightRule> rules = {});

/// Same rule on every axis. 1D weight vectors are cached per (rule, axis).
WeightField weight_field(const GridSpec& grid, WeightRule rule);

/// natural_rule on every axis.
WeightField quadrature_weight_field(const GridSpec& grid);

/// Cached 1D weights; safe for concurrent use.
std::shared_ptr<const std::vector<double>> cached_weights_1d(WeightRule rule, const Axis1D& axis);

std::size_t weight_cache_size();
void clear_weight_cache();

}  // namespace qnk
