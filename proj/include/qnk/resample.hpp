#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "qnk/grid.hpp"

namespace qnk {

enum class InterpMethod { bilinear, bicubic };

std::string_view to_string(InterpMethod m);
InterpMethod parse_interp_method(std::string_view name);

/// Sparse rows of a 1D interpolation operator: row j lists (source index, weight).
struct InterpMatrix1D {
  std::size_t source_size = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  std::vector<double> apply(const std::vector<double>& v) const;
};

/// 1D operator from `source` to `target` nodes. Both axes must be
/// endpoint-inclusive uniform or both periodic.
///
/// Bicubic is Keys cubic convolution (a = -1/2). Off-grid taps at the ends use
/// the cubic-exact extrapolation p[-1] = 3p[0] - 3p[1] + p[2] (linear for
/// two-node axes); periodic axes wrap.
InterpMatrix1D interpolation_matrix_1d(const Axis1D& source, const Axis1D& target, InterpMethod method);

/// Separable per-axis resampling of every (batch, channel) slice onto `target`.
FieldTensor interpolate(const FieldTensor& x, const GridSpec& target, InterpMethod method);

}  // namespace qnk
