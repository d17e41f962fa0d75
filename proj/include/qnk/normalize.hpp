#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnk/grid.hpp"
#include "qnk/stats.hpp"

namespace qnk {

enum class NormMethod { none, layernorm, instancenorm, groupnorm, rmsnorm, quadnorm, blendquadnorm };

std::string_view to_string(NormMethod m);
NormMethod parse_norm_method(std::string_view name);

struct NormSpec {
  NormMethod method = NormMethod::none;
  /// Reduction pattern used by quadnorm.
  ReductionPattern quad_mode = ReductionPattern::layer();
  /// Group count for groupnorm.
  std::size_t groups = 8;
  /// Blend weight of the uniform statistics for blendquadnorm.
  double alpha = 0.3;
  double epsilon = 1e-5;
  /// Per-channel affine parameters; empty means gamma = 1, beta = 0.
  std::vector<double> gamma;
  std::vector<double> beta;

  /// Throws when a field parameter is out of range or affine lengths differ from C.
  void validate(std::size_t channels) const;
  std::string describe() const;

  static NormSpec none() { return {}; }
  static NormSpec layernorm() { return with(NormMethod::layernorm); }
  static NormSpec quadnorm(ReductionPattern mode = ReductionPattern::layer()) {
    NormSpec s = with(NormMethod::quadnorm);
    s.quad_mode = mode;
    return s;
  }
  static NormSpec blend(double alpha = 0.3) {
    NormSpec s = with(NormMethod::blendquadnorm);
    s.alpha = alpha;
    return s;
  }
  static NormSpec with(NormMethod m) {
    NormSpec s;
    s.method = m;
    return s;
  }
};

/// y = gamma_c (x - mu) / sqrt(v + eps) + beta_c, broadcasting the slice
/// statistics of `m` over each slice. A slice with v + eps == 0, or with a
/// variance at rounding level relative to the largest entry of its batch
/// element, maps to beta.
FieldTensor normalize(const FieldTensor& x, const Moments& m, const NormSpec& spec);

/// Quadrature-weighted normalization. Weights follow the grid: trapezoid on
/// uniform axes, 1/n on periodic axes, control volumes on nonuniform axes.
FieldTensor quadnorm_forward(const FieldTensor& x, const ReductionPattern& mode, const NormSpec& spec);

/// Layer-pattern blend of uniform and quadrature statistics.
FieldTensor blendquadnorm_forward(const FieldTensor& x, double alpha, const NormSpec& spec);

/// none, layernorm, instancenorm, groupnorm (spec.groups) or rmsnorm, all with uniform point weights.
FieldTensor baseline_forward(const FieldTensor& x, NormMethod method, const NormSpec& spec);

/// Dispatches on spec.method.
FieldTensor apply_norm(const FieldTensor& x, const NormSpec& spec);

/// y = x + alpha0 sqrt(E|x|^2 / (E|fx|^2 + eps)) fx per batch element.
///
/// Expectations are plain means over all entries of the batch element, or
/// weighted spatial means when `weights` is given.
FieldTensor residual_gain(const FieldTensor& x, const FieldTensor& fx, double alpha0, double epsilon,
                          std::span<const double> weights = {});

}  // namespace qnk
