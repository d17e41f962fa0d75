#pragma once

#include <span>
#include <string>
#include <vector>

#include "qnk/grid.hpp"
#include "qnk/quadrature.hpp"

namespace qnk {

struct ReductionPattern {
  enum class Kind { instance, layer, group };
  Kind kind = Kind::layer;
  std::size_t groups = 1;

  static ReductionPattern instance() { return {Kind::instance, 1}; }
  static ReductionPattern layer() { return {Kind::layer, 1}; }
  static ReductionPattern group(std::size_t g) { return {Kind::group, g}; }

  /// Reduced slices per batch element for C channels.
  std::size_t slices(std::size_t channels) const;
  /// Channels pooled into each slice.
  std::size_t channels_per_slice(std::size_t channels) const;
  /// Throws ShapeError when C is incompatible with the pattern.
  void validate(std::size_t channels) const;
  std::string name() const;

  friend bool operator==(const ReductionPattern&, const ReductionPattern&) = default;
};

/// Parses "instance", "layer" or "group:G".
ReductionPattern parse_pattern(const std::string& text);

/// Per-slice mean and population variance, stored (batch, slices) row-major.
struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
  ReductionPattern pattern;
  std::size_t batch = 0;
  std::size_t slices = 0;
  bool weighted = false;

  double mean_at(std::size_t b, std::size_t s) const { return mean[b * slices + s]; }
  double var_at(std::size_t b, std::size_t s) const { return variance[b * slices + s]; }
};

Moments uniform_moments(const FieldTensor& x, const ReductionPattern& pattern);

/// mu = sum w x / (m sum w) and v = sum w (x - mu)^2 / (m sum w), where m is
/// the number of channels pooled per slice.
Moments weighted_moments(const FieldTensor& x, const WeightField& w, const ReductionPattern& pattern);

/// Raw node weights (spatial shape) instead of a WeightField.
Moments weighted_moments(const FieldTensor& x, std::span<const double> w, const ReductionPattern& pattern);

/// Law-of-total-variance blend of two moment sets computed from the same x.
Moments blend_moments(const Moments& m_ln, const Moments& m_wln, double alpha);

}  // namespace qnk
