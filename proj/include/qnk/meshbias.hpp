#pragma once

#include <string>
#include <vector>

#include "qnk/fields.hpp"
#include "qnk/grid.hpp"

namespace qnk {

struct BiasReport {
  std::string mesh;
  double strength = 0.0;
  std::size_t n = 0;
  /// max / min 1D cell width over all axes.
  double nonuniformity_ratio = 1.0;
  double reference_mean = 0.0;
  double uniform_estimate = 0.0;
  double weighted_estimate = 0.0;
  double uniform_bias = 0.0;
  double weighted_bias = 0.0;
  /// uniform_bias / max(weighted_bias, 1e-15); 1 when both biases are 0.
  double reduction_factor = 1.0;
};

/// Point-average vs control-volume (trapezoid on uniform axes) estimates of the exact area mean.
BiasReport bias_report(const FieldSpec& field, const GridSpec& grid);

enum class MeshFamily { boundary_refined, chebyshev };

/// One report per strength on an n^d tensor mesh (dimension from the field,
/// 2 when unconstrained), ordered by nonuniformity ratio.
std::vector<BiasReport> bias_sweep(const FieldSpec& field, MeshFamily family, const std::vector<double>& strengths,
                                   std::size_t n);

/// Tensor mesh of the family on every axis; boundary_refined with strength 0 is the uniform grid.
GridSpec mesh_grid(MeshFamily family, double strength, std::size_t n, std::size_t dim);

}  // namespace qnk
