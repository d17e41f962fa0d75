#include "qnk/meshbias.hpp"

#include <algorithm>
#include <cmath>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/stats.hpp"

namespace qnk {

namespace {

constexpr double kBiasFloor = 1e-15;

std::string mesh_name(const GridSpec& g) {
  if (g.all_of_kind(AxisKind::uniform_endpoint)) return "uniform";
  if (g.all_of_kind(AxisKind::periodic)) return "periodic";
  return "nonuniform";
}

}  // namespace

BiasReport bias_report(const FieldSpec& field, const GridSpec& grid) {
  BiasReport r;
  r.mesh = mesh_name(grid);
  r.n = grid.axis(0).size();
  r.nonuniformity_ratio = nonuniformity_ratio(grid);
  r.reference_mean = exact_mean(field, grid.dim());
  const FieldTensor x = sample_field(field, grid, 1);
  const auto layer = ReductionPattern::layer();
  r.uniform_estimate = uniform_moments(x, layer).mean[0];
  r.weighted_estimate = weighted_moments(x, quadrature_weight_field(grid), layer).mean[0];
  r.uniform_bias = std::fabs(r.uniform_estimate - r.reference_mean);
  r.weighted_bias = std::fabs(r.weighted_estimate - r.reference_mean);
  if (r.uniform_bias == 0.0 && r.weighted_bias == 0.0) {
    r.reduction_factor = 1.0;
  } else {
    r.reduction_factor = r.uniform_bias / std::max(r.weighted_bias, kBiasFloor);
  }
  return r;
}

GridSpec mesh_grid(MeshFamily family, double strength, std::size_t n, std::size_t dim) {
  if (family == MeshFamily::boundary_refined && strength == 0.0) {
    std::vector<std::size_t> ns(dim, n);
    return uniform_grid(ns);
  }
  if (family == MeshFamily::chebyshev) return nonuniform_grid(Chebyshev{}, n, dim);
  return nonuniform_grid(BoundaryRefined{strength}, n, dim);
}

std::vector<BiasReport> bias_sweep(const FieldSpec& field, MeshFamily family, const std::vector<double>& strengths,
                                   std::size_t n) {
  const std::size_t dim = required_dim(field.id).value_or(2);
  std::vector<BiasReport> out(strengths.size());
  parallel_for(strengths.size(), [&](std::size_t i) {
    out[i] = bias_report(field, mesh_grid(family, strengths[i], n, dim));
    out[i].strength = strengths[i];
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const BiasReport& a, const BiasReport& b) { return a.nonuniformity_ratio < b.nonuniformity_ratio; });
  return out;
}

}  // namespace qnk
