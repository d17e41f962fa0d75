#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnk/fields.hpp"
#include "qnk/normalize.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/resample.hpp"
#include "qnk/stats.hpp"

namespace qnk {

/// sqrt(sum_i w_i |z(r_i)|^2), the channel 2-norm inside and batch entries pooled.
double comparison_norm(const FieldTensor& z, const WeightField& w);

enum class Statistic { mean, variance };

struct StatisticMismatch {
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of `x` under `rule` (uniform point weights for WeightRule::uniform).
Moments rule_moments(const FieldTensor& x, WeightRule rule, const ReductionPattern& pattern);

/// Max over reduced slices of |stat_h - stat_h'| for exact samples of `field` on both grids.
StatisticMismatch statistic_mismatch(const FieldSpec& field, const GridSpec& h_grid, const GridSpec& hp_grid,
                                     WeightRule rule, const ReductionPattern& pattern, std::size_t channels = 1);

/// |mean_h - exact mean| for channel 0 under the layer pattern of a single-channel sample.
double statistic_bias(const FieldSpec& field, const GridSpec& grid, WeightRule rule);

/// Least-squares slope of log(value) against log(h). Rungs with value <= 0
/// (or non-finite) are dropped; fewer than three remaining is a DomainError.
double order_estimate(std::span<const std::pair<double, double>> ladder);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = uniform mean - trapezoid mean; rhs = (m-2)/(m(m-1)) ((f0 + f_{m-1})/2 - interior mean).
IdentityCheck first_order_identity(std::span<const double> samples);

struct EndpointPerturbation {
  /// trapezoid mean - uniform mean, computed from the two weighted sums.
  double exact = 0.0;
  /// (m-2)/(m(m-1)) (interior mean - boundary average).
  double closed_form = 0.0;
  /// h (interior mean - boundary average), h = 1/(m-1).
  double leading = 0.0;
};

EndpointPerturbation endpoint_perturbation(std::span<const double> samples);

/// Max abs difference between trapezoid-weighted and uniform means and
/// variances on a periodic grid.
double periodic_collapse_check(const FieldTensor& x, const ReductionPattern& pattern);

/// Lower bound on the statistics' variance for output comparisons.
inline constexpr double kVarianceFloor = 1e-6;

/// |N_h(x_h) - P_{h'->h} N_{h'}(x_{h'})| in the comparison norm of the h grid
/// (weights: quadrature_weight_field of h_grid).
double output_mismatch(const FieldSpec& field, const NormSpec& spec, const GridSpec& h_grid, const GridSpec& hp_grid,
                       InterpMethod method, std::size_t channels = 1);

struct Rung {
  std::size_t n = 0;
  double h = 0.0;
  std::size_t n_prime = 0;
  double h_prime = 0.0;
  double mismatch = 0.0;
};

struct ConsistencyReport {
  std::string field;
  std::string quantity;
  std::string rule;
  std::string pattern;
  std::vector<Rung> rungs;
  double fitted_order = 0.0;
};

/// Consecutive ladder entries form the (h, h') pairs, so k grid sizes give k-1 rungs.
ConsistencyReport statistic_ladder(const FieldSpec& field, std::span<const std::size_t> ns, std::size_t dim,
                                   WeightRule rule, const ReductionPattern& pattern, Statistic stat,
                                   std::size_t channels = 1);

/// Each n is paired with its halved-spacing partner 2n-1.
ConsistencyReport output_ladder(const FieldSpec& field, const NormSpec& spec, std::span<const std::size_t> ns,
                                std::size_t dim, InterpMethod method, std::size_t channels = 1);

/// Endpoint-inclusive uniform grid with n nodes on each of `dim` axes.
GridSpec cube_grid(std::size_t n, std::size_t dim);

}  // namespace qnk
