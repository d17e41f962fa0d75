#include "qnk/consistency.hpp"

#include <algorithm>
#include <cmath>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/summation.hpp"

namespace qnk {

double comparison_norm(const FieldTensor& z, const WeightField& w) {
  if (w.weights.size() != z.spatial_size() || w.grid.shape() != z.grid().shape()) {
    throw ShapeError("comparison weights do not match the field");
  }
  const std::size_t n = z.spatial_size();
  std::vector<double> per;
  for (std::size_t b = 0; b < z.batch(); ++b) {
    for (std::size_t c = 0; c < z.channels(); ++c) {
      auto s = z.slice(b, c);
      per.push_back(pairwise_sum_fn(0, n, [&](std::size_t i) { return w.weights[i] * s[i] * s[i]; }));
    }
  }
  return std::sqrt(pairwise_sum(per));
}

Moments rule_moments(const FieldTensor& x, WeightRule rule, const ReductionPattern& pattern) {
  if (rule == WeightRule::uniform) return uniform_moments(x, pattern);
  return weighted_moments(x, weight_field(x.grid(), rule), pattern);
}

StatisticMismatch statistic_mismatch(const FieldSpec& field, const GridSpec& h_grid, const GridSpec& hp_grid,
                                     WeightRule rule, const ReductionPattern& pattern, std::size_t channels) {
  const Moments a = rule_moments(sample_field(field, h_grid, channels), rule, pattern);
  const Moments b = rule_moments(sample_field(field, hp_grid, channels), rule, pattern);
  StatisticMismatch out;
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    out.mean = std::max(out.mean, std::fabs(a.mean[i] - b.mean[i]));
    out.variance = std::max(out.variance, std::fabs(a.variance[i] - b.variance[i]));
  }
  return out;
}

double statistic_bias(const FieldSpec& field, const GridSpec& grid, WeightRule rule) {
  const Moments m = rule_moments(sample_field(field, grid, 1), rule, ReductionPattern::layer());
  return std::fabs(m.mean[0] - exact_mean(field, grid.dim()));
}

double order_estimate(std::span<const std::pair<double, double>> ladder) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [h, v] : ladder) {
    if (!(h > 0.0) || !(v > 0.0) || !std::isfinite(v) || !std::isfinite(h)) continue;
    lx.push_back(std::log(h));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 3) {
    throw DomainError("order estimate needs at least 3 rungs with positive values, got " + std::to_string(lx.size()));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("order estimate needs distinct spacings");
  return sxy / sxx;
}

namespace {

struct EndpointParts {
  double uniform_mean;
  double trapezoid_mean;
  double boundary_avg;
  double interior_mean;
  double coef;
};

EndpointParts endpoint_parts(std::span<const double> f) {
  const std::size_t m = f.size();
  if (m < 3) throw DomainError("need at least 3 samples, got " + std::to_string(m));
  const double md = static_cast<double>(m);
  EndpointParts p{};
  p.uniform_mean = pairwise_sum(f) / md;
  const double h = 1.0 / (md - 1.0);
  p.trapezoid_mean = pairwise_sum_fn(0, m, [&](std::size_t i) { return (i == 0 || i == m - 1 ? h / 2.0 : h) * f[i]; });
  p.boundary_avg = (f[0] + f[m - 1]) / 2.0;
  p.interior_mean = pairwise_sum(f.subspan(1, m - 2)) / (md - 2.0);
  p.coef = (md - 2.0) / (md * (md - 1.0));
  return p;
}

}  // namespace

IdentityCheck first_order_identity(std::span<const double> samples) {
  const auto p = endpoint_parts(samples);
  return {p.uniform_mean - p.trapezoid_mean, p.coef * (p.boundary_avg - p.interior_mean)};
}

EndpointPerturbation endpoint_perturbation(std::span<const double> samples) {
  const auto p = endpoint_parts(samples);
  const double h = 1.0 / static_cast<double>(samples.size() - 1);
  return {p.trapezoid_mean - p.uniform_mean, p.coef * (p.interior_mean - p.boundary_avg),
          h * (p.interior_mean - p.boundary_avg)};
}

double periodic_collapse_check(const FieldTensor& x, const ReductionPattern& pattern) {
  if (!x.grid().all_of_kind(AxisKind::periodic)) throw InvalidGridError("periodic_collapse_check needs a periodic grid");
  const Moments u = uniform_moments(x, pattern);
  const Moments w = weighted_moments(x, weight_field(x.grid(), WeightRule::trapezoid), pattern);
  double diff = 0.0;
  for (std::size_t i = 0; i < u.mean.size(); ++i) {
    diff = std::max(diff, std::fabs(u.mean[i] - w.mean[i]));
    diff = std::max(diff, std::fabs(u.variance[i] - w.variance[i]));
  }
  return diff;
}

namespace {

void check_variance_floor(const FieldTensor& x, const NormSpec& spec) {
  Moments m;
  switch (spec.method) {
    case NormMethod::none:
    case NormMethod::rmsnorm:
      return;
    case NormMethod::quadnorm:
      m = weighted_moments(x, quadrature_weight_field(x.grid()), spec.quad_mode);
      break;
    case NormMethod::blendquadnorm: {
      const auto layer = ReductionPattern::layer();
      m = blend_moments(uniform_moments(x, layer), weighted_moments(x, quadrature_weight_field(x.grid()), layer),
                        spec.alpha);
      break;
    }
    case NormMethod::layernorm:
      m = uniform_moments(x, ReductionPattern::layer());
      break;
    case NormMethod::instancenorm:
      m = uniform_moments(x, ReductionPattern::instance());
      break;
    case NormMethod::groupnorm:
      m = uniform_moments(x, ReductionPattern::group(spec.groups));
      break;
  }
  for (double v : m.variance) {
    if (v < kVarianceFloor) {
      throw DegenerateFieldError("statistics variance " + std::to_string(v) + " is below the floor 1e-6");
    }
  }
}

}  // namespace

double output_mismatch(const FieldSpec& field, const NormSpec& spec, const GridSpec& h_grid, const GridSpec& hp_grid,
                       InterpMethod method, std::size_t channels) {
  const FieldTensor xh = sample_field(field, h_grid, channels);
  const FieldTensor xhp = sample_field(field, hp_grid, channels);
  check_variance_floor(xh, spec);
  check_variance_floor(xhp, spec);
  const FieldTensor yh = apply_norm(xh, spec);
  const FieldTensor yhp = interpolate(apply_norm(xhp, spec), h_grid, method);
  std::vector<double> diff(yh.data().size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = yh.data()[i] - yhp.data()[i];
  return comparison_norm(yh.with_data(std::move(diff)), quadrature_weight_field(h_grid));
}

GridSpec cube_grid(std::size_t n, std::size_t dim) {
  std::vector<std::size_t> ns(dim, n);
  return uniform_grid(ns);
}

namespace {

double fit_rungs(const std::vector<Rung>& rungs) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rungs) pts.emplace_back(r.h, r.mismatch);
  return order_estimate(pts);
}

void check_ladder(std::span<const std::size_t> ns) {
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw DomainError("ladder must be strictly refining");
  }
}

}  // namespace

ConsistencyReport statistic_ladder(const FieldSpec& field, std::span<const std::size_t> ns, std::size_t dim,
                                   WeightRule rule, const ReductionPattern& pattern, Statistic stat,
                                   std::size_t channels) {
  check_ladder(ns);
  if (ns.size() < 2) throw DomainError("ladder needs at least two grid sizes");
  ConsistencyReport rep;
  rep.field = std::string(to_string(field.id));
  rep.quantity = stat == Statistic::mean ? "mean" : "variance";
  rep.rule = std::string(to_string(rule));
  rep.pattern = pattern.name();
  rep.rungs.resize(ns.size() - 1);
  parallel_for(rep.rungs.size(), [&](std::size_t k) {
    const GridSpec g = cube_grid(ns[k], dim);
    const GridSpec gp = cube_grid(ns[k + 1], dim);
    const auto mm = statistic_mismatch(field, g, gp, rule, pattern, channels);
    rep.rungs[k] = {ns[k], g.max_spacing(), ns[k + 1], gp.max_spacing(),
                    stat == Statistic::mean ? mm.mean : mm.variance};
  });
  rep.fitted_order = fit_rungs(rep.rungs);
  return rep;
}

ConsistencyReport output_ladder(const FieldSpec& field, const NormSpec& spec, std::span<const std::size_t> ns,
                                std::size_t dim, InterpMethod method, std::size_t channels) {
  check_ladder(ns);
  ConsistencyReport rep;
  rep.field = std::string(to_string(field.id));
  rep.quantity = "output:" + spec.describe();
  rep.rule = spec.method == NormMethod::quadnorm ? "quadrature" : "uniform";
  rep.pattern = spec.method == NormMethod::quadnorm ? spec.quad_mode.name() : std::string(to_string(spec.method));
  rep.rungs.resize(ns.size());
  parallel_for(ns.size(), [&](std::size_t k) {
    const GridSpec g = cube_grid(ns[k], dim);
    const GridSpec gp = cube_grid(2 * ns[k] - 1, dim);
    rep.rungs[k] = {ns[k], g.max_spacing(), 2 * ns[k] - 1, gp.max_spacing(),
                    output_mismatch(field, spec, g, gp, method, channels)};
  });
  rep.fitted_order = fit_rungs(rep.rungs);
  return rep;
}

}  // namespace qnk
