#include "qnk/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/summation.hpp"

namespace qnk {

namespace {

constexpr std::pair<NormMethod, std::string_view> kMethods[] = {
    {NormMethod::none, "none"},
    {NormMethod::layernorm, "layernorm"},
    {NormMethod::instancenorm, "instancenorm"},
    {NormMethod::groupnorm, "groupnorm"},
    {NormMethod::rmsnorm, "rmsnorm"},
    {NormMethod::quadnorm, "quadnorm"},
    {NormMethod::blendquadnorm, "blendquadnorm"},
};

double gamma_of(const NormSpec& s, std::size_t c) { return s.gamma.empty() ? 1.0 : s.gamma[c]; }
double beta_of(const NormSpec& s, std::size_t c) { return s.beta.empty() ? 0.0 : s.beta[c]; }

}  // namespace

std::string_view to_string(NormMethod m) {
  for (const auto& [k, name] : kMethods) {
    if (k == m) return name;
  }
  return "unknown";
}

NormMethod parse_norm_method(std::string_view name) {
  for (const auto& [k, n] : kMethods) {
    if (n == name) return k;
  }
  throw DomainError("unknown norm method '" + std::string(name) + "'");
}

void NormSpec::validate(std::size_t channels) const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be finite and >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("blend alpha must lie in [0, 1]");
  if (!gamma.empty() && gamma.size() != channels) throw ShapeError("gamma length must equal the channel count");
  if (!beta.empty() && beta.size() != channels) throw ShapeError("beta length must equal the channel count");
  if (method == NormMethod::groupnorm) ReductionPattern::group(groups).validate(channels);
  if (method == NormMethod::quadnorm) quad_mode.validate(channels);
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  os << to_string(method);
  if (method == NormMethod::quadnorm) os << "(" << quad_mode.name() << ")";
  if (method == NormMethod::groupnorm) os << "(" << groups << ")";
  if (method == NormMethod::blendquadnorm) os << "(" << alpha << ")";
  return os.str();
}

namespace {

constexpr double kRoundingSpread = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

FieldTensor normalize(const FieldTensor& x, const Moments& m, const NormSpec& spec) {
  const std::size_t C = x.channels();
  spec.validate(C);
  if (m.batch != x.batch() || m.slices != m.pattern.slices(C)) {
    throw ShapeError("moments shape does not match the field for pattern " + m.pattern.name());
  }
  const std::size_t per = m.pattern.channels_per_slice(C);
  // A slice whose spread is at rounding level relative to its batch element
  // is constant to working precision; normalizing it would only amplify noise.
  std::vector<double> noise_var(x.batch());
  const std::size_t stride = C * x.spatial_size();
  for (std::size_t b = 0; b < x.batch(); ++b) {
    double scale = 0.0;
    for (std::size_t i = 0; i < stride; ++i) scale = std::max(scale, std::abs(x.data()[b * stride + i]));
    noise_var[b] = (kRoundingSpread * scale) * (kRoundingSpread * scale);
  }
  FieldTensor y = x;
  parallel_for(x.batch() * C, [&](std::size_t job) {
    const std::size_t b = job / C;
    const std::size_t c = job % C;
    const double mu = m.mean_at(b, c / per);
    const double v = m.var_at(b, c / per);
    const double denom = std::sqrt(v + spec.epsilon);
    const double g = gamma_of(spec, c);
    const double bt = beta_of(spec, c);
    const bool flat = v <= noise_var[b] || !(denom > 0.0);
    auto src = x.slice(b, c);
    auto dst = y.slice(b, c);
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = flat ? bt : g * (src[i] - mu) / denom + bt;
    }
  });
  return y;
}

FieldTensor quadnorm_forward(const FieldTensor& x, const ReductionPattern& mode, const NormSpec& spec) {
  const WeightField w = quadrature_weight_field(x.grid());
  return normalize(x, weighted_moments(x, w, mode), spec);
}

FieldTensor blendquadnorm_forward(const FieldTensor& x, double alpha, const NormSpec& spec) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("blend alpha must lie in [0, 1]");
  const auto layer = ReductionPattern::layer();
  const Moments ln = uniform_moments(x, layer);
  const Moments wln = weighted_moments(x, quadrature_weight_field(x.grid()), layer);
  return normalize(x, blend_moments(ln, wln, alpha), spec);
}

FieldTensor baseline_forward(const FieldTensor& x, NormMethod method, const NormSpec& spec) {
  switch (method) {
    case NormMethod::none:
      return x;
    case NormMethod::layernorm:
      return normalize(x, uniform_moments(x, ReductionPattern::layer()), spec);
    case NormMethod::instancenorm:
      return normalize(x, uniform_moments(x, ReductionPattern::instance()), spec);
    case NormMethod::groupnorm:
      return normalize(x, uniform_moments(x, ReductionPattern::group(spec.groups)), spec);
    case NormMethod::rmsnorm: {
      spec.validate(x.channels());
      FieldTensor y = x;
      const std::size_t C = x.channels();
      parallel_for(x.batch() * C, [&](std::size_t job) {
        const std::size_t b = job / C;
        const std::size_t c = job % C;
        auto src = x.slice(b, c);
        auto dst = y.slice(b, c);
        const double ms =
            pairwise_sum_fn(0, src.size(), [&](std::size_t i) { return src[i] * src[i]; }) / static_cast<double>(src.size());
        const double denom = std::sqrt(ms + spec.epsilon);
        const double g = gamma_of(spec, c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = denom > 0.0 ? g * src[i] / denom : 0.0;
      });
      return y;
    }
    default:
      throw DomainError(std::string(to_string(method)) + " is not a baseline method");
  }
}

FieldTensor apply_norm(const FieldTensor& x, const NormSpec& spec) {
  switch (spec.method) {
    case NormMethod::quadnorm:
      return quadnorm_forward(x, spec.quad_mode, spec);
    case NormMethod::blendquadnorm:
      return blendquadnorm_forward(x, spec.alpha, spec);
    default:
      return baseline_forward(x, spec.method, spec);
  }
}

FieldTensor residual_gain(const FieldTensor& x, const FieldTensor& fx, double alpha0, double epsilon,
                          std::span<const double> weights) {
  if (x.shape() != fx.shape()) throw ShapeError("residual_gain needs x and fx of the same shape");
  if (!(alpha0 >= 0.0)) throw DomainError("alpha0 must be >= 0");
  const std::size_t n = x.spatial_size();
  const std::size_t C = x.channels();
  if (!weights.empty() && weights.size() != n) throw ShapeError("gain weights must match the spatial size");

  auto energy = [&](const FieldTensor& t, std::size_t b) {
    std::vector<double> per(C);
    for (std::size_t c = 0; c < C; ++c) {
      auto s = t.slice(b, c);
      per[c] = weights.empty() ? pairwise_sum_fn(0, n, [&](std::size_t i) { return s[i] * s[i]; })
                               : pairwise_sum_fn(0, n, [&](std::size_t i) { return weights[i] * s[i] * s[i]; });
    }
    const double mass = weights.empty() ? static_cast<double>(n) : pairwise_sum(weights);
    return pairwise_sum(per) / (static_cast<double>(C) * mass);
  };

  FieldTensor y = x;
  for (std::size_t b = 0; b < x.batch(); ++b) {
    const double ex = energy(x, b);
    const double ef = energy(fx, b);
    const double denom = ef + epsilon;
    const double g = denom > 0.0 ? alpha0 * std::sqrt(ex / denom) : 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      auto dst = y.slice(b, c);
      auto f = fx.slice(b, c);
      for (std::size_t i = 0; i < n; ++i) dst[i] += g * f[i];
    }
  }
  return y;
}

}  // namespace qnk
