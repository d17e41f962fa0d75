#include "qnk/stats.hpp"

#include <cmath>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/summation.hpp"

namespace qnk {

std::size_t ReductionPattern::slices(std::size_t channels) const {
  switch (kind) {
    case Kind::instance:
      return channels;
    case Kind::layer:
      return 1;
    case Kind::group:
      return groups;
  }
  return 1;
}

std::size_t ReductionPattern::channels_per_slice(std::size_t channels) const { return channels / slices(channels); }

void ReductionPattern::validate(std::size_t channels) const {
  if (channels < 1) throw ShapeError("need at least one channel");
  if (kind == Kind::group) {
    if (groups < 1) throw ShapeError("group count must be >= 1");
    if (channels % groups != 0) {
      throw ShapeError("group pattern needs channels divisible by groups: C=" + std::to_string(channels) +
                       ", G=" + std::to_string(groups));
    }
  }
}

std::string ReductionPattern::name() const {
  switch (kind) {
    case Kind::instance:
      return "instance";
    case Kind::layer:
      return "layer";
    case Kind::group:
      return "group:" + std::to_string(groups);
  }
  return "unknown";
}

ReductionPattern parse_pattern(const std::string& text) {
  if (text == "instance") return ReductionPattern::instance();
  if (text == "layer") return ReductionPattern::layer();
  if (text.rfind("group", 0) == 0) {
    if (text == "group") return ReductionPattern::group(8);
    if (text.size() > 6 && (text[5] == ':' || text[5] == '=')) {
      try {
        const long g = std::stol(text.substr(6));
        if (g >= 1) return ReductionPattern::group(static_cast<std::size_t>(g));
      } catch (const std::exception&) {
      }
    }
  }
  throw DomainError("unknown reduction pattern '" + text + "' (use instance, layer or group:G)");
}

namespace {

// w == nullptr means unit point weights.
Moments reduce(const FieldTensor& x, const double* w, const ReductionPattern& pattern) {
  const std::size_t C = x.channels();
  pattern.validate(C);
  const std::size_t S = pattern.slices(C);
  const std::size_t m = pattern.channels_per_slice(C);
  const std::size_t n = x.spatial_size();
  const std::size_t B = x.batch();

  Moments out;
  out.pattern = pattern;
  out.batch = B;
  out.slices = S;
  out.weighted = w != nullptr;
  out.mean.assign(B * S, 0.0);
  out.variance.assign(B * S, 0.0);

  const double wsum = w ? pairwise_sum(std::span<const double>(w, n)) : static_cast<double>(n);
  const double denom = static_cast<double>(m) * wsum;

  parallel_for(B * S, [&](std::size_t job) {
    const std::size_t b = job / S;
    const std::size_t s = job % S;
    std::vector<double> per_channel(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto v = x.slice(b, s * m + j);
      per_channel[j] = w ? pairwise_sum_fn(0, n, [&](std::size_t i) { return w[i] * v[i]; }) : pairwise_sum(v);
    }
    const double mu = pairwise_sum(per_channel) / denom;
    for (std::size_t j = 0; j < m; ++j) {
      const auto v = x.slice(b, s * m + j);
      per_channel[j] = pairwise_sum_fn(0, n, [&](std::size_t i) {
        const double d = v[i] - mu;
        return w ? w[i] * d * d : d * d;
      });
    }
    out.mean[job] = mu;
    out.variance[job] = pairwise_sum(per_channel) / denom;
  });
  return out;
}

}  // namespace

Moments uniform_moments(const FieldTensor& x, const ReductionPattern& pattern) { return reduce(x, nullptr, pattern); }

Moments weighted_moments(const FieldTensor& x, const WeightField& w, const ReductionPattern& pattern) {
  if (w.grid.shape() != x.grid().shape()) throw ShapeError("weight field shape does not match the field's grid");
  return weighted_moments(x, std::span<const double>(w.weights), pattern);
}

Moments weighted_moments(const FieldTensor& x, std::span<const double> w, const ReductionPattern& pattern) {
  if (w.size() != x.spatial_size()) {
    throw ShapeError("got " + std::to_string(w.size()) + " weights for " + std::to_string(x.spatial_size()) +
                     " spatial nodes");
  }
  for (double v : w) {
    if (!(v > 0.0)) throw DomainError("weights must be positive");
  }
  return reduce(x, w.data(), pattern);
}

Moments blend_moments(const Moments& m_ln, const Moments& m_wln, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("blend alpha must lie in [0, 1]");
  if (!(m_ln.pattern == m_wln.pattern) || m_ln.batch != m_wln.batch || m_ln.slices != m_wln.slices) {
    throw ShapeError("blended moments must share pattern and shape");
  }
  if (alpha == 1.0) return m_ln;
  if (alpha == 0.0) return m_wln;
  Moments out = m_ln;
  out.weighted = true;
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < out.mean.size(); ++i) {
    const double d = m_ln.mean[i] - m_wln.mean[i];
    out.mean[i] = alpha * m_ln.mean[i] + beta * m_wln.mean[i];
    out.variance[i] = alpha * m_ln.variance[i] + beta * m_wln.variance[i] + alpha * beta * d * d;
  }
  return out;
}

}  // namespace qnk
