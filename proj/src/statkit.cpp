#include "qnk/statkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/summation.hpp"

namespace qnk {

void PairedSamples::validate() const {
  if (a.size() != b.size()) throw ShapeError("paired samples must have equal lengths");
  if (a.size() < 2) throw DomainError("paired samples need n >= 2");
}

std::vector<double> PairedSamples::differences() const {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

SplitMix64::result_type SplitMix64::operator()() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  return g();
}

double sample_mean(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

double sample_variance(std::span<const double> v) {
  const double m = sample_mean(v);
  return pairwise_sum_fn(0, v.size(), [&](std::size_t i) { return (v[i] - m) * (v[i] - m); }) /
         static_cast<double>(v.size() - 1);
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double md = m;
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("degrees of freedom must be > 0");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t > 0 ? tail : 1.0 - tail;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

BootstrapResult bootstrap_improvement_ci(const PairedSamples& s, std::size_t resamples, double confidence,
                                         std::uint64_t rng_seed) {
  s.validate();
  if (resamples < 1) throw DomainError("need at least one resample");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
  for (double v : s.a) {
    if (!(v > 0.0)) throw DomainError("bootstrap improvement needs positive baseline values");
  }
  const std::size_t n = s.size();
  BootstrapResult r;
  r.resamples = resamples;
  r.confidence = confidence;
  r.improvement = 1.0 - sample_mean(s.b) / sample_mean(s.a);

  std::vector<double> stats(resamples);
  parallel_for(resamples, [&](std::size_t k) {
    SplitMix64 g(derive_seed(rng_seed, k));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> ra(n);
    std::vector<double> rb(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(g);
      ra[i] = s.a[j];
      rb[i] = s.b[j];
    }
    stats[k] = 1.0 - sample_mean(rb) / sample_mean(ra);
  });
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - confidence) / 2.0;
  r.lo = percentile(stats, tail);
  r.hi = percentile(stats, 1.0 - tail);
  return r;
}

TostResult tost_equivalence(const PairedSamples& s, double margin, double alpha) {
  s.validate();
  if (!(margin > 0.0)) throw DomainError("equivalence margin must be > 0");
  const auto d = s.differences();
  const double n = static_cast<double>(d.size());
  const double df = n - 1.0;
  TostResult r;
  r.mean_diff = sample_mean(d);
  const double se = std::sqrt(sample_variance(d) / n);
  if (se == 0.0) {
    r.equivalent = std::fabs(r.mean_diff) < margin;
    r.p_value = r.equivalent ? 0.0 : 1.0;
    r.ci_lo = r.ci_hi = r.mean_diff;
    const double inf = std::numeric_limits<double>::infinity();
    r.t_lower = r.mean_diff + margin > 0 ? inf : -inf;
    r.t_upper = r.mean_diff - margin < 0 ? -inf : inf;
    return r;
  }
  r.t_lower = (r.mean_diff + margin) / se;
  r.t_upper = (r.mean_diff - margin) / se;
  const double p_lower = student_t_sf(r.t_lower, df);
  const double p_upper = student_t_cdf(r.t_upper, df);
  r.p_value = std::max(p_lower, p_upper);
  r.equivalent = r.p_value < alpha;
  const double tq = student_t_quantile(1.0 - alpha, df);
  r.ci_lo = r.mean_diff - tq * se;
  r.ci_hi = r.mean_diff + tq * se;
  return r;
}

std::vector<bool> holm_bonferroni(std::span<const double> p, double alpha) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("p-values must lie in [0, 1]");
  }
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < m; ++k) {
    if (p[order[k]] > alpha / static_cast<double>(m - k)) break;
    reject[order[k]] = true;
  }
  return reject;
}

CohensD cohens_d(const PairedSamples& s) {
  s.validate();
  const double diff = sample_mean(s.a) - sample_mean(s.b);
  const double pooled = std::sqrt((sample_variance(s.a) + sample_variance(s.b)) / 2.0);
  if (pooled == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {diff == 0.0 ? 0.0 : (diff > 0 ? inf : -inf), true};
  }
  return {diff / pooled, false};
}

TTestResult paired_t_test(const PairedSamples& s) {
  s.validate();
  const auto d = s.differences();
  const double n = static_cast<double>(d.size());
  TTestResult r;
  r.df = n - 1.0;
  const double m = sample_mean(d);
  const double se = std::sqrt(sample_variance(d) / n);
  if (se == 0.0) {
    r.degenerate = true;
    if (m == 0.0) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
    }
    return r;
  }
  r.t = m / se;
  r.p_two_sided = std::min(1.0, 2.0 * student_t_sf(std::fabs(r.t), r.df));
  return r;
}

}  // namespace qnk
