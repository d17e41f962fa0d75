#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qnk {

/// Per-seed paired observations: a is the baseline, b the method.
struct PairedSamples {
  std::vector<double> a;
  std::vector<double> b;

  /// Throws when lengths differ or n < 2.
  void validate() const;
  std::size_t size() const { return a.size(); }
  std::vector<double> differences() const;
};

/// splitmix64: a small counter-friendly generator for index-derived streams.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

 private:
  std::uint64_t state_;
};

/// Seed of stream `index` derived from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double sample_mean(std::span<const double> v);
/// Unbiased (n-1) variance.
double sample_variance(std::span<const double> v);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
double student_t_sf(double t, double df);
double student_t_quantile(double p, double df);

struct BootstrapResult {
  double improvement = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t resamples = 0;
  double confidence = 0.95;
  std::string method = "percentile";
};

/// Point estimate 1 - mean(b)/mean(a) with a percentile CI over paired index
/// resamples. Resample r draws from stream derive_seed(rng_seed, r).
BootstrapResult bootstrap_improvement_ci(const PairedSamples& s, std::size_t resamples = 10000,
                                         double confidence = 0.95, std::uint64_t rng_seed = 0);

struct TostResult {
  double p_value = 1.0;
  bool equivalent = false;
  double mean_diff = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double t_lower = 0.0;
  double t_upper = 0.0;
};

/// Two one-sided paired t-tests of mean(a - b) against -margin and +margin.
TostResult tost_equivalence(const PairedSamples& s, double margin, double alpha = 0.05);

/// Holm step-down rejections, in input order.
std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha = 0.05);

struct CohensD {
  double d = 0.0;
  bool degenerate = false;
};

CohensD cohens_d(const PairedSamples& s);

struct TTestResult {
  double t = 0.0;
  double p_two_sided = 1.0;
  double df = 0.0;
  bool degenerate = false;
};

TTestResult paired_t_test(const PairedSamples& s);

}  // namespace qnk
