#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/stats.hpp"

using namespace qnk;

namespace {

FieldTensor line(std::vector<double> v) {
  const std::size_t n = v.size();
  return FieldTensor(1, 1, uniform_grid({n}), std::move(v));
}

// Oracle: long-double two-pass moments over slice s of batch b.
std::pair<double, double> brute(const FieldTensor& x, const std::vector<double>& w, const ReductionPattern& p,
                                std::size_t b, std::size_t s) {
  const std::size_t per = p.channels_per_slice(x.channels());
  long double sw = 0.0L;
  long double sx = 0.0L;
  for (std::size_t c = s * per; c < (s + 1) * per; ++c) {
    const auto v = x.slice(b, c);
    for (std::size_t i = 0; i < v.size(); ++i) {
      sw += w[i];
      sx += static_cast<long double>(w[i]) * v[i];
    }
  }
  const long double mu = sx / sw;
  long double sv = 0.0L;
  for (std::size_t c = s * per; c < (s + 1) * per; ++c) {
    const auto v = x.slice(b, c);
    for (std::size_t i = 0; i < v.size(); ++i) sv += w[i] * (v[i] - mu) * (v[i] - mu);
  }
  return {static_cast<double>(mu), static_cast<double>(sv / sw)};
}

}  // namespace

TEST_CASE("reduction patterns") {
  CHECK(ReductionPattern::instance().slices(6) == 6);
  CHECK(ReductionPattern::layer().slices(6) == 1);
  CHECK(ReductionPattern::group(3).slices(6) == 3);
  CHECK(ReductionPattern::group(3).channels_per_slice(6) == 2);
  CHECK_THROWS_AS(ReductionPattern::group(4).validate(6), ShapeError);
  CHECK(parse_pattern("group:4") == ReductionPattern::group(4));
  CHECK(parse_pattern("instance") == ReductionPattern::instance());
  CHECK_THROWS(parse_pattern("bogus"));
}

TEST_CASE("uniform moments") {
  const auto m = uniform_moments(line({0.0, 0.5, 1.0}), ReductionPattern::instance());
  CHECK(m.mean_at(0, 0) == doctest::Approx(0.5));
  CHECK(m.var_at(0, 0) == doctest::Approx(1.0 / 6.0));

  const auto c = uniform_moments(sample_field({FieldId::constant, 3.5}, uniform_grid({5, 5}), 2),
                                 ReductionPattern::layer());
  CHECK(c.mean_at(0, 0) == 3.5);
  CHECK(c.var_at(0, 0) == 0.0);

  const auto q = uniform_moments(line({0.0, 0.25, 1.0}), ReductionPattern::layer());
  CHECK(q.mean_at(0, 0) == doctest::Approx(0.4166666666666667).epsilon(1e-15));
}

TEST_CASE("weighted moments") {
  const auto x = line({0.0, 0.25, 1.0});
  const auto m = weighted_moments(x, weight_field(x.grid(), WeightRule::trapezoid), ReductionPattern::instance());
  CHECK(m.mean_at(0, 0) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(m.weighted);

  const auto c = sample_field({FieldId::constant, -2.0}, nonuniform_grid(Chebyshev{}, 7, 2), 3);
  const auto mc = weighted_moments(c, quadrature_weight_field(c.grid()), ReductionPattern::instance());
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(mc.mean_at(0, s) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(mc.var_at(0, s) == doctest::Approx(0.0));
  }

  const std::vector<double> bad{0.5, 0.0, 0.5};
  CHECK_THROWS(weighted_moments(x, bad, ReductionPattern::layer()));
  const std::vector<double> short_w{0.5, 0.5};
  CHECK_THROWS_AS(weighted_moments(x, short_w, ReductionPattern::layer()), ShapeError);
}

TEST_CASE("property: weighted moments match the brute-force oracle") {
  test::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = gen.grid(2, 9);
    const std::size_t B = gen.size(1, 3);
    const std::size_t C = 4;
    const auto x = gen.field(g, B, C);
    const auto wf = quadrature_weight_field(g);
    for (auto p : {ReductionPattern::instance(), ReductionPattern::layer(), ReductionPattern::group(2)}) {
      const auto m = weighted_moments(x, wf, p);
      for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t s = 0; s < p.slices(C); ++s) {
          const auto [mu, var] = brute(x, wf.weights, p, b, s);
          CHECK(std::abs(m.mean_at(b, s) - mu) < 1e-13);
          CHECK(std::abs(m.var_at(b, s) - var) < 1e-13);
          CHECK(m.var_at(b, s) >= 0.0);
        }
      }
    }
  }
}

TEST_CASE("property: periodic grids give uniform statistics") {
  test::Gen gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen.size(2, 12);
    const auto g = periodic_grid({n, gen.size(2, 12)});
    const auto x = gen.field(g, 2, 4);
    for (auto p : {ReductionPattern::instance(), ReductionPattern::layer(), ReductionPattern::group(2)}) {
      const auto u = uniform_moments(x, p);
      const auto w = weighted_moments(x, quadrature_weight_field(g), p);
      CHECK(test::max_abs_diff(u.mean, w.mean) <= 1e-14);
      CHECK(test::max_abs_diff(u.variance, w.variance) <= 1e-14);
    }
  }
}

TEST_CASE("blended moments") {
  Moments a;
  a.mean = {1.0};
  a.variance = {1.0};
  a.batch = 1;
  a.slices = 1;
  Moments b = a;
  b.mean = {2.0};
  b.variance = {4.0};
  const auto m = blend_moments(a, b, 0.3);
  CHECK(m.mean[0] == doctest::Approx(1.7));
  CHECK(m.variance[0] == doctest::Approx(3.31));
  CHECK(blend_moments(a, b, 1.0).mean == a.mean);
  CHECK(blend_moments(a, b, 0.0).variance == b.variance);
  CHECK_THROWS_AS(blend_moments(a, b, 1.5), DomainError);
}

TEST_CASE("property: blend equals moments under the mixture weights") {
  test::Gen gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = gen.grid(2, 9);
    const auto x = gen.field(g, 1, 2);
    const double alpha = gen.uniform();
    const auto wf = quadrature_weight_field(g);
    const auto ln = uniform_moments(x, ReductionPattern::layer());
    const auto wln = weighted_moments(x, wf, ReductionPattern::layer());
    const auto bl = blend_moments(ln, wln, alpha);
    std::vector<double> p(g.num_nodes());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = alpha / p.size() + (1.0 - alpha) * wf.weights[i];
    const auto [mu, var] = brute(x, p, ReductionPattern::layer(), 0, 0);
    CHECK(std::abs(bl.mean[0] - mu) < 1e-13);
    CHECK(std::abs(bl.variance[0] - var) < 1e-13);
  }
}
