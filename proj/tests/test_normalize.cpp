#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/normalize.hpp"
#include "qnk/quadrature.hpp"

using namespace qnk;

namespace {

FieldTensor line(std::vector<double> v) {
  const std::size_t n = v.size();
  return FieldTensor(1, 1, uniform_grid({n}), std::move(v));
}

double energy(const FieldTensor& x, std::size_t b) {
  double s = 0.0;
  const std::size_t per = x.channels() * x.spatial_size();
  for (std::size_t i = 0; i < per; ++i) s += x.data()[b * per + i] * x.data()[b * per + i];
  return s / per;
}

}  // namespace

TEST_CASE("normalize with given moments") {
  const auto c = sample_field({FieldId::constant, 4.0}, uniform_grid({5}));
  const auto yc = normalize(c, uniform_moments(c, ReductionPattern::instance()), NormSpec::layernorm());
  for (double v : yc.data()) CHECK(v == 0.0);

  const auto x = line({0.0, 0.5, 1.0});
  NormSpec s = NormSpec::layernorm();
  s.epsilon = 0.0;
  const auto y = normalize(x, uniform_moments(x, ReductionPattern::instance()), s);
  CHECK(y.data()[0] == doctest::Approx(-1.224744871391589).epsilon(1e-15));
  CHECK(y.data()[1] == 0.0);
  CHECK(y.data()[2] == doctest::Approx(1.224744871391589).epsilon(1e-15));

  s.gamma = {2.0};
  s.beta = {3.0};
  const auto z = normalize(x, uniform_moments(x, ReductionPattern::instance()), s);
  for (std::size_t i = 0; i < 3; ++i) CHECK(z.data()[i] == doctest::Approx(2.0 * y.data()[i] + 3.0));

  // Zero variance with eps = 0 maps to beta.
  const auto zc = normalize(c, uniform_moments(c, ReductionPattern::instance()), s);
  for (double v : zc.data()) CHECK(v == 3.0);
}

TEST_CASE("spec validation") {
  NormSpec s = NormSpec::blend(1.5);
  CHECK_THROWS_AS(s.validate(1), DomainError);
  s = NormSpec::layernorm();
  s.epsilon = -1.0;
  CHECK_THROWS_AS(s.validate(1), DomainError);
  s = NormSpec::layernorm();
  s.gamma = {1.0, 1.0};
  CHECK_THROWS_AS(s.validate(3), ShapeError);
  CHECK_THROWS(parse_norm_method("batchnorm"));
}

TEST_CASE("quadnorm forward") {
  const auto g = uniform_grid({3, 3});
  FieldTensor x(1, 2, g);
  for (std::size_t c = 0; c < 2; ++c) {
    auto s = x.slice(0, c);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) s[i * 3 + j] = g.axis(0).coords[i] * g.axis(0).coords[i];
    }
  }
  const auto m = weighted_moments(x, quadrature_weight_field(g), ReductionPattern::instance());
  CHECK(m.mean_at(0, 0) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(m.mean_at(0, 1) == doctest::Approx(0.375).epsilon(1e-15));

  const auto c = sample_field({FieldId::constant, 2.0}, g, 2);
  NormSpec s = NormSpec::quadnorm(ReductionPattern::instance());
  s.beta = {0.5, -0.5};
  const auto y = quadnorm_forward(c, ReductionPattern::instance(), s);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(y.slice(0, 0)[i] == 0.5);
    CHECK(y.slice(0, 1)[i] == -0.5);
  }
}

TEST_CASE("property: periodic grids collapse quadnorm and blend to layernorm") {
  test::Gen gen(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = periodic_grid({gen.size(2, 10), gen.size(2, 10)});
    const auto x = gen.field(g, 2, 4);
    const auto ln = apply_norm(x, NormSpec::layernorm());
    CHECK(test::max_abs_diff(ln.data(), apply_norm(x, NormSpec::quadnorm()).data()) <= 1e-14);
    CHECK(test::max_abs_diff(ln.data(), apply_norm(x, NormSpec::blend(gen.uniform())).data()) <= 1e-14);
  }
}

TEST_CASE("property: blend endpoints") {
  test::Gen gen(22);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = gen.grid(2, 9);
    const auto x = gen.field(g, 2, 2);
    CHECK(test::max_abs_diff(apply_norm(x, NormSpec::blend(1.0)).data(), apply_norm(x, NormSpec::layernorm()).data()) <=
          1e-14);
    CHECK(test::max_abs_diff(apply_norm(x, NormSpec::blend(0.0)).data(), apply_norm(x, NormSpec::quadnorm()).data()) <=
          1e-14);
  }
}

TEST_CASE("property: normalized slices have zero weighted mean and unit weighted variance") {
  test::Gen gen(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = gen.grid(3, 7);
    const auto x = gen.field(g, 2, 4);
    NormSpec s = NormSpec::quadnorm(ReductionPattern::group(2));
    s.epsilon = 0.0;
    const auto y = apply_norm(x, s);
    const auto m = weighted_moments(y, quadrature_weight_field(g), ReductionPattern::group(2));
    for (double v : m.mean) CHECK(std::abs(v) < 1e-12);
    for (double v : m.variance) CHECK(std::abs(v - 1.0) < 1e-12);
  }
}

TEST_CASE("baselines") {
  test::Gen gen(24);
  const auto x = gen.field(uniform_grid({5, 5}), 2, 8);
  const auto none = apply_norm(x, NormSpec::none());
  CHECK(test::max_abs_diff(none.data(), x.data()) == 0.0);

  const auto c = sample_field({FieldId::constant, 3.0}, uniform_grid({4, 4}), 2);
  const auto r = apply_norm(c, NormSpec::with(NormMethod::rmsnorm));
  for (double v : r.data()) CHECK(v == doctest::Approx(3.0 / std::sqrt(9.0 + 1e-5)).epsilon(1e-15));

  // instancenorm and groupnorm(G=C) share statistics; groupnorm(G=1) is layernorm.
  NormSpec gn = NormSpec::with(NormMethod::groupnorm);
  gn.groups = 8;
  CHECK(test::max_abs_diff(apply_norm(x, gn).data(), apply_norm(x, NormSpec::with(NormMethod::instancenorm)).data()) <
        1e-15);
  gn.groups = 1;
  CHECK(test::max_abs_diff(apply_norm(x, gn).data(), apply_norm(x, NormSpec::layernorm()).data()) < 1e-15);
  gn.groups = 3;
  CHECK_THROWS_AS(apply_norm(x, gn), ShapeError);
}

TEST_CASE("residual gain") {
  test::Gen gen(25);
  const auto x = gen.field(uniform_grid({6, 6}), 2, 3);
  const auto zero = x.with_data(std::vector<double>(x.data().size(), 0.0));
  CHECK(test::max_abs_diff(residual_gain(x, zero, 0.5, 1e-5).data(), x.data()) == 0.0);

  // Equal energies give unit gain.
  std::vector<double> flipped(x.data().begin(), x.data().end());
  for (auto& v : flipped) v = -v;
  const auto fx = x.with_data(flipped);
  const auto y = residual_gain(x, fx, 0.5, 0.0);
  for (std::size_t i = 0; i < x.data().size(); ++i) CHECK(y.data()[i] == doctest::Approx(0.5 * x.data()[i]));
}

TEST_CASE("property: residual gain energy bound") {
  test::Gen gen(26);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.grid(2, 8);
    const auto x = gen.field(g, 2, 3);
    auto fx = gen.field(g, 2, 3);
    const double scale = std::exp(gen.uniform(-4.0, 4.0));
    for (auto& v : fx.storage()) v *= scale;
    const auto y = residual_gain(x, fx, 0.5, 1e-8);
    for (std::size_t b = 0; b < 2; ++b) CHECK(energy(y, b) <= 2.25 * energy(x, b) * (1.0 + 1e-12));
  }
}
