#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/resample.hpp"

using namespace qnk;

namespace {

double keys(double s) {
  s = std::abs(s);
  if (s <= 1.0) return 1.5 * s * s * s - 2.5 * s * s + 1.0;
  if (s < 2.0) return -0.5 * s * s * s + 2.5 * s * s - 4.0 * s + 2.0;
  return 0.0;
}

// Oracle: cubic convolution on an endpoint axis with cubic-exact ghost nodes.
double keys_at(const std::vector<double>& p, double x) {
  const std::size_t n = p.size();
  auto at = [&](long i) {
    if (i < 0) return 3.0 * p[0] - 3.0 * p[1] + p[2];
    if (i >= static_cast<long>(n)) return 3.0 * p[n - 1] - 3.0 * p[n - 2] + p[n - 3];
    return p[static_cast<std::size_t>(i)];
  };
  const double u = x * (n - 1);
  const long i0 = std::min(static_cast<long>(std::floor(u)), static_cast<long>(n) - 2);
  double s = 0.0;
  for (long k = i0 - 1; k <= i0 + 2; ++k) s += keys(u - k) * at(k);
  return s;
}

}  // namespace

TEST_CASE("constant and linear reproduction") {
  const auto c = sample_field({FieldId::constant, 5.0}, uniform_grid({3, 3}));
  const auto yc = interpolate(c, uniform_grid({5, 5}), InterpMethod::bicubic);
  for (double v : yc.data()) CHECK(v == doctest::Approx(5.0).epsilon(1e-15));

  const auto x = sample_field({FieldId::linear}, uniform_grid({3}));
  const auto y = interpolate(x, uniform_grid({5}), InterpMethod::bilinear);
  for (std::size_t i = 0; i < 5; ++i) CHECK(y.data()[i] == doctest::Approx(i / 4.0).epsilon(1e-15));
}

TEST_CASE("bicubic matches the cubic-convolution oracle") {
  test::Gen gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ns = gen.size(3, 20);
    const std::size_t nt = gen.size(2, 40);
    const auto src = gen.normals(ns);
    const auto m = interpolation_matrix_1d(uniform_axis(ns), uniform_axis(nt), InterpMethod::bicubic);
    const auto out = m.apply(src);
    for (std::size_t j = 0; j < nt; ++j) {
      CHECK(std::abs(out[j] - keys_at(src, static_cast<double>(j) / (nt - 1))) < 1e-12);
    }
  }
}

TEST_CASE("property: interpolation rows sum to one and hit coincident nodes") {
  test::Gen gen(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ns = gen.size(2, 30);
    const std::size_t k = gen.size(1, 4);
    const bool periodic = gen.size(0, 1) == 1;
    const auto s = periodic ? periodic_axis(ns) : uniform_axis(ns);
    const auto t = periodic ? periodic_axis(ns * k) : uniform_axis((ns - 1) * k + 1);
    for (auto method : {InterpMethod::bilinear, InterpMethod::bicubic}) {
      const auto m = interpolation_matrix_1d(s, t, method);
      REQUIRE(m.rows.size() == t.size());
      for (std::size_t j = 0; j < t.size(); ++j) {
        double sum = 0.0;
        for (const auto& [i, w] : m.rows[j]) sum += w;
        CHECK(std::abs(sum - 1.0) < 1e-14);
      }
      const auto v = gen.normals(ns);
      const auto out = m.apply(v);
      for (std::size_t i = 0; i < ns; ++i) CHECK(std::abs(out[i * k] - v[i]) < 1e-14);
    }
  }
}

TEST_CASE("periodic interpolation is exact for low trigonometric modes under refinement") {
  const auto g = periodic_grid({64});
  FieldTensor x(1, 1, g);
  for (std::size_t i = 0; i < 64; ++i) x.storage()[i] = std::sin(2.0 * std::numbers::pi * i / 64.0);
  const auto y = interpolate(x, periodic_grid({128}), InterpMethod::bicubic);
  double err = 0.0;
  for (std::size_t i = 0; i < 128; ++i) err = std::max(err, std::abs(y.data()[i] - std::sin(std::numbers::pi * i / 64.0)));
  CHECK(err < 1e-4);
}

TEST_CASE("bicubic error decays at second order or faster") {
  const FieldSpec f{FieldId::mixed2d};
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {17u, 33u, 65u, 129u}) {
    const auto x = sample_field(f, uniform_grid({n, n}));
    const auto fine = uniform_grid({2 * n - 1, 2 * n - 1});
    const auto y = interpolate(x, fine, InterpMethod::bicubic);
    const auto exact = sample_field(f, fine);
    pts.emplace_back(1.0 / (n - 1), test::max_abs_diff(y.data(), exact.data()));
  }
  CHECK(order_estimate(pts) >= 1.9);
}

TEST_CASE("identity and incompatible grids") {
  test::Gen gen(33);
  const auto x = gen.field(uniform_grid({7, 5}), 2, 2);
  CHECK(test::max_abs_diff(interpolate(x, x.grid(), InterpMethod::bicubic).data(), x.data()) == 0.0);
  CHECK_THROWS(interpolate(x, periodic_grid({7, 5}), InterpMethod::bicubic));
  CHECK_THROWS(interpolate(x, uniform_grid({7}), InterpMethod::bicubic));
  CHECK_THROWS(parse_interp_method("lanczos"));
}
