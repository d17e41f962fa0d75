#include <doctest.h>

#include <cmath>
#include <numeric>
#include <thread>

#include "gen.hpp"
#include "qnk/error.hpp"
#include "qnk/quadrature.hpp"

using namespace qnk;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Integral of x^k over [0, 1] by the weights, against 1/(k+1).
double monomial_error(const std::vector<double>& w, const Axis1D& a, int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(a.coords[i], k);
  return std::abs(s - 1.0 / (k + 1));
}

}  // namespace

TEST_CASE("trapezoid weights") {
  CHECK(trapezoid_weights_1d(uniform_axis(3)) == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(trapezoid_weights_1d(uniform_axis(2)) == std::vector<double>{0.5, 0.5});
  CHECK(trapezoid_weights_1d(periodic_axis(4)) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
}

TEST_CASE("Newton-Cotes weights") {
  const auto s3 = newton_cotes_weights_1d(WeightRule::simpson, uniform_axis(3));
  CHECK(s3[0] == doctest::Approx(1.0 / 6.0));
  CHECK(s3[1] == doctest::Approx(4.0 / 6.0));
  CHECK(s3[2] == doctest::Approx(1.0 / 6.0));
  const double x2[] = {0.0, 0.25, 1.0};
  CHECK(s3[0] * x2[0] + s3[1] * x2[1] + s3[2] * x2[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(newton_cotes_weights_1d(WeightRule::boole, uniform_axis(4)), CompatibilityError);
  CHECK_THROWS_AS(newton_cotes_weights_1d(WeightRule::simpson, uniform_axis(4)), CompatibilityError);
  CHECK_THROWS(newton_cotes_weights_1d(WeightRule::simpson, periodic_axis(5)));

  const auto b9 = newton_cotes_weights_1d(WeightRule::boole, uniform_axis(9));
  const double h = 1.0 / 8.0;
  const double pattern[] = {7, 32, 12, 32, 14, 32, 12, 32, 7};
  for (std::size_t i = 0; i < 9; ++i) CHECK(b9[i] == doctest::Approx(2.0 * h / 45.0 * pattern[i]));
}

TEST_CASE("property: rules integrate monomials up to their degree") {
  for (std::size_t n : {5u, 9u, 17u, 33u}) {
    const auto a = uniform_axis(n);
    const auto t = trapezoid_weights_1d(a);
    const auto s = newton_cotes_weights_1d(WeightRule::simpson, a);
    const auto b = newton_cotes_weights_1d(WeightRule::boole, a);
    for (int k = 0; k <= 1; ++k) CHECK(monomial_error(t, a, k) < 1e-14);
    for (int k = 0; k <= 3; ++k) CHECK(monomial_error(s, a, k) < 1e-14);
    for (int k = 0; k <= 5; ++k) CHECK(monomial_error(b, a, k) < 1e-14);
    CHECK(monomial_error(t, a, 2) > 1e-6);
    CHECK(monomial_error(s, a, 4) > 1e-9);
  }
}

TEST_CASE("control-volume weights") {
  const auto w = control_volume_weights_1d(nonuniform_axis(CustomCoords{{0.0, 0.1, 0.5, 1.0}}, 0));
  CHECK(w[0] == doctest::Approx(0.05));
  CHECK(w[1] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.45));
  CHECK(w[3] == doctest::Approx(0.25));
  CHECK(sum(w) == doctest::Approx(1.0));
  CHECK(control_volume_weights_1d(uniform_axis(3)) == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(std::abs(sum(control_volume_weights_1d(nonuniform_axis(Chebyshev{}, 5))) - 1.0) < 1e-12);
}

TEST_CASE("natural rule follows the axis kind") {
  CHECK(natural_rule(uniform_axis(5)) == WeightRule::trapezoid);
  CHECK(natural_rule(periodic_axis(5)) == WeightRule::trapezoid);
  CHECK(natural_rule(nonuniform_axis(Chebyshev{}, 5)) == WeightRule::control_volume);
}

TEST_CASE("tensor-product weight fields") {
  const auto g = uniform_grid({3, 2});
  const auto wf = tensor_product_weights({{0.25, 0.5, 0.25}, {0.5, 0.5}}, g);
  CHECK(wf.weights.size() == 6);
  CHECK(wf.weights[0] == doctest::Approx(0.125));
  CHECK(wf.rule == WeightRule::mixed);

  const auto u = weight_field(uniform_grid({4, 5}), WeightRule::uniform);
  for (double v : u.weights) CHECK(v == doctest::Approx(1.0 / 20.0));

  const auto t = weight_field(uniform_grid({3, 3}), WeightRule::trapezoid);
  CHECK(t.weights[4] == doctest::Approx(0.25));
  CHECK(t.weights[0] == doctest::Approx(0.0625));
  CHECK(t.total() == doctest::Approx(1.0));

  CHECK_THROWS_AS(tensor_product_weights({{0.5, 0.5}}, g), ShapeError);
}

TEST_CASE("property: weight fields are positive, unit mass and factor") {
  test::Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.grid(3, 8);
    const auto wf = quadrature_weight_field(g);
    REQUIRE(wf.weights.size() == g.num_nodes());
    for (double v : wf.weights) CHECK(v > 0.0);
    CHECK(std::abs(wf.total() - 1.0) < 1e-12);
    // Outer-product oracle, last axis fastest.
    std::vector<double> expect{1.0};
    for (const auto& a : wf.per_axis) {
      std::vector<double> next;
      for (double e : expect) {
        for (double v : a) next.push_back(e * v);
      }
      expect = next;
    }
    CHECK(test::max_abs_diff(wf.weights, expect) < 1e-16);
  }
}

TEST_CASE("weight cache is shared and thread safe") {
  clear_weight_cache();
  const auto a = uniform_axis(65);
  const auto p1 = cached_weights_1d(WeightRule::trapezoid, a);
  const auto p2 = cached_weights_1d(WeightRule::trapezoid, a);
  CHECK(p1 == p2);
  CHECK(weight_cache_size() == 1);

  std::vector<std::thread> threads;
  std::vector<std::vector<double>> out(8);
  for (std::size_t t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] { out[t] = *cached_weights_1d(WeightRule::simpson, uniform_axis(17 + 2 * (t % 4))); });
  }
  for (auto& th : threads) th.join();
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(out[t] == newton_cotes_weights_1d(WeightRule::simpson, uniform_axis(17 + 2 * (t % 4))));
  }
  CHECK(weight_cache_size() == 5);
}
