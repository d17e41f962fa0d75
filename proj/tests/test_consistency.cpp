#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"

using namespace qnk;

TEST_CASE("comparison norm") {
  const auto g1 = uniform_grid({9, 9});
  const auto one = sample_field({FieldId::constant, 1.0}, g1);
  CHECK(comparison_norm(one, quadrature_weight_field(g1)) == doctest::Approx(1.0));

  const auto g2 = uniform_grid({2});
  const FieldTensor z(1, 1, g2, {1.0, -1.0});
  CHECK(comparison_norm(z, quadrature_weight_field(g2)) == doctest::Approx(1.0));

  const auto x = sample_field({FieldId::linear}, uniform_grid({3}));
  CHECK(comparison_norm(x, quadrature_weight_field(x.grid())) == doctest::Approx(0.6123724356957945).epsilon(1e-15));
}

TEST_CASE("statistic mismatch and bias") {
  const FieldSpec q{FieldId::quadratic1d};
  const auto g = uniform_grid({9});
  const auto m = statistic_mismatch(q, g, g, WeightRule::trapezoid, ReductionPattern::layer());
  CHECK(m.mean == 0.0);
  CHECK(m.variance == 0.0);
  const auto ab = statistic_mismatch(q, uniform_grid({9}), uniform_grid({17}), WeightRule::uniform,
                                     ReductionPattern::layer());
  const auto ba = statistic_mismatch(q, uniform_grid({17}), uniform_grid({9}), WeightRule::uniform,
                                     ReductionPattern::layer());
  CHECK(ab.mean == ba.mean);
  CHECK(ab.variance == ba.variance);
  CHECK(ab.mean > 0.0);
  CHECK(statistic_bias(q, uniform_grid({3}), WeightRule::uniform) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(statistic_bias(q, uniform_grid({3}), WeightRule::trapezoid) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
}

TEST_CASE("order estimate") {
  std::vector<std::pair<double, double>> quad;
  std::vector<std::pair<double, double>> lin;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    quad.emplace_back(h, 3.0 * h * h);
    lin.emplace_back(h, 0.7 * h);
  }
  CHECK(order_estimate(quad) == doctest::Approx(2.0));
  CHECK(order_estimate(lin) == doctest::Approx(1.0));
  const std::vector<std::pair<double, double>> few{{0.1, 1.0}, {0.05, 0.0}, {0.025, 0.1}};
  CHECK_THROWS_AS(order_estimate(few), DomainError);
}

TEST_CASE("first-order identity and endpoint perturbation") {
  const double x2[] = {0.0, 0.25, 1.0};
  const auto id = first_order_identity(x2);
  CHECK(id.lhs == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  CHECK(id.rhs == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  const double lin[] = {0.0, 0.5, 1.0};
  CHECK(first_order_identity(lin).lhs == doctest::Approx(0.0));
  const double c[] = {2.0, 2.0, 2.0, 2.0};
  CHECK(first_order_identity(c).rhs == 0.0);

  const auto ep = endpoint_perturbation(x2);
  CHECK(ep.exact == doctest::Approx(-1.0 / 24.0).epsilon(1e-14));
  CHECK(ep.closed_form == doctest::Approx(ep.exact).epsilon(1e-14));

  // |exact| decays at first order on x^2.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {17u, 33u, 65u, 129u, 257u}) {
    const auto x = sample_field({FieldId::quadratic1d}, uniform_grid({n}));
    pts.emplace_back(1.0 / (n - 1), std::abs(endpoint_perturbation(x.data()).exact));
  }
  CHECK(order_estimate(pts) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("property: first-order identity holds on random samples") {
  test::Gen gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = gen.normals(gen.size(3, 200), gen.uniform(-5.0, 5.0), gen.uniform(0.1, 3.0));
    const auto id = first_order_identity(v);
    CHECK(std::abs(id.lhs - id.rhs) <= 1e-13);
    const auto ep = endpoint_perturbation(v);
    CHECK(std::abs(ep.exact + id.lhs) <= 1e-13);
  }
}

TEST_CASE("periodic collapse") {
  test::Gen gen(42);
  CHECK(periodic_collapse_check(gen.field(periodic_grid({8, 8}), 2, 3), ReductionPattern::layer()) <= 1e-14);
  CHECK(periodic_collapse_check(gen.field(periodic_grid({4, 4}), 1, 4), ReductionPattern::group(2)) <= 1e-14);
  CHECK(periodic_collapse_check(sample_field({FieldId::constant, 2.0}, periodic_grid({5})), ReductionPattern::layer()) ==
        0.0);
  CHECK_THROWS(periodic_collapse_check(gen.field(uniform_grid({4, 4}), 1, 1), ReductionPattern::layer()));
}

TEST_CASE("statistic ladders separate the orders") {
  const std::vector<std::size_t> ladder{17, 33, 65, 129, 257};
  const FieldSpec q{FieldId::quadratic1d};
  const auto t = statistic_ladder(q, ladder, 1, WeightRule::trapezoid, ReductionPattern::layer(), Statistic::mean);
  const auto u = statistic_ladder(q, ladder, 1, WeightRule::uniform, ReductionPattern::layer(), Statistic::mean);
  CHECK(t.rungs.size() == 4);
  CHECK(t.fitted_order >= 1.75);
  CHECK(t.fitted_order <= 2.25);
  CHECK(u.fitted_order >= 0.8);
  CHECK(u.fitted_order <= 1.2);
  const std::vector<std::size_t> bad{33, 17};
  CHECK_THROWS_AS(statistic_ladder(q, bad, 1, WeightRule::trapezoid, ReductionPattern::layer(), Statistic::mean),
                  DomainError);
}

TEST_CASE("output ladders") {
  const FieldSpec f{FieldId::mixed2d};
  const auto g = uniform_grid({17, 17});
  CHECK(output_mismatch(f, NormSpec::quadnorm(), g, g, InterpMethod::bicubic) == 0.0);

  const std::vector<std::size_t> ladder{17, 33, 65, 129};
  const auto qn = output_ladder(f, NormSpec::quadnorm(), ladder, 2, InterpMethod::bicubic);
  const auto ln = output_ladder(f, NormSpec::layernorm(), ladder, 2, InterpMethod::bicubic);
  CHECK(qn.rungs.front().n_prime == 33);
  CHECK(qn.fitted_order >= 1.7);
  CHECK(qn.fitted_order <= 2.3);
  CHECK(ln.fitted_order >= 0.8);
  CHECK(ln.fitted_order <= 1.3);

  CHECK_THROWS_AS(output_mismatch({FieldId::constant, 1.0}, NormSpec::layernorm(), g, uniform_grid({33, 33}),
                                  InterpMethod::bicubic),
                  DegenerateFieldError);
}
