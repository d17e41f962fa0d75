#include <doctest.h>

#include <cmath>

#include "qnk/error.hpp"
#include "qnk/meshbias.hpp"

using namespace qnk;

TEST_CASE("uniform meshes: first- against second-order bias") {
  // Point averages carry an O(h) endpoint term and trapezoid weights an O(h^2)
  // error, so the factor scales like 1/h rather than staying near 1.
  for (FieldId id : {FieldId::bump2d, FieldId::mixed2d}) {
    for (std::size_t n : {33u, 64u, 129u}) {
      const auto r = bias_report({id}, uniform_grid({n, n}));
      const double scaled = r.reduction_factor / (n - 1.0);
      CHECK(scaled >= 0.2);
      CHECK(scaled <= 5.0);
    }
  }
}

TEST_CASE("constant fields have no bias") {
  const auto r = bias_report({FieldId::constant, 3.0}, mesh_grid(MeshFamily::boundary_refined, 3.0, 32, 2));
  CHECK(r.uniform_bias == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.weighted_bias == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.reduction_factor == 1.0);
}

TEST_CASE("boundary-refined bump2d") {
  const auto r = bias_report({FieldId::bump2d}, mesh_grid(MeshFamily::boundary_refined, 3.0, 64, 2));
  CHECK(r.reduction_factor >= 100.0);
  CHECK(r.reference_mean == doctest::Approx(4.0 / 9.0));
  CHECK(r.uniform_bias == doctest::Approx(std::abs(r.uniform_estimate - r.reference_mean)));
}

TEST_CASE("strength sweep") {
  const FieldSpec f{FieldId::bump2d};
  const auto sweep = bias_sweep(f, MeshFamily::boundary_refined, {2.0, 0.0, 1.0, 3.0}, 64);
  REQUIRE(sweep.size() == 4);
  CHECK(sweep[0].strength == 0.0);
  CHECK(sweep[0].nonuniformity_ratio == doctest::Approx(1.0));
  const double base = sweep[0].weighted_bias;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].nonuniformity_ratio >= sweep[i - 1].nonuniformity_ratio);
    CHECK(sweep[i].uniform_bias >= sweep[i - 1].uniform_bias);
    CHECK(sweep[i].weighted_bias <= 10.0 * base);
  }
  CHECK_THROWS(bias_sweep(f, MeshFamily::boundary_refined, {-1.0}, 64));
}

TEST_CASE("chebyshev family") {
  const auto g = mesh_grid(MeshFamily::chebyshev, 0.0, 33, 2);
  CHECK(g.all_of_kind(AxisKind::nonuniform));
  const auto r = bias_report({FieldId::bump2d}, g);
  CHECK(r.weighted_bias < r.uniform_bias);
}
