#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "gen.hpp"
#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/opsim.hpp"
#include "qnk/parallel.hpp"

using namespace qnk;

namespace {

// Recorded once from build_stack(StackSpec{}) and pinned since.
constexpr std::uint64_t kGoldenChecksum = 8385200754338129098ull;

StackSpec small_spec(NormSpec norm = NormSpec::none()) {
  StackSpec s;
  s.depth = 2;
  s.width = 8;
  s.modes = 4;
  s.norm = norm;
  return s;
}

bool spatially_constant(const FieldTensor& y, double tol) {
  for (std::size_t b = 0; b < y.batch(); ++b) {
    for (std::size_t c = 0; c < y.channels(); ++c) {
      const auto s = y.slice(b, c);
      for (double v : s) {
        if (std::abs(v - s[0]) > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("stack construction") {
  const auto a = build_stack(StackSpec{});
  const auto b = build_stack(StackSpec{});
  CHECK(parameter_checksum(a) == parameter_checksum(b));
  CHECK(parameter_checksum(a) == kGoldenChecksum);
  CHECK(a.blocks.size() == 4);
  CHECK(a.lift_W.rows() == 16);
  CHECK(a.proj1_W.rows() == static_cast<Eigen::Index>(kProjectionWidth));
  CHECK(a.blocks[0].R.size() == 36);
  for (const auto& R : a.blocks[1].R) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    CHECK(svd.singularValues()(0) == doctest::Approx(kSpectralNorm).epsilon(1e-12));
  }

  StackSpec other;
  other.seed = 8;
  CHECK(parameter_checksum(build_stack(other)) != parameter_checksum(a));

  // Deeper stacks extend shallower ones with the same seed.
  StackSpec deep;
  deep.depth = 8;
  const auto d = build_stack(deep);
  CHECK(d.blocks[3].W == a.blocks[3].W);
  CHECK(d.lift_W == a.lift_W);

  StackSpec bad;
  bad.depth = 0;
  CHECK_THROWS(build_stack(bad));
  bad = StackSpec{};
  bad.width = 0;
  CHECK_THROWS(build_stack(bad));
}

TEST_CASE("forward pass shapes and guards") {
  const auto stack = build_stack(small_spec());
  const auto x = sample_field({FieldId::mixed2d}, uniform_grid({17, 17}));
  const auto tr = forward_trace(stack, x);
  CHECK(tr.output.channels() == 1);
  CHECK(tr.output.grid() == x.grid());
  CHECK(tr.hidden.size() == 2);
  CHECK(tr.hidden[0].channels() == 8);
  CHECK_THROWS_AS(forward(stack, sample_field({FieldId::mixed2d}, uniform_grid({5, 5}))), DomainError);
  CHECK_THROWS(forward(stack, sample_field({FieldId::quadratic1d}, uniform_grid({17}))));
}

TEST_CASE("constant inputs give spatially constant outputs") {
  // The lift sees the coordinate channels, so the property only holds once
  // their weights are zeroed; every later stage must then preserve constants.
  const auto g = uniform_grid({17, 17});
  const auto zero = sample_field({FieldId::constant, 0.0}, g);
  const auto c = sample_field({FieldId::constant, 0.7}, g);
  for (const auto& norm : {NormSpec::none(), NormSpec::layernorm(), NormSpec::quadnorm(), NormSpec::blend(0.3),
                           NormSpec::with(NormMethod::rmsnorm), NormSpec::quadnorm(ReductionPattern::instance())}) {
    auto stack = build_stack(small_spec(norm));
    CHECK_FALSE(spatially_constant(forward(stack, c), 1e-10));
    stack.lift_W.rightCols(2).setZero();
    CHECK(spatially_constant(forward(stack, zero), 1e-10));
    CHECK(spatially_constant(forward(stack, c), 1e-10));
  }
}

TEST_CASE("linear mixing alone converges at second order") {
  StackSpec s = small_spec();
  s.activation = Activation::identity;
  s.residual_gain.reset();
  const auto stack = build_stack(s);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {17u, 33u, 65u}) {
    const auto r = transfer_discrepancy(stack, {FieldId::mixed2d}, cube_grid(n, 2), cube_grid(2 * n - 1, 2),
                                        InterpMethod::bicubic);
    for (double v : r.per_layer) CHECK(std::isfinite(v));
    pts.emplace_back(r.h, r.discrepancy);
  }
  CHECK(order_estimate(pts) >= 1.7);
}

TEST_CASE("forward is deterministic across thread counts") {
  const auto stack = build_stack(small_spec(NormSpec::quadnorm()));
  const auto x = sample_field({FieldId::bump2d}, uniform_grid({33, 33}));
  FieldTensor y1;
  FieldTensor y8;
  {
    ScopedThreadCount t(1);
    y1 = forward(stack, x);
  }
  {
    ScopedThreadCount t(8);
    y8 = forward(stack, x);
  }
  CHECK(test::max_abs_diff(y1.data(), y8.data()) == 0.0);
  CHECK(test::max_abs_diff(y1.data(), forward(stack, x).data()) == 0.0);
}

TEST_CASE("transfer discrepancy") {
  const auto stack = build_stack(small_spec());
  const FieldSpec f{FieldId::mixed2d};
  const auto g = uniform_grid({17, 17});
  const auto same = transfer_discrepancy(stack, f, g, g, InterpMethod::bicubic);
  CHECK(same.discrepancy == 0.0);
  CHECK(same.per_layer.size() == 3);

  StackSpec one = small_spec();
  one.depth = 1;
  const auto r = transfer_discrepancy(build_stack(one), f, g, uniform_grid({65, 65}), InterpMethod::bicubic);
  CHECK(std::isfinite(r.discrepancy));
  CHECK(r.discrepancy > 0.0);
  CHECK(r.per_layer.back() == r.discrepancy);
}

TEST_CASE("norm=none discrepancy converges at second order") {
  StackSpec s = small_spec();
  s.width = 8;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {17u, 33u, 65u}) {
    const auto r = ensemble_discrepancy(s, 4, {FieldId::mixed2d}, cube_grid(n, 2), cube_grid(2 * n - 1, 2),
                                        InterpMethod::bicubic);
    pts.emplace_back(r.h, r.discrepancy);
  }
  const double p = order_estimate(pts);
  CHECK(p >= 1.7);
  CHECK(p <= 2.5);
}

TEST_CASE("gap and depth experiments") {
  ExperimentConfig cfg;
  cfg.stack = small_spec();
  cfg.stack.depth = 2;
  cfg.ensemble = 2;
  cfg.methods = {NormSpec::layernorm(), NormSpec::quadnorm(), NormSpec::none()};
  const auto gap = gap_scaling_experiment(cfg, 17, {17, 33, 65, 129});
  CHECK(gap.rows.size() == 12);
  CHECK(gap.fits.size() == 3);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(gap.rows[m * 4].discrepancy == 0.0);
    for (std::size_t k = 1; k < 4; ++k) CHECK(gap.rows[m * 4 + k].discrepancy >= gap.rows[m * 4 + k - 1].discrepancy);
  }

  const auto depth = depth_scaling_experiment(cfg, {1, 2, 4}, 17, 65);
  CHECK(depth.rows.size() == 9);
  for (const auto& f : depth.fits) {
    if (f.method == "none") CHECK(f.slope <= 1.2);
  }
  CHECK(member_seed(7, 0) != member_seed(7, 1));
  CHECK(member_seed(7, 3) == member_seed(7, 3));
}
