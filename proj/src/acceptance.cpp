#include "qnk/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/meshbias.hpp"
#include "qnk/normalize.hpp"
#include "qnk/opsim.hpp"
#include "qnk/parallel.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/resample.hpp"
#include "qnk/statkit.hpp"
#include "qnk/stats.hpp"

namespace qnk {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) { row_strings(header); }

  template <typename... T>
  void row(const T&... cells) {
    std::vector<std::string> v{cell(cells)...};
    row_strings(v);
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }

  template <typename C>
  void row_strings(const C& cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
  }
  std::ostringstream os_;
};

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t criterion) { return std::mt19937_64(derive_seed(seed, criterion)); }

double uniform01(std::mt19937_64& g) { return std::uniform_real_distribution<double>(0.0, 1.0)(g); }

std::size_t pick(std::mt19937_64& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

std::string kinds_of(const GridSpec& g) {
  std::string s;
  for (const auto& a : g.axes()) {
    if (!s.empty()) s += '|';
    s += std::string(to_string(a.kind)) + ":" + std::to_string(a.size());
  }
  return s;
}

const std::vector<std::size_t> kLadder{17, 33, 65, 129, 257};

CriterionResult make_result(int id, const char* name) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  return r;
}

// ---------------------------------------------------------------- 1
CriterionResult mass_exactness(std::uint64_t seed) {
  CriterionResult r = make_result(1, "mass-exactness");
  r.time_limit = 1.0;
  auto g = rng_for(seed, 1);
  Csv csv{"case", "grid", "rule", "kind", "error"};
  double worst_mass = 0.0;
  double worst_exact = 0.0;

  for (std::size_t c = 0; c < 50; ++c) {
    const std::size_t dim = 1 + c % 3;
    std::vector<Axis1D> axes;
    for (std::size_t k = 0; k < dim; ++k) {
      switch (pick(g, 0, 4)) {
        case 0:
          axes.push_back(uniform_axis(pick(g, 2, 33)));
          break;
        case 1:
          axes.push_back(periodic_axis(pick(g, 1, 33)));
          break;
        case 2:
          axes.push_back(nonuniform_axis(BoundaryRefined{4.0 * uniform01(g)}, pick(g, 3, 33)));
          break;
        case 3:
          axes.push_back(nonuniform_axis(Chebyshev{}, pick(g, 3, 33)));
          break;
        default: {
          const std::size_t n = pick(g, 3, 20);
          std::vector<double> x{0.0};
          double acc = 0.0;
          std::vector<double> gaps(n - 1);
          for (auto& v : gaps) {
            v = 0.05 + uniform01(g);
            acc += v;
          }
          double run = 0.0;
          for (std::size_t i = 0; i + 2 < n; ++i) {
            run += gaps[i];
            x.push_back(run / acc);
          }
          x.push_back(1.0);
          axes.push_back(nonuniform_axis(CustomCoords{x}, 0));
        }
      }
    }
    const GridSpec grid(axes);
    std::vector<WeightRule> rules{WeightRule::uniform, WeightRule::control_volume};
    const bool has_nonuniform = !std::all_of(grid.axes().begin(), grid.axes().end(),
                                             [](const Axis1D& a) { return a.kind != AxisKind::nonuniform; });
    if (!has_nonuniform) rules.push_back(WeightRule::trapezoid);
    if (grid.all_of_kind(AxisKind::uniform_endpoint)) {
      bool simpson_ok = true;
      bool boole_ok = true;
      for (const auto& a : grid.axes()) {
        simpson_ok = simpson_ok && a.size() >= 3 && (a.size() - 1) % 2 == 0;
        boole_ok = boole_ok && a.size() >= 5 && (a.size() - 1) % 4 == 0;
      }
      if (simpson_ok) rules.push_back(WeightRule::simpson);
      if (boole_ok) rules.push_back(WeightRule::boole);
    }
    for (auto rule : rules) {
      const double err = std::fabs(weight_field(grid, rule).total() - grid.domain_measure());
      worst_mass = std::max(worst_mass, err);
      csv.row(c, kinds_of(grid), std::string(to_string(rule)), "mass", err);
    }
  }

  // Polynomial exactness: degree 1 / 3 / 5 for trapezoid / Simpson / Boole, as
  // products of per-axis polynomials on compatible uniform grids.
  const std::pair<WeightRule, std::size_t> exact_rules[] = {
      {WeightRule::trapezoid, 1}, {WeightRule::simpson, 3}, {WeightRule::boole, 5}};
  for (std::size_t c = 0; c < 50; ++c) {
    const std::size_t dim = 1 + c % 2;
    for (const auto& [rule, deg] : exact_rules) {
      const std::size_t panel = rule == WeightRule::boole ? 4 : (rule == WeightRule::simpson ? 2 : 1);
      std::vector<std::size_t> ns;
      for (std::size_t k = 0; k < dim; ++k) ns.push_back(panel * pick(g, 1, 8) + 1);
      const GridSpec grid = uniform_grid(ns);
      std::vector<std::vector<double>> coef(dim, std::vector<double>(deg + 1));
      double exact = 1.0;
      for (auto& cv : coef) {
        double e = 0.0;
        for (std::size_t p = 0; p <= deg; ++p) {
          cv[p] = 2.0 * uniform01(g) - 1.0;
          e += cv[p] / static_cast<double>(p + 1);
        }
        exact *= e;
      }
      const WeightField w = weight_field(grid, rule);
      double est = 0.0;
      std::vector<std::size_t> idx(dim, 0);
      for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
        double f = 1.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double x = grid.axis(k).coords[idx[k]];
          double p = 0.0;
          for (std::size_t q = deg + 1; q-- > 0;) p = p * x + coef[k][q];
          f *= p;
        }
        est += w.weights[i] * f;
        for (std::size_t k = dim; k-- > 0;) {
          if (++idx[k] < ns[k]) break;
          idx[k] = 0;
        }
      }
      const double err = std::fabs(est / w.total() - exact);
      worst_exact = std::max(worst_exact, err);
      csv.row(c, kinds_of(grid), std::string(to_string(rule)), "exact_deg" + std::to_string(deg), err);
    }
  }
  r.values_ok = worst_mass <= 1e-12 && worst_exact <= 1e-12;
  r.detail = "max mass error " + short_num(worst_mass) + ", max exactness error " + short_num(worst_exact);
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 2
CriterionResult first_order(std::uint64_t seed) {
  CriterionResult r = make_result(2, "first-order-identity");
  auto g = rng_for(seed, 2);
  Csv csv{"case", "m", "lhs", "rhs", "abs_diff"};
  double worst = 0.0;
  for (std::size_t c = 0; c < 100; ++c) {
    const std::size_t m = 3 + (c * 37 + pick(g, 0, 62)) % 63;
    const double a0 = 2.0 * uniform01(g) - 1.0;
    const double a1 = 2.0 * uniform01(g) - 1.0;
    const double a2 = 2.0 * uniform01(g) - 1.0;
    const double a3 = 2.0 * uniform01(g) - 1.0;
    const double fr = 6.0 * uniform01(g);
    const double ph = 6.0 * uniform01(g);
    const double gr = 2.0 * uniform01(g) - 1.0;
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(m - 1);
      f[i] = a0 + a1 * x + a2 * std::sin(fr * x + ph) + a3 * std::exp(gr * x) / 3.0;
    }
    const auto id = first_order_identity(f);
    const double diff = std::fabs(id.lhs - id.rhs);
    worst = std::max(worst, diff);
    csv.row(c, m, id.lhs, id.rhs, diff);
  }
  const std::vector<double> sq{0.0, 0.25, 1.0};
  const auto id = first_order_identity(sq);
  const double anchor = std::max(std::fabs(id.lhs - 1.0 / 24.0), std::fabs(id.rhs - 1.0 / 24.0));
  csv.row("x2_m3", 3, id.lhs, id.rhs, anchor);
  r.values_ok = worst <= 1e-14 && anchor <= 1e-14;
  r.detail = "max |lhs-rhs| " + short_num(worst) + " over 100 fields; x^2 m=3 lhs " + short_num(id.lhs) + " rhs " +
             short_num(id.rhs);
  r.csv = csv.str();
  return r;
}

void ladder_rows(Csv& csv, const ConsistencyReport& rep) {
  for (const auto& rung : rep.rungs) {
    csv.row(rep.field, rep.quantity, rep.rule, rep.pattern, rung.n, rung.h, rung.n_prime, rung.h_prime, rung.mismatch);
  }
  csv.row(rep.field, rep.quantity, rep.rule, rep.pattern, "fit", "", "", "", rep.fitted_order);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

// ---------------------------------------------------------------- 3
CriterionResult order_separation(std::uint64_t) {
  CriterionResult r = make_result(3, "order-separation");
  r.time_limit = 5.0;
  Csv csv{"field", "quantity", "rule", "pattern", "n", "h", "n_prime", "h_prime", "mismatch"};
  bool ok = true;
  std::ostringstream detail;
  const std::pair<FieldId, std::size_t> cases[] = {{FieldId::quadratic1d, 1}, {FieldId::mixed2d, 2}};
  for (const auto& [id, dim] : cases) {
    const FieldSpec f{id, 1.0};
    const auto trap =
        statistic_ladder(f, kLadder, dim, WeightRule::trapezoid, ReductionPattern::layer(), Statistic::mean);
    const auto unif = statistic_ladder(f, kLadder, dim, WeightRule::uniform, ReductionPattern::layer(), Statistic::mean);
    ladder_rows(csv, trap);
    ladder_rows(csv, unif);
    ok = ok && within(trap.fitted_order, 1.75, 2.25) && within(unif.fitted_order, 0.8, 1.2);
    detail << to_string(id) << " trapezoid " << short_num(trap.fitted_order) << " uniform "
           << short_num(unif.fitted_order) << "; ";
  }
  r.values_ok = ok;
  r.detail = detail.str();
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 4
CriterionResult output_order(std::uint64_t) {
  CriterionResult r = make_result(4, "output-order");
  r.time_limit = 10.0;
  Csv csv{"field", "quantity", "rule", "pattern", "n", "h", "n_prime", "h_prime", "mismatch"};
  const FieldSpec f{FieldId::mixed2d, 1.0};
  const auto qn = output_ladder(f, NormSpec::quadnorm(), kLadder, 2, InterpMethod::bicubic);
  const auto ln = output_ladder(f, NormSpec::layernorm(), kLadder, 2, InterpMethod::bicubic);
  ladder_rows(csv, qn);
  ladder_rows(csv, ln);
  r.values_ok = within(qn.fitted_order, 1.7, 2.3) && within(ln.fitted_order, 0.8, 1.3);
  r.detail = "quadnorm " + short_num(qn.fitted_order) + ", layernorm " + short_num(ln.fitted_order);
  r.csv = csv.str();
  return r;
}

FieldTensor random_field(std::mt19937_64& g, std::size_t B, std::size_t C, const GridSpec& grid) {
  FieldTensor x(B, C, grid);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (double& v : x.storage()) v = nd(g);
  return x;
}

double max_abs_diff(const FieldTensor& a, const FieldTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

// ---------------------------------------------------------------- 5
CriterionResult periodic_collapse(std::uint64_t seed) {
  CriterionResult r = make_result(5, "periodic-collapse");
  auto g = rng_for(seed, 5);
  Csv csv{"grid", "channels", "pattern", "stat_diff", "output_diff"};
  double worst = 0.0;
  struct Case {
    std::vector<std::size_t> ns;
    std::size_t C;
    ReductionPattern p;
  };
  const std::vector<Case> cases{
      {{8, 8}, 1, ReductionPattern::layer()},    {{8, 8}, 3, ReductionPattern::instance()},
      {{4, 4}, 4, ReductionPattern::group(2)},   {{32}, 2, ReductionPattern::layer()},
      {{16, 16}, 8, ReductionPattern::layer()},  {{4, 4, 4}, 2, ReductionPattern::instance()},
      {{64, 32}, 4, ReductionPattern::group(4)}, {{5, 7}, 6, ReductionPattern::group(3)},
  };
  for (const auto& c : cases) {
    const GridSpec grid = periodic_grid(c.ns);
    const FieldTensor x = random_field(g, 2, c.C, grid);
    const double sd = periodic_collapse_check(x, c.p);
    double od = 0.0;
    if (c.p.kind == ReductionPattern::Kind::layer) {
      od = max_abs_diff(quadnorm_forward(x, c.p, NormSpec::quadnorm()), baseline_forward(x, NormMethod::layernorm, {}));
    } else if (c.p.kind == ReductionPattern::Kind::instance) {
      od = max_abs_diff(quadnorm_forward(x, c.p, NormSpec::quadnorm(c.p)),
                        baseline_forward(x, NormMethod::instancenorm, {}));
    } else {
      NormSpec gs = NormSpec::with(NormMethod::groupnorm);
      gs.groups = c.p.groups;
      od = max_abs_diff(quadnorm_forward(x, c.p, NormSpec::quadnorm(c.p)), baseline_forward(x, NormMethod::groupnorm, gs));
    }
    worst = std::max({worst, sd, od});
    csv.row(kinds_of(grid), c.C, c.p.name(), sd, od);
  }
  r.values_ok = worst <= 1e-14;
  r.detail = "max difference " + short_num(worst);
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 6
CriterionResult blend_law(std::uint64_t seed) {
  CriterionResult r = make_result(6, "blend-endpoints-mixture");
  auto g = rng_for(seed, 6);
  Csv csv{"case", "kind", "alpha", "mean_err", "var_err"};
  double worst_end = 0.0;
  double worst_mix = 0.0;
  for (std::size_t c = 0; c < 10; ++c) {
    const GridSpec grid = uniform_grid({pick(g, 3, 24), pick(g, 3, 24)});
    const FieldTensor x = random_field(g, 2, pick(g, 1, 4), grid);
    const double d1 = max_abs_diff(blendquadnorm_forward(x, 1.0, NormSpec::blend(1.0)),
                                   baseline_forward(x, NormMethod::layernorm, {}));
    const double d0 = max_abs_diff(blendquadnorm_forward(x, 0.0, NormSpec::blend(0.0)),
                                   quadnorm_forward(x, ReductionPattern::layer(), NormSpec::quadnorm()));
    worst_end = std::max({worst_end, d1, d0});
    csv.row(c, "endpoint_alpha1", 1.0, d1, 0.0);
    csv.row(c, "endpoint_alpha0", 0.0, d0, 0.0);
  }
  for (std::size_t c = 0; c < 100; ++c) {
    const std::size_t dim = 1 + c % 2;
    std::vector<std::size_t> ns;
    for (std::size_t k = 0; k < dim; ++k) ns.push_back(pick(g, 2, 12));
    const GridSpec grid = uniform_grid(ns);
    const std::size_t C = pick(g, 1, 4);
    const FieldTensor x = random_field(g, 1, C, grid);
    std::vector<std::vector<double>> per_axis;
    for (std::size_t n : ns) {
      std::vector<double> w(n);
      for (auto& v : w) v = 0.1 + uniform01(g);
      per_axis.push_back(w);
    }
    const WeightField wf = tensor_product_weights(per_axis, grid);
    const double alpha = static_cast<double>(c % 11) / 10.0;
    const auto layer = ReductionPattern::layer();
    const Moments mb = blend_moments(uniform_moments(x, layer), weighted_moments(x, wf, layer), alpha);

    // Brute force under the mixture distribution p_b = alpha p_LN + (1 - alpha) p_WLN.
    const std::size_t N = grid.num_nodes();
    double wsum = 0.0;
    for (double v : wf.weights) wsum += v;
    std::vector<double> p(C * N);
    for (std::size_t ch = 0; ch < C; ++ch) {
      for (std::size_t i = 0; i < N; ++i) {
        p[ch * N + i] = alpha / static_cast<double>(C * N) + (1.0 - alpha) * wf.weights[i] / (static_cast<double>(C) * wsum);
      }
    }
    double mu = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) mu += p[k] * x.data()[k];
    double var = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) var += p[k] * (x.data()[k] - mu) * (x.data()[k] - mu);
    const double em = std::fabs(mb.mean[0] - mu);
    const double ev = std::fabs(mb.variance[0] - var);
    worst_mix = std::max({worst_mix, em, ev});
    csv.row(c, "mixture", alpha, em, ev);
  }
  r.values_ok = worst_end <= 1e-14 && worst_mix <= 1e-12;
  r.detail = "endpoint max diff " + short_num(worst_end) + ", mixture max err " + short_num(worst_mix);
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 7
CriterionResult rule_ablation(std::uint64_t) {
  CriterionResult r = make_result(7, "rule-ablation");
  Csv csv{"field", "quantity", "rule", "pattern", "n", "h", "n_prime", "h_prime", "mismatch"};
  bool ok = true;
  std::ostringstream detail;
  struct Case {
    FieldId id;
    std::size_t dim;
    Statistic stat;
  };
  // Polynomial fields are integrated exactly by Simpson and Boole, and on the
  // main ladder Boole hits round-off by n=129, so this uses a coarser ladder.
  const Case cases[] = {{FieldId::exp1d, 1, Statistic::mean}, {FieldId::exp1d, 1, Statistic::variance}};
  const std::size_t ladder[] = {5, 9, 17, 33, 65};
  for (const auto& c : cases) {
    const FieldSpec f{c.id, 1.0};
    const auto layer = ReductionPattern::layer();
    const auto trap = statistic_ladder(f, ladder, c.dim, WeightRule::trapezoid, layer, c.stat);
    const auto simp = statistic_ladder(f, ladder, c.dim, WeightRule::simpson, layer, c.stat);
    const auto boole = statistic_ladder(f, ladder, c.dim, WeightRule::boole, layer, c.stat);
    ladder_rows(csv, trap);
    ladder_rows(csv, simp);
    ladder_rows(csv, boole);
    ok = ok && simp.fitted_order >= trap.fitted_order - 0.1 && boole.fitted_order >= trap.fitted_order - 0.1;
    detail << to_string(c.id) << "/" << trap.quantity << " trap " << short_num(trap.fitted_order) << " simpson "
           << short_num(simp.fitted_order) << " boole " << short_num(boole.fitted_order) << "; ";
  }
  r.values_ok = ok;
  r.detail = detail.str();
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 8
CriterionResult mesh_bias(std::uint64_t) {
  CriterionResult r = make_result(8, "mesh-bias");
  Csv csv{"field", "strength", "n", "ratio", "reference", "uniform_estimate", "weighted_estimate", "uniform_bias",
          "weighted_bias", "reduction"};
  const FieldSpec f{FieldId::bump2d, 1.0};
  auto add = [&](const BiasReport& b) {
    csv.row("bump2d", b.strength, b.n, b.nonuniformity_ratio, b.reference_mean, b.uniform_estimate, b.weighted_estimate,
            b.uniform_bias, b.weighted_bias, b.reduction_factor);
  };
  auto report = [&](std::size_t n) {
    BiasReport b = bias_report(f, mesh_grid(MeshFamily::boundary_refined, 3.0, n, 2));
    b.strength = 3.0;
    add(b);
    return b;
  };
  const BiasReport b64 = report(64);
  const BiasReport b129 = report(129);
  const BiasReport b257 = report(257);
  for (const auto& b : bias_sweep(f, MeshFamily::boundary_refined, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, 64)) add(b);

  const double plateau = std::fabs(b257.uniform_bias - b129.uniform_bias) / b129.uniform_bias;
  const double shrink = b129.weighted_bias / b257.weighted_bias;
  r.values_ok = b64.reduction_factor >= 100.0 && plateau < 0.1 && shrink >= 2.0;
  r.detail = "64^2 reduction " + short_num(b64.reduction_factor) + ", uniform-bias change 129->257 " +
             short_num(100.0 * plateau) + "%, weighted-bias shrink " + short_num(shrink) + "x";
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 9
CriterionResult transfer_scaling(std::uint64_t seed) {
  CriterionResult r = make_result(9, "transfer-scaling");
  r.time_limit = 60.0;
  Csv csv{"experiment", "method", "L", "r", "h", "h_prime", "discrepancy"};
  ExperimentConfig cfg;
  cfg.stack.seed = seed;
  cfg.stack.width = 16;
  cfg.stack.modes = 6;
  cfg.stack.depth = 4;
  cfg.ensemble = 8;
  cfg.methods = {NormSpec::layernorm(), NormSpec::quadnorm()};

  // (a) gap
  const auto gap = gap_scaling_experiment(cfg, 33, {33, 65, 129, 257});
  std::map<double, std::pair<double, double>> by_r;
  for (const auto& row : gap.rows) {
    csv.row("gap", row.method, row.depth, row.ratio, row.h, row.h_prime, row.discrepancy);
    auto& slot = by_r[row.ratio];
    (row.method == "layernorm" ? slot.first : slot.second) = row.discrepancy;
  }
  for (const auto& fit : gap.fits) csv.row("gap_fit", fit.method, cfg.stack.depth, "slope", fit.slope, "intercept", fit.intercept);
  bool a_ok = true;
  for (const auto& [ratio, d] : by_r) {
    if (ratio >= 4.0) a_ok = a_ok && d.second <= d.first;
  }
  double ln_int = 0.0;
  double qn_int = 0.0;
  for (const auto& fit : gap.fits) (fit.method == "layernorm" ? ln_int : qn_int) = fit.intercept;

  // (b) depth
  const auto depth = depth_scaling_experiment(cfg, {1, 2, 4, 8}, 33, 129);
  std::map<std::size_t, std::pair<double, double>> by_l;
  for (const auto& row : depth.rows) {
    csv.row("depth", row.method, row.depth, row.ratio, row.h, row.h_prime, row.discrepancy);
    auto& slot = by_l[row.depth];
    (row.method == "layernorm" ? slot.first : slot.second) = row.discrepancy;
  }
  for (const auto& fit : depth.fits) csv.row("depth_fit", fit.method, "", "exponent", fit.slope, "", "");
  const double ratio4 = by_l[4].first / by_l[4].second;
  const double ratio8 = by_l[8].first / by_l[8].second;
  const bool b_ok = ratio8 >= ratio4;

  // (c) norm=none order in h, pairs (n, 2n-1)
  StackSpec none = cfg.stack;
  none.norm = NormSpec::none();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {17, 33, 65, 129}) {
    const auto rep = ensemble_discrepancy(none, cfg.ensemble, cfg.field, cube_grid(n, 2), cube_grid(2 * n - 1, 2),
                                          cfg.interp);
    pts.emplace_back(rep.h, rep.discrepancy);
    csv.row("none_order", "none", none.depth, 2.0, rep.h, rep.h_prime, rep.discrepancy);
  }
  const double none_order = order_estimate(pts);
  csv.row("none_order_fit", "none", none.depth, "order", none_order, "", "");
  const bool c_ok = none_order >= 1.7;

  r.values_ok = a_ok && b_ok && c_ok;
  std::ostringstream d;
  d << "(a) qn<=ln at r>=4: " << (a_ok ? "yes" : "no") << ", intercept ratio " << short_num(ln_int / qn_int)
    << "; (b) ln/qn L=4 " << short_num(ratio4) << " -> L=8 " << short_num(ratio8) << "; (c) none order "
    << short_num(none_order);
  r.detail = d.str();
  r.csv = csv.str();
  return r;
}

// ---------------------------------------------------------------- 10
struct HolmCase {
  std::vector<double> p;
  std::vector<bool> expected;
};

// Decisions worked out by hand at alpha = 0.05.
const std::vector<HolmCase>& holm_cases() {
  static const std::vector<HolmCase> cases{
      {{0.01, 0.04}, {true, true}},
      {{0.03, 0.04}, {false, false}},
      {{0.0, 0.0, 0.0}, {true, true, true}},
      {{0.04, 0.01}, {true, true}},
      {{0.5}, {false}},
      {{0.05}, {true}},
      {{0.01, 0.02, 0.03}, {true, true, true}},
      {{0.01, 0.03, 0.04}, {true, false, false}},
      {{0.02, 0.01, 0.9}, {true, true, false}},
      {{0.001, 0.002, 0.003, 0.004}, {true, true, true, true}},
      {{0.013, 0.001, 0.5, 0.02}, {true, true, false, true}},
      {{0.0125, 0.0126, 0.2, 0.3}, {true, true, false, false}},
      {{0.013, 0.013, 0.013, 0.013}, {false, false, false, false}},
      {{1.0, 1.0, 1.0}, {false, false, false}},
      {{0.2, 0.001, 0.002, 0.003, 0.004}, {false, true, true, true, true}},
      {{0.011, 0.009, 0.02, 0.04, 0.045}, {true, true, false, false, false}},
      {{0.0, 1.0}, {true, false}},
      {{0.024, 0.026}, {true, true}},
      {{0.026, 0.024}, {true, true}},
      {{0.0099, 0.0124, 0.0166, 0.0249, 0.0499}, {true, true, true, true, true}},
  };
  return cases;
}

PairedSamples tost_table_samples() {
  // n = 10 paired errors whose differences have mean 0.0024 and sd 0.006.
  PairedSamples s;
  double sq = 0.0;
  for (int k = 0; k < 10; ++k) sq += (k - 4.5) * (k - 4.5);
  const double sd = std::sqrt(sq / 9.0);
  for (int k = 0; k < 10; ++k) {
    const double a = 5.0 + 0.1 * k;
    const double d = 0.0024 + 0.006 * (k - 4.5) / sd;
    s.a.push_back(a);
    s.b.push_back(a - d);
  }
  return s;
}

CriterionResult statkit_checks(std::uint64_t seed) {
  CriterionResult r = make_result(10, "statkit");
  Csv csv{"check", "case", "value", "extra1", "extra2"};
  bool holm_ok = true;
  for (std::size_t i = 0; i < holm_cases().size(); ++i) {
    const auto& c = holm_cases()[i];
    const auto got = holm_bonferroni(c.p, 0.05);
    const bool match = got == c.expected;
    holm_ok = holm_ok && match;
    std::string flags;
    for (bool b : got) flags += b ? 'R' : '-';
    csv.row("holm", i, match, flags, "");
  }

  const auto tost = tost_equivalence(tost_table_samples(), 0.5);
  csv.row("tost", "table_shape", tost.p_value, tost.ci_lo, tost.ci_hi);
  const bool tost_ok = tost.equivalent && tost.p_value < 1e-4;

  constexpr std::size_t kTrials = 200;
  constexpr std::size_t kN = 10;
  std::vector<int> covered(kTrials, 0);
  std::vector<std::pair<double, double>> cis(kTrials);
  for (std::size_t t = 0; t < kTrials; ++t) {
    std::mt19937_64 g(derive_seed(seed, 10'000 + t));
    std::normal_distribution<double> nd(0.0, 1.0);
    PairedSamples s;
    for (std::size_t i = 0; i < kN; ++i) {
      s.a.push_back(10.0 + nd(g));
      s.b.push_back(8.0 + nd(g));
    }
    const auto ci = bootstrap_improvement_ci(s, 10000, 0.95, derive_seed(seed, 20'000 + t));
    cis[t] = {ci.lo, ci.hi};
    covered[t] = ci.lo <= 0.2 && 0.2 <= ci.hi;
  }
  std::size_t hits = 0;
  for (std::size_t t = 0; t < kTrials; ++t) {
    hits += static_cast<std::size_t>(covered[t]);
    csv.row("bootstrap", t, covered[t] != 0, cis[t].first, cis[t].second);
  }
  const double coverage = static_cast<double>(hits) / static_cast<double>(kTrials);
  csv.row("bootstrap_coverage", "all", coverage, "", "");
  const bool boot_ok = coverage >= 0.90;

  r.values_ok = holm_ok && tost_ok && boot_ok;
  r.detail = std::string("holm ") + (holm_ok ? "20/20" : "mismatch") + ", tost p " + short_num(tost.p_value) +
             (tost.equivalent ? " (equivalent)" : " (not equivalent)") + ", bootstrap coverage " +
             short_num(100.0 * coverage) + "%";
  r.csv = csv.str();
  return r;
}

using CriterionFn = std::function<CriterionResult(std::uint64_t)>;

const std::vector<CriterionFn>& criteria() {
  static const std::vector<CriterionFn> fns{mass_exactness, first_order,     order_separation, output_order,
                                            periodic_collapse, blend_law,    rule_ablation,    mesh_bias,
                                            transfer_scaling, statkit_checks};
  return fns;
}

const char* const kNames[] = {"",          "mass-exactness", "first-order-identity", "order-separation",
                              "output-order", "periodic-collapse", "blend-endpoints-mixture", "rule-ablation",
                              "mesh-bias", "transfer-scaling", "statkit", "determinism"};

}  // namespace

std::string criterion_file_name(int id) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "c%02d_%s.csv", id, kNames[id]);
  return buf;
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  if (id < 1 || id > 10) throw DomainError("run_criterion handles criteria 1..10");
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = criteria()[static_cast<std::size_t>(id - 1)](seed);
  } catch (const std::exception& e) {
    r.id = id;
    r.name = kNames[id];
    r.values_ok = false;
    r.detail = std::string("error: ") + e.what();
    r.csv = "error\n";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.runtime_ok = r.time_limit <= 0.0 || r.seconds < r.time_limit;
  return r;
}

bool AcceptanceReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass(); });
}

std::string AcceptanceReport::summary_csv() const {
  std::ostringstream os;
  os << "id,name,values_ok\n";
  for (const auto& r : results) os << r.id << ',' << r.name << ',' << (r.values_ok ? 1 : 0) << '\n';
  return os.str();
}

AcceptanceReport run_acceptance(const AcceptanceOptions& opts) {
  AcceptanceReport rep;
  auto wanted = [&](int id) { return opts.only.empty() || opts.only.count(id) > 0; };
  for (int id = 1; id <= 10; ++id) {
    if (wanted(id)) rep.results.push_back(run_criterion(id, opts.seed));
  }

  if (wanted(11)) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = make_result(11, kNames[11]);
    Csv csv{"id", "threads1_equal", "threads8_equal"};
    bool ok = true;
    std::size_t compared = 0;
    for (int id = 1; id <= 10; ++id) {
      const CriterionResult* base = nullptr;
      for (const auto& x : rep.results) {
        if (x.id == id) base = &x;
      }
      std::string reference = base ? base->csv : run_criterion(id, opts.seed).csv;
      std::string one;
      std::string eight;
      {
        ScopedThreadCount tc(1);
        one = run_criterion(id, opts.seed).csv;
      }
      {
        ScopedThreadCount tc(8);
        eight = run_criterion(id, opts.seed).csv;
      }
      const bool e1 = one == reference;
      const bool e8 = eight == reference;
      ok = ok && e1 && e8;
      ++compared;
      csv.row(id, e1, e8);
    }
    r.values_ok = ok;
    r.detail = std::to_string(compared) + " artifacts byte-identical across reruns with 1 and 8 threads: " +
               (ok ? "yes" : "no");
    r.csv = csv.str();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.results.push_back(r);
  }

  if (!opts.output_dir.empty()) {
    std::filesystem::create_directories(opts.output_dir);
    for (const auto& r : rep.results) {
      std::ofstream os(std::filesystem::path(opts.output_dir) / criterion_file_name(r.id), std::ios::binary);
      os << r.csv;
    }
    std::ofstream os(std::filesystem::path(opts.output_dir) / "summary.csv", std::ios::binary);
    os << rep.summary_csv();
  }
  return rep;
}

std::string format_result_line(const CriterionResult& r) {
  std::ostringstream os;
  std::string detail = r.detail;
  while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
  os << (r.pass() ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << ": " << detail;
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.2f s", r.seconds);
  os << buf;
  if (r.time_limit > 0.0) {
    std::snprintf(buf, sizeof buf, ", limit %.0f s%s", r.time_limit, r.runtime_ok ? "" : ", EXCEEDED");
    os << buf;
  }
  os << ")";
  return os.str();
}

}  // namespace qnk
