#include "qnk/opsim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/parallel.hpp"
#include "qnk/quadrature.hpp"

namespace qnk {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::gelu:
      return "gelu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "gelu") return Activation::gelu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

void StackSpec::validate() const {
  if (depth < 1) throw DomainError("stack depth must be >= 1");
  if (width < 1 || modes < 1 || in_channels < 1) throw DomainError("width, modes and in_channels must be >= 1");
  if (dim < 1 || dim > 3) throw DomainError("stack dimension must be 1, 2 or 3");
  norm.validate(width);
  if (residual_gain && !(residual_gain->alpha0 >= 0.0)) throw DomainError("alpha0 must be >= 0");
}

namespace {

std::size_t num_modes(const StackSpec& s) {
  std::size_t q = 1;
  for (std::size_t k = 0; k < s.dim; ++k) q *= s.modes;
  return q;
}

struct Gaussian {
  std::mt19937_64 engine;
  std::normal_distribution<double> dist{0.0, 1.0};

  Gaussian(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine.seed(seq);
  }

  Eigen::MatrixXd matrix(std::size_t r, std::size_t c, double scale) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * dist(engine);
    }
    return m;
  }
  Eigen::VectorXd vector(std::size_t n, double scale) { return matrix(n, 1, scale); }
};

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double activate(Activation a, double x) {
  switch (a) {
    case Activation::gelu:
      return gelu(x);
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      return x;
  }
  return x;
}

// Applies mats[k] along axis k of a row-major block of `shape`.
std::vector<double> tensor_apply(std::vector<double> cur, std::vector<std::size_t> shape,
                                 const std::vector<RowMat>& mats) {
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const RowMat& M = mats[k];
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t a = 0; a < k; ++a) outer *= shape[a];
    for (std::size_t a = k + 1; a < shape.size(); ++a) inner *= shape[a];
    const auto n_in = static_cast<Eigen::Index>(shape[k]);
    const auto n_out = M.rows();
    std::vector<double> next(outer * static_cast<std::size_t>(n_out) * inner);
    for (std::size_t o = 0; o < outer; ++o) {
      Eigen::Map<const RowMat> in(cur.data() + o * static_cast<std::size_t>(n_in) * inner, n_in,
                                  static_cast<Eigen::Index>(inner));
      Eigen::Map<RowMat> out(next.data() + o * static_cast<std::size_t>(n_out) * inner, n_out,
                             static_cast<Eigen::Index>(inner));
      out.noalias() = M * in;
    }
    shape[k] = static_cast<std::size_t>(n_out);
    cur = std::move(next);
  }
  return cur;
}

// Cosine basis phi_0 = 1, phi_k = sqrt(2) cos(k pi x) sampled on an axis (n x K).
RowMat cosine_basis(const Axis1D& axis, std::size_t K) {
  RowMat B(axis.size(), K);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      B(i, k) = k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(static_cast<double>(k) * std::numbers::pi * axis.coords[i]);
    }
  }
  return B;
}

}  // namespace

Stack build_stack(const StackSpec& spec) {
  spec.validate();
  Stack s;
  s.spec = spec;
  const std::size_t C = spec.width;
  const std::size_t cin = spec.in_channels + spec.dim;
  Gaussian head(spec.seed, 0);
  s.lift_W = head.matrix(C, cin, 1.0 / std::sqrt(static_cast<double>(cin)));
  s.lift_b = head.vector(C, 0.1);
  s.proj1_W = head.matrix(kProjectionWidth, C, 1.0 / std::sqrt(static_cast<double>(C)));
  s.proj1_b = head.vector(kProjectionWidth, 0.1);
  s.proj2_W = head.matrix(1, kProjectionWidth, 1.0 / std::sqrt(static_cast<double>(kProjectionWidth)));
  s.proj2_b = head.vector(1, 0.1);

  const std::size_t Q = num_modes(spec);
  for (std::size_t l = 0; l < spec.depth; ++l) {
    Gaussian g(spec.seed, l + 1);
    Block blk;
    blk.W = g.matrix(C, C, 1.0 / std::sqrt(static_cast<double>(C)));
    blk.b = g.vector(C, 0.1);
    for (std::size_t q = 0; q < Q; ++q) {
      Eigen::MatrixXd R = g.matrix(C, C, 1.0 / std::sqrt(static_cast<double>(C)));
      const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues()(0);
      if (sigma > 0.0) R *= kSpectralNorm / sigma;
      blk.R.push_back(std::move(R));
    }
    s.blocks.push_back(std::move(blk));
  }
  return s;
}

std::uint64_t parameter_checksum(const Stack& s) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
        for (int byte = 0; byte < 8; ++byte) {
          h ^= (bits >> (8 * byte)) & 0xffU;
          h *= 1099511628211ULL;
        }
      }
    }
  };
  mix(s.lift_W);
  mix(s.lift_b);
  for (const auto& b : s.blocks) {
    mix(b.W);
    mix(b.b);
    for (const auto& r : b.R) mix(r);
  }
  mix(s.proj1_W);
  mix(s.proj1_b);
  mix(s.proj2_W);
  mix(s.proj2_b);
  return h;
}

ForwardResult forward_trace(const Stack& stack, const FieldTensor& x) {
  const StackSpec& spec = stack.spec;
  const GridSpec& grid = x.grid();
  if (grid.dim() != spec.dim) {
    throw ShapeError("stack expects " + std::to_string(spec.dim) + "D inputs, got " + std::to_string(grid.dim()) + "D");
  }
  if (x.channels() != spec.in_channels) throw ShapeError("input channel count does not match the stack");
  for (const auto& a : grid.axes()) {
    if (spec.modes > a.size() / 2) {
      throw DomainError("modes=" + std::to_string(spec.modes) + " exceeds floor(n/2) for an axis with " +
                        std::to_string(a.size()) + " nodes");
    }
  }

  const std::size_t C = spec.width;
  const std::size_t N = grid.num_nodes();
  const std::size_t d = grid.dim();
  const auto shape = grid.shape();
  const WeightField wf = quadrature_weight_field(grid);

  std::vector<RowMat> analysis;
  std::vector<RowMat> synthesis;
  for (std::size_t k = 0; k < d; ++k) {
    const RowMat B = cosine_basis(grid.axis(k), spec.modes);
    const auto& w = wf.per_axis[k];
    RowMat A = B.transpose();
    for (Eigen::Index i = 0; i < A.cols(); ++i) A.col(i) *= w[static_cast<std::size_t>(i)];
    analysis.push_back(std::move(A));
    synthesis.push_back(B);
  }
  std::vector<std::size_t> mode_shape(d, spec.modes);
  const std::size_t Q = num_modes(spec);

  // Coordinate channels.
  RowMat coords(d, N);
  {
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < d; ++k) coords(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          grid.axis(k).coords[idx[k]];
      for (std::size_t k = d; k-- > 0;) {
        if (++idx[k] < shape[k]) break;
        idx[k] = 0;
      }
    }
  }

  ForwardResult res;
  res.output = FieldTensor(x.batch(), 1, grid);
  for (std::size_t l = 0; l < spec.depth; ++l) res.hidden.emplace_back(x.batch(), C, grid);

  for (std::size_t b = 0; b < x.batch(); ++b) {
    RowMat inp(spec.in_channels + d, N);
    for (std::size_t c = 0; c < spec.in_channels; ++c) {
      auto s = x.slice(b, c);
      for (std::size_t i = 0; i < N; ++i) inp(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = s[i];
    }
    inp.bottomRows(static_cast<Eigen::Index>(d)) = coords;
    RowMat z = stack.lift_W * inp;
    z.colwise() += stack.lift_b;

    for (std::size_t l = 0; l < spec.depth; ++l) {
      const Block& blk = stack.blocks[l];
      RowMat coef(C, Q);
      for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> row(z.row(static_cast<Eigen::Index>(c)).begin(), z.row(static_cast<Eigen::Index>(c)).end());
        const auto a = tensor_apply(std::move(row), shape, analysis);
        for (std::size_t q = 0; q < Q; ++q) coef(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(q)) = a[q];
      }
      RowMat mixed(C, Q);
      for (std::size_t q = 0; q < Q; ++q) mixed.col(static_cast<Eigen::Index>(q)) = blk.R[q] * coef.col(static_cast<Eigen::Index>(q));

      RowMat t = blk.W * z;
      t.colwise() += blk.b;
      for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> row(mixed.row(static_cast<Eigen::Index>(c)).begin(),
                                mixed.row(static_cast<Eigen::Index>(c)).end());
        const auto sp = tensor_apply(std::move(row), mode_shape, synthesis);
        t.row(static_cast<Eigen::Index>(c)) += Eigen::Map<const Eigen::RowVectorXd>(sp.data(), static_cast<Eigen::Index>(N));
      }

      FieldTensor tf(1, C, grid, std::vector<double>(t.data(), t.data() + t.size()));
      tf = apply_norm(tf, spec.norm);
      for (double& v : tf.storage()) v = activate(spec.activation, v);

      FieldTensor zf(1, C, grid, std::vector<double>(z.data(), z.data() + z.size()));
      if (spec.residual_gain) {
        zf = residual_gain(zf, tf, spec.residual_gain->alpha0, spec.residual_gain->epsilon, wf.weights);
      } else {
        zf = std::move(tf);
      }
      z = Eigen::Map<const RowMat>(zf.data().data(), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(N));
      std::copy(zf.data().begin(), zf.data().end(), res.hidden[l].data().begin() + static_cast<std::ptrdiff_t>(b * C * N));
    }

    RowMat hdn = stack.proj1_W * z;
    hdn.colwise() += stack.proj1_b;
    hdn = hdn.unaryExpr([](double v) { return gelu(v); });
    RowMat out = stack.proj2_W * hdn;
    out.colwise() += stack.proj2_b;
    auto dst = res.output.slice(b, 0);
    for (std::size_t i = 0; i < N; ++i) dst[i] = out(0, static_cast<Eigen::Index>(i));
  }
  return res;
}

FieldTensor forward(const Stack& stack, const FieldTensor& x) { return forward_trace(stack, x).output; }

namespace {

double diff_norm(const FieldTensor& a, const FieldTensor& b_on_a, const WeightField& w) {
  std::vector<double> d(a.data().size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] - b_on_a.data()[i];
  return comparison_norm(a.with_data(std::move(d)), w);
}

TransferReport compare_traces(const ForwardResult& th, const ForwardResult& thp, const GridSpec& h_grid,
                              const GridSpec& hp_grid, InterpMethod method) {
  const WeightField w = quadrature_weight_field(h_grid);
  TransferReport rep;
  rep.h = h_grid.max_spacing();
  rep.h_prime = hp_grid.max_spacing();
  for (std::size_t l = 0; l < th.hidden.size(); ++l) {
    rep.per_layer.push_back(diff_norm(th.hidden[l], interpolate(thp.hidden[l], h_grid, method), w));
  }
  rep.discrepancy = diff_norm(th.output, interpolate(thp.output, h_grid, method), w);
  rep.per_layer.push_back(rep.discrepancy);
  return rep;
}

FieldTensor stack_input(const Stack& stack, const FieldSpec& field, const GridSpec& grid) {
  return sample_field(field, grid, stack.spec.in_channels);
}

TransferReport mean_reports(const std::vector<TransferReport>& reps) {
  TransferReport m = reps.front();
  const double k = static_cast<double>(reps.size());
  for (std::size_t i = 1; i < reps.size(); ++i) {
    m.discrepancy += reps[i].discrepancy;
    for (std::size_t l = 0; l < m.per_layer.size(); ++l) m.per_layer[l] += reps[i].per_layer[l];
  }
  m.discrepancy /= k;
  for (double& v : m.per_layer) v /= k;
  m.per_layer.back() = m.discrepancy;
  return m;
}

}  // namespace

TransferReport transfer_discrepancy(const Stack& stack, const FieldSpec& field, const GridSpec& h_grid,
                                    const GridSpec& hp_grid, InterpMethod method) {
  const auto th = forward_trace(stack, stack_input(stack, field, h_grid));
  if (h_grid == hp_grid) return compare_traces(th, th, h_grid, hp_grid, method);
  const auto thp = forward_trace(stack, stack_input(stack, field, hp_grid));
  return compare_traces(th, thp, h_grid, hp_grid, method);
}

std::uint64_t member_seed(std::uint64_t base, std::size_t k) {
  // splitmix64 finalizer over (base, k)
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TransferReport ensemble_discrepancy(const StackSpec& spec, std::size_t ensemble, const FieldSpec& field,
                                    const GridSpec& h_grid, const GridSpec& hp_grid, InterpMethod method) {
  if (ensemble < 1) throw DomainError("ensemble size must be >= 1");
  std::vector<TransferReport> reps(ensemble);
  parallel_for(ensemble, [&](std::size_t k) {
    StackSpec s = spec;
    s.seed = member_seed(spec.seed, k);
    reps[k] = transfer_discrepancy(build_stack(s), field, h_grid, hp_grid, method);
  });
  return mean_reports(reps);
}

namespace {

ScalingFit fit_loglog(const std::string& method, const std::vector<std::pair<double, double>>& pts) {
  ScalingFit f;
  f.method = method;
  std::vector<std::pair<double, double>> use;
  for (const auto& p : pts) {
    if (p.first > 0.0 && p.second > 0.0) use.push_back(p);
  }
  if (use.size() < 2) return f;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : use) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= static_cast<double>(use.size());
  my /= static_cast<double>(use.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : use) {
    sxy += (std::log(x) - mx) * (std::log(y) - my);
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
  }
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = std::exp(my - f.slope * mx);
  return f;
}

}  // namespace

ScalingReport gap_scaling_experiment(const ExperimentConfig& cfg, std::size_t source_n,
                                     const std::vector<std::size_t>& target_ns) {
  const std::size_t d = cfg.stack.dim;
  const GridSpec src = cube_grid(source_n, d);
  for (std::size_t t : target_ns) {
    if (t < source_n || (t - 1) % (source_n - 1) != 0) {
      throw DomainError("gap targets must refine the source grid: " + std::to_string(t) + " vs " +
                        std::to_string(source_n));
    }
  }
  ScalingReport rep;
  for (const auto& norm : cfg.methods) {
    StackSpec s = cfg.stack;
    s.norm = norm;
    const std::size_t E = cfg.ensemble;
    const std::size_t T = target_ns.size();
    std::vector<double> disc(E * T, 0.0);
    parallel_for(E, [&](std::size_t k) {
      StackSpec sk = s;
      sk.seed = member_seed(s.seed, k);
      const Stack st = build_stack(sk);
      const auto th = forward_trace(st, stack_input(st, cfg.field, src));
      for (std::size_t j = 0; j < T; ++j) {
        const GridSpec tg = cube_grid(target_ns[j], d);
        if (tg == src) {
          disc[k * T + j] = 0.0;
          continue;
        }
        const auto tt = forward_trace(st, stack_input(st, cfg.field, tg));
        disc[k * T + j] = compare_traces(th, tt, src, tg, cfg.interp).discrepancy;
      }
    });
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < T; ++j) {
      double m = 0.0;
      for (std::size_t k = 0; k < E; ++k) m += disc[k * T + j];
      m /= static_cast<double>(E);
      const double r = static_cast<double>(target_ns[j] - 1) / static_cast<double>(source_n - 1);
      rep.rows.push_back({norm.describe(), s.depth, r, 1.0 / static_cast<double>(source_n - 1),
                          1.0 / static_cast<double>(target_ns[j] - 1), m});
      if (r > 1.0) pts.emplace_back(r, m);
    }
    rep.fits.push_back(fit_loglog(norm.describe(), pts));
  }
  return rep;
}

ScalingReport depth_scaling_experiment(const ExperimentConfig& cfg, const std::vector<std::size_t>& depths,
                                       std::size_t n, std::size_t n_prime) {
  const std::size_t d = cfg.stack.dim;
  const GridSpec g = cube_grid(n, d);
  const GridSpec gp = cube_grid(n_prime, d);
  ScalingReport rep;
  for (std::size_t L : depths) {
    if (L < 1) throw DomainError("depths must be >= 1");
  }
  for (const auto& norm : cfg.methods) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t L : depths) {
      StackSpec s = cfg.stack;
      s.norm = norm;
      s.depth = L;
      const auto r = ensemble_discrepancy(s, cfg.ensemble, cfg.field, g, gp, cfg.interp);
      const double ratio = static_cast<double>(n_prime - 1) / static_cast<double>(n - 1);
      rep.rows.push_back({norm.describe(), L, ratio, r.h, r.h_prime, r.discrepancy});
      pts.emplace_back(static_cast<double>(L), r.discrepancy);
    }
    rep.fits.push_back(fit_loglog(norm.describe(), pts));
  }
  return rep;
}

}  // namespace qnk
