#include "qnk/resample.hpp"

#include <cmath>
#include <map>

#include "qnk/error.hpp"
#include "qnk/parallel.hpp"

namespace qnk {

std::string_view to_string(InterpMethod m) { return m == InterpMethod::bilinear ? "bilinear" : "bicubic"; }

InterpMethod parse_interp_method(std::string_view name) {
  if (name == "bilinear" || name == "linear") return InterpMethod::bilinear;
  if (name == "bicubic" || name == "cubic") return InterpMethod::bicubic;
  throw DomainError("unknown interpolation method '" + std::string(name) + "'");
}

std::vector<double> InterpMatrix1D::apply(const std::vector<double>& v) const {
  if (v.size() != source_size) throw ShapeError("interpolation input has the wrong length");
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (const auto& [i, w] : rows[j]) out[j] += w * v[i];
  }
  return out;
}

namespace {

double keys(double s) {
  constexpr double a = -0.5;
  s = std::fabs(s);
  if (s <= 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
  if (s < 2.0) return ((a * s - 5.0 * a) * s + 8.0 * a) * s - 4.0 * a;
  return 0.0;
}

}  // namespace

InterpMatrix1D interpolation_matrix_1d(const Axis1D& source, const Axis1D& target, InterpMethod method) {
  const bool periodic = source.kind == AxisKind::periodic;
  if (source.kind != target.kind || source.kind == AxisKind::nonuniform) {
    throw InvalidGridError("interpolation needs both axes endpoint-inclusive uniform or both periodic, got " +
                           std::string(to_string(source.kind)) + " -> " + std::string(to_string(target.kind)));
  }
  const std::size_t ns = source.size();
  const std::size_t nt = target.size();
  InterpMatrix1D m;
  m.source_size = ns;
  m.rows.resize(nt);

  // Target j sits at source position num/den, computed exactly in integers.
  const std::size_t den = periodic ? nt : nt - 1;
  const std::size_t scale = periodic ? ns : ns - 1;

  for (std::size_t j = 0; j < nt; ++j) {
    const std::size_t num = j * scale;
    std::size_t i = num / den;
    double t = static_cast<double>(num % den) / static_cast<double>(den);
    if (!periodic && i >= ns - 1) {
      i = ns - 2;
      t = 1.0;
    }
    std::map<std::size_t, double> acc;
    auto add = [&](long idx, double w) {
      if (w == 0.0) return;
      const long n = static_cast<long>(ns);
      if (periodic) {
        acc[static_cast<std::size_t>(((idx % n) + n) % n)] += w;
      } else if (idx < 0) {
        if (ns >= 3) {
          acc[0] += 3.0 * w;
          acc[1] -= 3.0 * w;
          acc[2] += w;
        } else {
          acc[0] += 2.0 * w;
          acc[1] -= w;
        }
      } else if (idx > n - 1) {
        if (ns >= 3) {
          acc[ns - 1] += 3.0 * w;
          acc[ns - 2] -= 3.0 * w;
          acc[ns - 3] += w;
        } else {
          acc[1] += 2.0 * w;
          acc[0] -= w;
        }
      } else {
        acc[static_cast<std::size_t>(idx)] += w;
      }
    };
    const long il = static_cast<long>(i);
    if (t == 0.0) {
      add(il, 1.0);
    } else if (t == 1.0) {
      add(il + 1, 1.0);
    } else if (method == InterpMethod::bilinear) {
      add(il, 1.0 - t);
      add(il + 1, t);
    } else {
      add(il - 1, keys(t + 1.0));
      add(il, keys(t));
      add(il + 1, keys(1.0 - t));
      add(il + 2, keys(2.0 - t));
    }
    for (const auto& [idx, w] : acc) {
      if (w != 0.0) m.rows[j].emplace_back(idx, w);
    }
  }
  return m;
}

FieldTensor interpolate(const FieldTensor& x, const GridSpec& target, InterpMethod method) {
  const GridSpec& src = x.grid();
  if (src.dim() != target.dim()) throw ShapeError("source and target grids differ in dimension");
  if (src == target) return x;
  const std::size_t d = src.dim();
  std::vector<InterpMatrix1D> mats;
  for (std::size_t k = 0; k < d; ++k) mats.push_back(interpolation_matrix_1d(src.axis(k), target.axis(k), method));

  const std::size_t slices = x.batch() * x.channels();
  FieldTensor out(x.batch(), x.channels(), target);

  parallel_for(slices, [&](std::size_t s) {
    std::vector<std::size_t> shape = src.shape();
    auto in = x.data().subspan(s * x.spatial_size(), x.spatial_size());
    std::vector<double> cur(in.begin(), in.end());
    for (std::size_t k = 0; k < d; ++k) {
      const auto& M = mats[k];
      std::size_t outer = 1;
      std::size_t inner = 1;
      for (std::size_t a = 0; a < k; ++a) outer *= shape[a];
      for (std::size_t a = k + 1; a < d; ++a) inner *= shape[a];
      const std::size_t n_in = shape[k];
      const std::size_t n_out = M.rows.size();
      std::vector<double> next(outer * n_out * inner, 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < n_out; ++j) {
          double* dst = next.data() + (o * n_out + j) * inner;
          for (const auto& [i, w] : M.rows[j]) {
            const double* srcp = cur.data() + (o * n_in + i) * inner;
            for (std::size_t q = 0; q < inner; ++q) dst[q] += w * srcp[q];
          }
        }
      }
      shape[k] = n_out;
      cur = std::move(next);
    }
    std::copy(cur.begin(), cur.end(), out.data().begin() + static_cast<std::ptrdiff_t>(s * out.spatial_size()));
  });
  return out;
}

}  // namespace qnk
