#include "qnk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qnk/error.hpp"

namespace qnk {

std::string_view to_string(AxisKind kind) {
  switch (kind) {
    case AxisKind::uniform_endpoint:
      return "uniform_endpoint";
    case AxisKind::periodic:
      return "periodic";
    case AxisKind::nonuniform:
      return "nonuniform";
  }
  return "unknown";
}

double Axis1D::min_spacing() const {
  double m = length();
  for (std::size_t i = 1; i < coords.size(); ++i) m = std::min(m, coords[i] - coords[i - 1]);
  return m;
}

double Axis1D::max_spacing() const {
  if (kind == AxisKind::periodic) return 1.0 / static_cast<double>(coords.size());
  double m = 0.0;
  for (std::size_t i = 1; i < coords.size(); ++i) m = std::max(m, coords[i] - coords[i - 1]);
  return m;
}

void Axis1D::validate() const {
  const std::size_t n = coords.size();
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << to_string(kind) << " axis with " << n << " nodes: " << why;
    throw InvalidGridError(os.str());
  };
  if (kind == AxisKind::periodic) {
    if (n < 1) fail("periodic axes need at least one node");
    for (std::size_t j = 0; j < n; ++j) {
      if (coords[j] != static_cast<double>(j) / static_cast<double>(n)) fail("coordinates must be j/n");
    }
    return;
  }
  if (n < 2) fail("need at least two nodes");
  if (coords.front() != 0.0 || coords.back() != 1.0) fail("endpoints must be exactly 0 and 1");
  for (std::size_t j = 1; j < n; ++j) {
    if (!(coords[j] > coords[j - 1])) fail("coordinates must be strictly increasing");
  }
}

GridSpec::GridSpec(std::vector<Axis1D> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) {
    throw InvalidGridError("grids must have between 1 and 3 axes");
  }
  domain_measure_ = 1.0;
  for (const auto& a : axes_) {
    a.validate();
    domain_measure_ *= a.length();
  }
}

std::vector<std::size_t> GridSpec::shape() const {
  std::vector<std::size_t> s;
  s.reserve(axes_.size());
  for (const auto& a : axes_) s.push_back(a.size());
  return s;
}

std::size_t GridSpec::num_nodes() const {
  std::size_t n = axes_.empty() ? 0 : 1;
  for (const auto& a : axes_) n *= a.size();
  return n;
}

bool GridSpec::all_of_kind(AxisKind kind) const {
  return std::all_of(axes_.begin(), axes_.end(), [&](const Axis1D& a) { return a.kind == kind; });
}

std::vector<double> GridSpec::spacing() const {
  std::vector<double> h;
  for (const auto& a : axes_) h.push_back(a.max_spacing());
  return h;
}

double GridSpec::max_spacing() const {
  double h = 0.0;
  for (const auto& a : axes_) h = std::max(h, a.max_spacing());
  return h;
}

Axis1D uniform_axis(std::size_t n) {
  if (n < 2) throw InvalidGridError("uniform endpoint-inclusive axes need n >= 2, got " + std::to_string(n));
  Axis1D a;
  a.kind = AxisKind::uniform_endpoint;
  a.coords.resize(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) a.coords[j] = static_cast<double>(j) / denom;
  return a;
}

Axis1D periodic_axis(std::size_t n) {
  if (n < 1) throw InvalidGridError("periodic axes need n >= 1");
  Axis1D a;
  a.kind = AxisKind::periodic;
  a.coords.resize(n);
  for (std::size_t j = 0; j < n; ++j) a.coords[j] = static_cast<double>(j) / static_cast<double>(n);
  return a;
}

GridSpec uniform_grid(std::span<const std::size_t> n_per_axis) {
  std::vector<Axis1D> axes;
  for (std::size_t n : n_per_axis) axes.push_back(uniform_axis(n));
  return GridSpec(std::move(axes));
}

GridSpec uniform_grid(std::initializer_list<std::size_t> n_per_axis) {
  return uniform_grid(std::span<const std::size_t>(n_per_axis.begin(), n_per_axis.size()));
}

GridSpec periodic_grid(std::span<const std::size_t> n_per_axis) {
  std::vector<Axis1D> axes;
  for (std::size_t n : n_per_axis) axes.push_back(periodic_axis(n));
  return GridSpec(std::move(axes));
}

GridSpec periodic_grid(std::initializer_list<std::size_t> n_per_axis) {
  return periodic_grid(std::span<const std::size_t>(n_per_axis.begin(), n_per_axis.size()));
}

double boundary_refined_map(double t, double strength) {
  if (strength == 0.0) return t;
  return (std::tanh(strength * (2.0 * t - 1.0)) / std::tanh(strength) + 1.0) / 2.0;
}

namespace {

// Fills the lower half from `gen` and mirrors it, so symmetric families are
// exactly symmetric and the midpoint of odd counts is exactly 1/2.
template <typename Gen>
std::vector<double> symmetric_nodes(std::size_t n, Gen gen) {
  std::vector<double> x(n);
  x.front() = 0.0;
  x.back() = 1.0;
  for (std::size_t j = 1; 2 * j < n - 1; ++j) {
    x[j] = gen(j);
    x[n - 1 - j] = 1.0 - x[j];
  }
  if (n % 2 == 1) x[(n - 1) / 2] = 0.5;
  return x;
}

}  // namespace

Axis1D nonuniform_axis(const NonuniformFamily& family, std::size_t n) {
  Axis1D a;
  a.kind = AxisKind::nonuniform;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, CustomCoords>) {
          if (f.coords.size() < 3) throw InvalidGridError("custom axes need at least 3 coordinates");
          a.coords = f.coords;
        } else {
          if (n < 3) throw InvalidGridError("nonuniform axes need n >= 3, got " + std::to_string(n));
          const double denom = static_cast<double>(n - 1);
          if constexpr (std::is_same_v<F, BoundaryRefined>) {
            if (!(f.strength >= 0.0) || !std::isfinite(f.strength)) {
              throw InvalidGridError("boundary-refined strength must be finite and >= 0");
            }
            a.coords = symmetric_nodes(n, [&](std::size_t j) {
              return boundary_refined_map(static_cast<double>(j) / denom, f.strength);
            });
          } else {
            a.coords = symmetric_nodes(n, [&](std::size_t j) {
              const double s = std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * denom));
              return s * s;
            });
          }
        }
      },
      family);
  a.validate();
  return a;
}

GridSpec nonuniform_grid_1d(const NonuniformFamily& family, std::size_t n) {
  return GridSpec({nonuniform_axis(family, n)});
}

GridSpec nonuniform_grid(const NonuniformFamily& family, std::size_t n, std::size_t dim) {
  std::vector<Axis1D> axes(dim, nonuniform_axis(family, n));
  return GridSpec(std::move(axes));
}

double nonuniformity_ratio(const GridSpec& grid) {
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& a : grid.axes()) {
    lo = std::min(lo, a.min_spacing());
    hi = std::max(hi, a.max_spacing());
  }
  return hi / lo;
}

FieldTensor::FieldTensor(std::size_t batch, std::size_t channels, GridSpec grid)
    : FieldTensor(batch, channels, grid, std::vector<double>(batch * channels * grid.num_nodes(), 0.0)) {}

FieldTensor::FieldTensor(std::size_t batch, std::size_t channels, GridSpec grid, std::vector<double> data)
    : batch_(batch), channels_(channels), spatial_(grid.num_nodes()), grid_(std::move(grid)), data_(std::move(data)) {
  if (batch_ < 1 || channels_ < 1) throw ShapeError("field tensors need batch >= 1 and channels >= 1");
  if (data_.size() != batch_ * channels_ * spatial_) {
    std::ostringstream os;
    os << "payload has " << data_.size() << " values, expected " << batch_ * channels_ * spatial_;
    throw ShapeError(os.str());
  }
}

std::vector<std::size_t> FieldTensor::shape() const {
  std::vector<std::size_t> s{batch_, channels_};
  for (std::size_t n : grid_.shape()) s.push_back(n);
  return s;
}

FieldTensor FieldTensor::with_data(std::vector<double> data) const {
  return FieldTensor(batch_, channels_, grid_, std::move(data));
}

}  // namespace qnk
