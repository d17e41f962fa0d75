#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qnk {

enum class AxisKind { uniform_endpoint, periodic, nonuniform };

std::string_view to_string(AxisKind kind);

/// One coordinate axis of a tensor-product grid on [0, 1].
///
/// Coordinates are always stored explicitly, so uniform, periodic and
/// nonuniform axes share every downstream code path.
struct Axis1D {
  std::vector<double> coords;
  AxisKind kind = AxisKind::uniform_endpoint;

  std::size_t size() const { return coords.size(); }
  double min_spacing() const;
  double max_spacing() const;
  /// Length of the interval the axis discretizes (1 for every supported kind).
  double length() const { return 1.0; }

  /// Throws InvalidGridError when the kind-specific invariants do not hold.
  void validate() const;

  friend bool operator==(const Axis1D&, const Axis1D&) = default;
};

/// Geometry of a tensor-product grid on [0,1]^d, 1 <= d <= 3.
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<Axis1D> axes);

  const std::vector<Axis1D>& axes() const { return axes_; }
  const Axis1D& axis(std::size_t k) const { return axes_.at(k); }
  std::size_t dim() const { return axes_.size(); }
  std::vector<std::size_t> shape() const;
  std::size_t num_nodes() const;
  /// |Omega|, the product of the per-axis lengths.
  double domain_measure() const { return domain_measure_; }

  bool all_of_kind(AxisKind kind) const;
  /// Per-axis spacing for uniform_endpoint / periodic axes (max spacing otherwise).
  std::vector<double> spacing() const;
  /// Largest spacing over all axes.
  double max_spacing() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::vector<Axis1D> axes_;
  double domain_measure_ = 1.0;
};

Axis1D uniform_axis(std::size_t n);
Axis1D periodic_axis(std::size_t n);

/// Endpoint-inclusive uniform grid, coords j/(n-1) on every axis.
GridSpec uniform_grid(std::span<const std::size_t> n_per_axis);
GridSpec uniform_grid(std::initializer_list<std::size_t> n_per_axis);

/// Periodic grid without the duplicated endpoint, coords j/n.
GridSpec periodic_grid(std::span<const std::size_t> n_per_axis);
GridSpec periodic_grid(std::initializer_list<std::size_t> n_per_axis);

struct BoundaryRefined {
  /// Strength of the tanh stretching; 0 reproduces the uniform grid.
  double strength = 2.0;
};
struct Chebyshev {};
struct CustomCoords {
  std::vector<double> coords;
};
using NonuniformFamily = std::variant<BoundaryRefined, Chebyshev, CustomCoords>;

/// The boundary-refined stretching map s(t) = (tanh(strength (2t-1)) / tanh(strength) + 1) / 2.
double boundary_refined_map(double t, double strength);

Axis1D nonuniform_axis(const NonuniformFamily& family, std::size_t n);
GridSpec nonuniform_grid_1d(const NonuniformFamily& family, std::size_t n);

/// Tensor product of the same nonuniform family on every axis.
GridSpec nonuniform_grid(const NonuniformFamily& family, std::size_t n, std::size_t dim);

/// Ratio of the largest to the smallest cell width over all axes.
double nonuniformity_ratio(const GridSpec& grid);

/// A (batch, channel, spatial...) block of field samples on a grid.
///
/// Storage is row-major with the last spatial axis fastest.
class FieldTensor {
 public:
  FieldTensor() = default;
  FieldTensor(std::size_t batch, std::size_t channels, GridSpec grid);
  FieldTensor(std::size_t batch, std::size_t channels, GridSpec grid, std::vector<double> data);

  std::size_t batch() const { return batch_; }
  std::size_t channels() const { return channels_; }
  std::size_t spatial_size() const { return spatial_; }
  const GridSpec& grid() const { return grid_; }
  std::vector<std::size_t> shape() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }

  std::span<double> slice(std::size_t b, std::size_t c) {
    return {data_.data() + (b * channels_ + c) * spatial_, spatial_};
  }
  std::span<const double> slice(std::size_t b, std::size_t c) const {
    return {data_.data() + (b * channels_ + c) * spatial_, spatial_};
  }

  /// Same batch/channel layout, different payload values.
  FieldTensor with_data(std::vector<double> data) const;

 private:
  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t spatial_ = 0;
  GridSpec grid_;
  std::vector<double> data_;
};

}  // namespace qnk
