#include "qnk/fields.hpp"

#include <cmath>
#include <numbers>

#include "qnk/error.hpp"

namespace qnk {

namespace {

constexpr double pi = std::numbers::pi;

struct Entry {
  FieldId id;
  std::string_view name;
};

constexpr Entry kRegistry[] = {
    {FieldId::constant, "constant"},       {FieldId::linear, "linear"},   {FieldId::quadratic1d, "quadratic1d"},
    {FieldId::exp1d, "exp1d"},             {FieldId::mixed2d, "mixed2d"}, {FieldId::bump2d, "bump2d"},
    {FieldId::periodic2d, "periodic2d"},
};

double channel_scale(std::size_t c) { return 1.0 + static_cast<double>(c) / 2.0; }
double channel_shift(std::size_t c) { return static_cast<double>(c) / 4.0; }

}  // namespace

std::string_view to_string(FieldId id) {
  for (const auto& e : kRegistry) {
    if (e.id == id) return e.name;
  }
  return "unknown";
}

FieldId parse_field_id(std::string_view name) {
  for (const auto& e : kRegistry) {
    if (e.name == name) return e.id;
  }
  throw DomainError("unknown field '" + std::string(name) + "'");
}

std::vector<FieldId> all_field_ids() {
  std::vector<FieldId> ids;
  for (const auto& e : kRegistry) ids.push_back(e.id);
  return ids;
}

std::optional<std::size_t> required_dim(FieldId id) {
  switch (id) {
    case FieldId::quadratic1d:
    case FieldId::exp1d:
      return 1;
    case FieldId::mixed2d:
    case FieldId::bump2d:
    case FieldId::periodic2d:
      return 2;
    default:
      return std::nullopt;
  }
}

double evaluate(const FieldSpec& f, std::span<const double> p) {
  switch (f.id) {
    case FieldId::constant:
      return f.constant;
    case FieldId::linear: {
      double s = 0.0;
      for (double v : p) s += v;
      return s;
    }
    case FieldId::quadratic1d:
      return p[0] * p[0];
    case FieldId::exp1d:
      return std::exp(p[0]);
    case FieldId::mixed2d:
      return p[0] * p[0] + std::sin(pi * p[0]) * std::cos(pi * p[1]);
    case FieldId::bump2d:
      return 16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
    case FieldId::periodic2d:
      return std::sin(2.0 * pi * p[0]) * std::sin(2.0 * pi * p[1]);
  }
  return 0.0;
}

double evaluate(const FieldSpec& f, std::span<const double> point, std::size_t channel) {
  const double v = evaluate(f, point);
  if (f.id == FieldId::constant) return v;
  return channel_scale(channel) * v + channel_shift(channel);
}

double exact_mean(const FieldSpec& f, std::size_t dim, std::size_t channel) {
  if (auto d = required_dim(f.id); d && *d != dim) {
    throw ShapeError(std::string(to_string(f.id)) + " is defined only in " + std::to_string(*d) + "D");
  }
  double m = 0.0;
  switch (f.id) {
    case FieldId::constant:
      return f.constant;
    case FieldId::linear:
      m = static_cast<double>(dim) / 2.0;
      break;
    case FieldId::quadratic1d:
      m = 1.0 / 3.0;
      break;
    case FieldId::exp1d:
      m = std::numbers::e - 1.0;
      break;
    case FieldId::mixed2d:
      // the sin(pi x) cos(pi y) term integrates to zero in y
      m = 1.0 / 3.0;
      break;
    case FieldId::bump2d:
      m = 4.0 / 9.0;
      break;
    case FieldId::periodic2d:
      m = 0.0;
      break;
  }
  return channel_scale(channel) * m + channel_shift(channel);
}

FieldTensor sample_field(const FieldSpec& f, const GridSpec& grid, std::size_t channels) {
  const std::size_t d = grid.dim();
  if (auto rd = required_dim(f.id); rd && *rd != d) {
    throw ShapeError(std::string(to_string(f.id)) + " needs a " + std::to_string(*rd) + "D grid, got " +
                     std::to_string(d) + "D");
  }
  FieldTensor out(1, channels, grid);
  const auto shape = grid.shape();
  const std::size_t n = grid.num_nodes();
  std::vector<double> base(n);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) point[k] = grid.axis(k).coords[idx[k]];
    base[i] = evaluate(f, point);
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    auto s = out.slice(0, c);
    if (f.id == FieldId::constant || c == 0) {
      std::copy(base.begin(), base.end(), s.begin());
    } else {
      const double a = channel_scale(c);
      const double b = channel_shift(c);
      for (std::size_t i = 0; i < n; ++i) s[i] = a * base[i] + b;
    }
  }
  return out;
}

}  // namespace qnk
