#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnk/grid.hpp"

namespace qnk {

enum class FieldId { constant, linear, quadratic1d, exp1d, mixed2d, bump2d, periodic2d };

std::string_view to_string(FieldId id);
/// Throws DomainError for unknown names.
FieldId parse_field_id(std::string_view name);
std::vector<FieldId> all_field_ids();

struct FieldSpec {
  FieldId id = FieldId::constant;
  /// Value of the constant field; ignored otherwise.
  double constant = 1.0;
};

/// Required spatial dimension, or nullopt when any dimension works.
std::optional<std::size_t> required_dim(FieldId id);

/// Channel-0 value at a point of [0,1]^d.
double evaluate(const FieldSpec& f, std::span<const double> point);

/// Value for channel c. Channel c is (1 + c/2) f + c/4; the constant field
/// ignores the channel index.
double evaluate(const FieldSpec& f, std::span<const double> point, std::size_t channel);

/// Exact area mean over [0,1]^d for the given channel.
double exact_mean(const FieldSpec& f, std::size_t dim, std::size_t channel = 0);

/// Exact nodal samples, shaped (1, channels, grid...).
FieldTensor sample_field(const FieldSpec& f, const GridSpec& grid, std::size_t channels = 1);

}  // namespace qnk
