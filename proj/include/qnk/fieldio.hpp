#pragma once

#include <iosfwd>
#include <string>

#include "qnk/grid.hpp"

namespace qnk {

/// Binary field file, all integers and floats little-endian:
///
///   char[4]  magic "QNKF"
///   u32      version (1)
///   u32      dtype (1 = float64)
///   u32      spatial dimension d
///   u64      batch B, u64 channels C
///   d times: u64 n, u8 kind (0 uniform_endpoint, 1 periodic, 2 nonuniform),
///            then n f64 coordinates for nonuniform axes
///   f64      B*C*prod(n) payload values, row-major (B, C, n_1, ..., n_d)
void write_field(std::ostream& os, const FieldTensor& x);
FieldTensor read_field(std::istream& is);

void write_field_file(const std::string& path, const FieldTensor& x);
FieldTensor read_field_file(const std::string& path);

}  // namespace qnk
