#include "qnk/fieldio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "qnk/error.hpp"

namespace qnk {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'Q', 'N', 'K', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFloat64 = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ShapeError("truncated field file");
  return v;
}

std::uint8_t kind_code(AxisKind k) {
  switch (k) {
    case AxisKind::uniform_endpoint:
      return 0;
    case AxisKind::periodic:
      return 1;
    case AxisKind::nonuniform:
      return 2;
  }
  return 0;
}

}  // namespace

void write_field(std::ostream& os, const FieldTensor& x) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, kFloat64);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(x.grid().dim()));
  put<std::uint64_t>(os, x.batch());
  put<std::uint64_t>(os, x.channels());
  for (const auto& a : x.grid().axes()) {
    put<std::uint64_t>(os, a.size());
    put<std::uint8_t>(os, kind_code(a.kind));
    if (a.kind == AxisKind::nonuniform) {
      os.write(reinterpret_cast<const char*>(a.coords.data()), static_cast<std::streamsize>(a.coords.size() * 8));
    }
  }
  os.write(reinterpret_cast<const char*>(x.data().data()), static_cast<std::streamsize>(x.data().size() * 8));
  if (!os) throw Error("failed to write field data");
}

FieldTensor read_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ShapeError("not a field file (bad magic)");
  if (get<std::uint32_t>(is) != kVersion) throw ShapeError("unsupported field file version");
  if (get<std::uint32_t>(is) != kFloat64) throw ShapeError("unsupported field dtype");
  const auto d = get<std::uint32_t>(is);
  if (d < 1 || d > 3) throw ShapeError("field files hold 1 to 3 spatial axes");
  const auto B = get<std::uint64_t>(is);
  const auto C = get<std::uint64_t>(is);
  std::vector<Axis1D> axes;
  for (std::uint32_t k = 0; k < d; ++k) {
    const auto n = get<std::uint64_t>(is);
    const auto kind = get<std::uint8_t>(is);
    if (n > (std::uint64_t{1} << 32)) throw ShapeError("axis length out of range");
    switch (kind) {
      case 0:
        axes.push_back(uniform_axis(n));
        break;
      case 1:
        axes.push_back(periodic_axis(n));
        break;
      case 2: {
        Axis1D a;
        a.kind = AxisKind::nonuniform;
        a.coords.resize(n);
        is.read(reinterpret_cast<char*>(a.coords.data()), static_cast<std::streamsize>(n * 8));
        if (!is) throw ShapeError("truncated field file");
        axes.push_back(std::move(a));
        break;
      }
      default:
        throw ShapeError("unknown axis kind code in field file");
    }
  }
  GridSpec grid(std::move(axes));
  std::vector<double> data(B * C * grid.num_nodes());
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 8));
  if (!is) throw ShapeError("truncated field payload");
  return FieldTensor(B, C, std::move(grid), std::move(data));
}

void write_field_file(const std::string& path, const FieldTensor& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_field(os, x);
}

FieldTensor read_field_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_field(is);
}

}  // namespace qnk
