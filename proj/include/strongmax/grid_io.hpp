#pragma once

// Grid file format
//
//   strongmax-grid 1
//   dims 2
//   shape 4 4
//   cell_size 0.25 0.25
//   origin 0 0
//   encoding csv            (or: binary)
//   data
//   <values>
//
// CSV data holds one line per run along the last axis, row-major. Binary data
// is the row-major sequence of IEEE-754 doubles, little-endian, directly after
// the newline of the `data` line.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/grid.hpp"

namespace strongmax {

enum class GridEncoding { Csv, Binary };

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T>
std::vector<T> parse_row(const std::string& rest, std::size_t expect, const std::string& key) {
  std::istringstream is(rest);
  std::vector<T> out;
  T v;
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw ParseError("malformed '" + key + "' line");
  if (out.size() != expect) throw ParseError("'" + key + "' needs " + std::to_string(expect) + " entries");
  return out;
}

inline std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((bits >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return bits;
}

}  // namespace detail

inline void write_grid(std::ostream& os, const GridFunction& f, GridEncoding enc = GridEncoding::Csv) {
  const auto& s = f.shape();
  os << "strongmax-grid 1\n";
  os << "dims " << s.dims << "\n";
  os << "shape";
  for (int k = 0; k < s.dims; ++k) os << ' ' << s.extent[k];
  os << "\ncell_size";
  for (int k = 0; k < s.dims; ++k) os << ' ' << detail::format_double(s.cell_size[k]);
  os << "\norigin";
  for (int k = 0; k < s.dims; ++k) os << ' ' << detail::format_double(s.origin[k]);
  os << "\nencoding " << (enc == GridEncoding::Csv ? "csv" : "binary") << "\ndata\n";
  if (enc == GridEncoding::Csv) {
    std::size_t run = s.extent[s.last_axis()];
    for (std::size_t i = 0; i < f.size(); ++i) {
      os << detail::format_double(f[i]);
      os << ((i + 1) % run == 0 ? '\n' : ',');
    }
  } else {
    for (double v : f.values()) {
      std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
      char buf[8];
      std::memcpy(buf, &bits, 8);
      os.write(buf, 8);
    }
  }
}

inline GridFunction read_grid(std::istream& is) {
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(is, line)) throw ParseError(std::string("unexpected end of grid file, expected ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto keyed = [&](const std::string& key) {
    next_line(key.c_str());
    if (line.rfind(key, 0) != 0) throw ParseError("expected '" + key + "' line, got '" + line + "'");
    return line.substr(key.size());
  };

  if (!std::getline(is, line) || line.empty()) throw ParseError("empty grid file");
  if (line.rfind("strongmax-grid", 0) != 0) throw ParseError("missing 'strongmax-grid' header");
  int dims = detail::parse_row<int>(keyed("dims"), 1, "dims")[0];
  if (dims < 1 || dims > kMaxDims) throw ParseError("dims must be 1, 2 or 3");
  auto extents = detail::parse_row<std::size_t>(keyed("shape"), dims, "shape");
  auto h = detail::parse_row<double>(keyed("cell_size"), dims, "cell_size");
  auto origin = detail::parse_row<double>(keyed("origin"), dims, "origin");
  std::string enc = keyed("encoding");
  enc.erase(0, enc.find_first_not_of(' '));
  next_line("data");
  if (line != "data") throw ParseError("expected 'data' line");

  GridShape shape;
  try {
    shape = GridShape::make(extents, h, origin);
  } catch (const ShapeError& e) {
    throw ParseError(std::string("invalid grid header: ") + e.what());
  }
  std::size_t n = shape.cell_count();
  std::vector<double> values;
  values.reserve(n);
  if (enc == "csv") {
    std::string token;
    while (std::getline(is, line)) {
      std::istringstream row(line);
      while (std::getline(row, token, ',')) {
        auto first = token.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        try {
          std::size_t used = 0;
          values.push_back(std::stod(token.substr(first), &used));
        } catch (...) {
          throw ParseError("bad number '" + token + "' in grid data");
        }
      }
    }
  } else if (enc == "binary") {
    char buf[8];
    for (std::size_t i = 0; i < n; ++i) {
      if (!is.read(buf, 8)) throw ParseError("binary grid data truncated");
      std::uint64_t bits;
      std::memcpy(&bits, buf, 8);
      values.push_back(std::bit_cast<double>(detail::to_little(bits)));
    }
  } else {
    throw ParseError("unknown encoding '" + enc + "'");
  }
  if (values.size() != n)
    throw ParseError("grid data has " + std::to_string(values.size()) + " values, header expects " +
                     std::to_string(n));
  try {
    return GridFunction(shape, std::move(values));
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid grid values: ") + e.what());
  }
}

inline GridFunction read_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open grid file '" + path + "'");
  return read_grid(in);
}

inline void write_grid_file(const std::string& path, const GridFunction& f,
                            GridEncoding enc = GridEncoding::Csv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write grid file '" + path + "'");
  write_grid(out, f, enc);
}

}  // namespace strongmax
