#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/parallel.hpp"

namespace strongmax {

inline constexpr int kMaxDims = 3;

using Index3 = std::array<std::size_t, kMaxDims>;
using Point3 = std::array<double, kMaxDims>;

/// Geometry of a uniform grid with up to three axes. Axes at or beyond
/// `dims` have extent 1 and never take part in any computation. Flat
/// storage is row-major: the last active axis varies fastest.
struct GridShape {
  int dims = 1;
  Index3 extent{1, 1, 1};
  Point3 cell_size{1.0, 1.0, 1.0};
  Point3 origin{0.0, 0.0, 0.0};

  static GridShape make(std::vector<std::size_t> extents, std::vector<double> cell_sizes = {},
                        std::vector<double> origins = {}) {
    if (extents.empty() || extents.size() > kMaxDims)
      throw ShapeError("grid must have between 1 and 3 axes");
    GridShape s;
    s.dims = static_cast<int>(extents.size());
    for (int k = 0; k < s.dims; ++k) {
      s.extent[k] = extents[k];
      if (!cell_sizes.empty()) {
        if (cell_sizes.size() != extents.size()) throw ShapeError("cell_size arity mismatch");
        s.cell_size[k] = cell_sizes[k];
      }
      if (!origins.empty()) {
        if (origins.size() != extents.size()) throw ShapeError("origin arity mismatch");
        s.origin[k] = origins[k];
      }
    }
    s.validate();
    return s;
  }

  /// Square/cubic grid of side `n` cells covering [0, length)^dims.
  static GridShape cube(int dims, std::size_t n, double length = 1.0) {
    std::vector<std::size_t> ext(dims, n);
    std::vector<double> h(dims, length / static_cast<double>(n));
    return make(ext, h);
  }

  void validate() const {
    if (dims < 1 || dims > kMaxDims) throw ShapeError("grid must have between 1 and 3 axes");
    for (int k = 0; k < kMaxDims; ++k) {
      if (extent[k] < 1) throw ShapeError("grid extents must be >= 1");
      if (k >= dims && extent[k] != 1) throw ShapeError("inactive axes must have extent 1");
      if (!(cell_size[k] > 0.0) || !std::isfinite(cell_size[k]))
        throw ShapeError("cell sizes must be positive and finite");
      if (!std::isfinite(origin[k])) throw ShapeError("origin must be finite");
    }
  }

  std::size_t cell_count() const { return extent[0] * extent[1] * extent[2]; }

  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < dims; ++k) v *= cell_size[k];
    return v;
  }

  double total_volume() const { return cell_volume() * static_cast<double>(cell_count()); }

  std::size_t flat(const Index3& i) const { return (i[0] * extent[1] + i[1]) * extent[2] + i[2]; }

  Index3 unflatten(std::size_t f) const {
    Index3 i{};
    i[2] = f % extent[2];
    f /= extent[2];
    i[1] = f % extent[1];
    i[0] = f / extent[1];
    return i;
  }

  double center(int axis, std::size_t i) const {
    return origin[axis] + (static_cast<double>(i) + 0.5) * cell_size[axis];
  }

  Point3 center(const Index3& i) const {
    Point3 x{};
    for (int k = 0; k < dims; ++k) x[k] = center(k, i[k]);
    return x;
  }

  int last_axis() const { return dims - 1; }

  bool operator==(const GridShape&) const = default;
};

/// Nonnegative piecewise-constant function on a uniform grid.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(GridShape shape, double fill = 0.0)
      : shape_(shape), values_(shape.cell_count(), fill) {
    shape_.validate();
    check_values();
  }

  GridFunction(GridShape shape, std::vector<double> values)
      : shape_(shape), values_(std::move(values)) {
    shape_.validate();
    if (values_.size() != shape_.cell_count())
      throw ShapeError("value count " + std::to_string(values_.size()) + " does not match grid (" +
                       std::to_string(shape_.cell_count()) + " cells)");
    check_values();
  }

  /// Samples fn at cell midpoints.
  template <class Fn>
  static GridFunction from_midpoints(const GridShape& shape, Fn&& fn) {
    std::vector<double> v(shape.cell_count());
    for (std::size_t f = 0; f < v.size(); ++f) v[f] = fn(shape.center(shape.unflatten(f)));
    return GridFunction(shape, std::move(v));
  }

  const GridShape& shape() const { return shape_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t f) const { return values_[f]; }
  double at(const Index3& i) const { return values_[shape_.flat(i)]; }

  /// Cellwise transform; the result is validated like any other GridFunction.
  template <class Fn>
  GridFunction map(Fn&& fn) const {
    std::vector<double> v(values_.size());
    for (std::size_t f = 0; f < v.size(); ++f) v[f] = fn(values_[f]);
    return GridFunction(shape_, std::move(v));
  }

  /// Physical integral over the whole grid (pairwise summation).
  double integral() const { return pairwise_sum(values_) * shape_.cell_volume(); }

  double max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
  }
  double min_value() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
  }

 private:
  void check_values() const {
    for (double v : values_)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError("grid values must be finite and nonnegative");
  }

  GridShape shape_;
  std::vector<double> values_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("functions live on different grids");
}

/// Cellwise product of two functions on the same grid.
inline GridFunction multiply(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t f = 0; f < v.size(); ++f) v[f] = a[f] * b[f];
  return GridFunction(a.shape(), std::move(v));
}

/// Axis-parallel rectangle given by inclusive cell-index ranges.
struct Rect {
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};

  std::size_t side(int axis) const { return hi[axis] - lo[axis] + 1; }

  std::size_t cells() const { return side(0) * side(1) * side(2); }

  bool contains(const Index3& i) const {
    for (int k = 0; k < kMaxDims; ++k)
      if (i[k] < lo[k] || i[k] > hi[k]) return false;
    return true;
  }

  bool contains(const Rect& r) const {
    for (int k = 0; k < kMaxDims; ++k)
      if (r.lo[k] < lo[k] || r.hi[k] > hi[k]) return false;
    return true;
  }

  auto operator<=>(const Rect&) const = default;
};

inline Rect make_rect(std::initializer_list<std::pair<std::size_t, std::size_t>> ranges) {
  Rect r;
  int k = 0;
  for (auto [a, b] : ranges) {
    if (k >= kMaxDims) throw ShapeError("too many axes for a rectangle");
    r.lo[k] = a;
    r.hi[k] = b;
    ++k;
  }
  return r;
}

inline Rect full_rect(const GridShape& s) {
  Rect r;
  for (int k = 0; k < kMaxDims; ++k) r.hi[k] = s.extent[k] - 1;
  return r;
}

inline bool in_bounds(const Rect& r, const GridShape& s) {
  for (int k = 0; k < kMaxDims; ++k)
    if (r.lo[k] > r.hi[k] || r.hi[k] >= s.extent[k]) return false;
  return true;
}

inline void check_bounds(const Rect& r, const GridShape& s) {
  if (!in_bounds(r, s)) throw BoundsError("rectangle outside grid bounds");
}

/// Physical volume |R|.
inline double volume(const Rect& r, const GridShape& s) {
  return static_cast<double>(r.cells()) * s.cell_volume();
}

inline double side_length(const Rect& r, const GridShape& s, int axis) {
  return static_cast<double>(r.side(axis)) * s.cell_size[axis];
}

inline std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  Rect r;
  for (int k = 0; k < kMaxDims; ++k) {
    r.lo[k] = std::max(a.lo[k], b.lo[k]);
    r.hi[k] = std::min(a.hi[k], b.hi[k]);
    if (r.lo[k] > r.hi[k]) return std::nullopt;
  }
  return r;
}

/// Visits every cell of r (row-major order).
template <class Fn>
void for_each_cell(const Rect& r, const GridShape& s, Fn&& fn) {
  for (std::size_t i = r.lo[0]; i <= r.hi[0]; ++i)
    for (std::size_t j = r.lo[1]; j <= r.hi[1]; ++j) {
      std::size_t row = (i * s.extent[1] + j) * s.extent[2];
      for (std::size_t k = r.lo[2]; k <= r.hi[2]; ++k) fn(row + k);
    }
}

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

enum class BasisKind { AllRects, DyadicRects, Cubes };

inline std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::AllRects: return "all";
    case BasisKind::DyadicRects: return "dyadic";
    case BasisKind::Cubes: return "cubes";
  }
  return "?";
}

inline BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "all") return BasisKind::AllRects;
  if (s == "dyadic") return BasisKind::DyadicRects;
  if (s == "cubes") return BasisKind::Cubes;
  throw ArgumentError("unknown basis '" + s + "' (expected all, dyadic or cubes)");
}

/// A finite family of rectangles on a grid. Side-length bounds are physical
/// and apply to every axis.
struct Basis {
  BasisKind kind = BasisKind::AllRects;
  std::optional<double> min_side;
  std::optional<double> max_side;

  static Basis all() { return {}; }
  static Basis dyadic() { return {BasisKind::DyadicRects, {}, {}}; }
  static Basis cubes() { return {BasisKind::Cubes, {}, {}}; }

  bool side_ok(double len) const {
    // Relative slack absorbs rounding in physical lengths.
    if (min_side && len < *min_side * (1.0 - 1e-12)) return false;
    if (max_side && len > *max_side * (1.0 + 1e-12)) return false;
    return true;
  }

  bool is_product() const { return kind != BasisKind::Cubes; }
};

using Interval = std::pair<std::size_t, std::size_t>;

/// Per-axis interval candidates of a product basis (AllRects or DyadicRects),
/// already filtered by the side-length bounds.
inline std::vector<Interval> axis_intervals(const Basis& b, const GridShape& s, int axis) {
  std::size_t n = s.extent[axis];
  std::vector<Interval> out;
  if (axis >= s.dims) {
    out.emplace_back(0, 0);
    return out;
  }
  auto keep = [&](std::size_t a, std::size_t e) {
    if (b.side_ok(static_cast<double>(e - a + 1) * s.cell_size[axis])) out.emplace_back(a, e);
  };
  switch (b.kind) {
    case BasisKind::AllRects:
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t e = a; e < n; ++e) keep(a, e);
      break;
    case BasisKind::DyadicRects:
      if (!is_power_of_two(n))
        throw ShapeError("dyadic rectangles need power-of-two extents (axis " +
                         std::to_string(axis) + " has " + std::to_string(n) + ")");
      for (std::size_t len = n; len >= 1; len /= 2)
        for (std::size_t a = 0; a < n; a += len) keep(a, a + len - 1);
      break;
    case BasisKind::Cubes:
      throw ShapeError("cubes are not a product basis");
  }
  return out;
}

namespace detail {

// Cube side counts per axis for a common physical side length derived from
// `c0` cells on axis 0. Returns false when the side does not fit the grid.
inline bool cube_sides(const GridShape& s, std::size_t c0, Index3& sides) {
  double len = static_cast<double>(c0) * s.cell_size[0];
  sides = {1, 1, 1};
  sides[0] = c0;
  for (int k = 1; k < s.dims; ++k) {
    double c = std::round(len / s.cell_size[k]);
    if (c < 1.0 || c > static_cast<double>(s.extent[k])) return false;
    sides[k] = static_cast<std::size_t>(c);
  }
  return true;
}

}  // namespace detail

/// Enumerates every rectangle of the basis exactly once.
template <class Fn>
void for_each_rect(const Basis& b, const GridShape& s, Fn&& fn) {
  if (b.is_product()) {
    std::array<std::vector<Interval>, kMaxDims> axes;
    for (int k = 0; k < kMaxDims; ++k) axes[k] = axis_intervals(b, s, k);
    Rect r;
    for (auto [a0, b0] : axes[0])
      for (auto [a1, b1] : axes[1])
        for (auto [a2, b2] : axes[2]) {
          r.lo = {a0, a1, a2};
          r.hi = {b0, b1, b2};
          fn(r);
        }
    return;
  }
  for (std::size_t c0 = 1; c0 <= s.extent[0]; ++c0) {
    Index3 sides;
    if (!detail::cube_sides(s, c0, sides)) continue;
    bool ok = true;
    for (int k = 0; k < s.dims; ++k) ok = ok && b.side_ok(sides[k] * s.cell_size[k]);
    if (!ok) continue;
    Rect r;
    for (std::size_t i = 0; i + sides[0] <= s.extent[0]; ++i)
      for (std::size_t j = 0; j + sides[1] <= s.extent[1]; ++j)
        for (std::size_t k = 0; k + sides[2] <= s.extent[2]; ++k) {
          r.lo = {i, j, k};
          r.hi = {i + sides[0] - 1, j + sides[1] - 1, k + sides[2] - 1};
          fn(r);
        }
  }
}

inline std::vector<Rect> enumerate_basis(const Basis& b, const GridShape& s) {
  std::vector<Rect> out;
  for_each_rect(b, s, [&](const Rect& r) { out.push_back(r); });
  return out;
}

/// Summed-area table with n-dimensional inclusion-exclusion, accumulated in
/// extended precision.
class PrefixSum {
 public:
  PrefixSum() = default;

  explicit PrefixSum(const GridFunction& f) : shape_(f.shape()) {
    for (int k = 0; k < kMaxDims; ++k) ext_[k] = k < shape_.dims ? shape_.extent[k] + 1 : 1;
    cum_.assign(ext_[0] * ext_[1] * ext_[2], 0.0L);
    const auto& s = shape_;
    // cum(i0+1, i1+1, i2+1) holds the sum over cells with index < (i0+1, ...)
    // along active axes; inactive axes keep index 0.
    Index3 off{};
    for (int k = 0; k < kMaxDims; ++k) off[k] = k < s.dims ? 1 : 0;
    for (std::size_t i = 0; i < s.extent[0]; ++i)
      for (std::size_t j = 0; j < s.extent[1]; ++j)
        for (std::size_t k = 0; k < s.extent[2]; ++k)
          cum_[at(i + off[0], j + off[1], k + off[2])] = f.at({i, j, k});
    for (int axis = 0; axis < s.dims; ++axis) {
      std::size_t stride = axis == 0 ? ext_[1] * ext_[2] : axis == 1 ? ext_[2] : 1;
      for (std::size_t flat = 0; flat < cum_.size(); ++flat) {
        std::size_t idx = (flat / stride) % ext_[axis];
        if (idx >= 1) cum_[flat] += cum_[flat - stride];
      }
    }
  }

  const GridShape& shape() const { return shape_; }

  /// Sum of raw values over the leading-axis box of r (all active axes but
  /// the last) and last-axis indices < j.
  long double leading_sum(const Rect& r, std::size_t j) const {
    switch (shape_.dims) {
      case 1:
        return cum_[j];
      case 2: {
        std::size_t a = r.lo[0], b = r.hi[0] + 1;
        return cum_[at(b, j, 0)] - cum_[at(a, j, 0)];
      }
      default: {
        std::size_t a0 = r.lo[0], b0 = r.hi[0] + 1, a1 = r.lo[1], b1 = r.hi[1] + 1;
        return (cum_[at(b0, b1, j)] - cum_[at(a0, b1, j)]) -
               (cum_[at(b0, a1, j)] - cum_[at(a0, a1, j)]);
      }
    }
  }

  /// Raw sum from leading_sum differences. The maximal-function kernels use
  /// the same arithmetic, which makes their results bit-identical.
  double raw_sum(const Rect& r) const {
    int last = shape_.last_axis();
    // Clamp rounding residue of the inclusion-exclusion to the nonnegative range.
    return std::max(0.0, static_cast<double>(leading_sum(r, r.hi[last] + 1) - leading_sum(r, r.lo[last])));
  }

  /// Physical integral of f over r.
  double integral(const Rect& r) const {
    check_bounds(r, shape_);
    return raw_sum(r) * shape_.cell_volume();
  }

  double average(const Rect& r) const {
    check_bounds(r, shape_);
    return raw_sum(r) / static_cast<double>(r.cells());
  }

 private:
  std::size_t at(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * ext_[1] + j) * ext_[2] + k;
  }

  GridShape shape_;
  Index3 ext_{1, 1, 1};
  std::vector<long double> cum_;
};

inline PrefixSum build_prefix_sum(const GridFunction& f) { return PrefixSum(f); }

inline double rect_integral(const PrefixSum& p, const Rect& r) { return p.integral(r); }

inline double rect_average(const PrefixSum& p, const Rect& r) { return p.average(r); }

}  // namespace strongmax
