#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/grid.hpp"
#include "strongmax/report.hpp"
#include "strongmax/young.hpp"

namespace strongmax {

/// A set of cells on a grid.
class CellSet {
 public:
  CellSet() = default;

  CellSet(GridShape shape, std::vector<std::uint8_t> mask) : shape_(shape), mask_(std::move(mask)) {
    if (mask_.size() != shape_.cell_count()) throw ShapeError("cell set mask does not match grid");
    for (auto& b : mask_) {
      b = b ? 1 : 0;
      count_ += b;
    }
  }

  static CellSet all(const GridShape& s) { return CellSet(s, std::vector<std::uint8_t>(s.cell_count(), 1)); }

  static CellSet of_rect(const GridShape& s, const Rect& r) {
    check_bounds(r, s);
    std::vector<std::uint8_t> m(s.cell_count(), 0);
    for_each_cell(r, s, [&](std::size_t f) { m[f] = 1; });
    return CellSet(s, std::move(m));
  }

  const GridShape& shape() const { return shape_; }
  std::size_t count() const { return count_; }
  double measure() const { return static_cast<double>(count_) * shape_.cell_volume(); }
  bool contains(std::size_t flat) const { return mask_[flat] != 0; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  /// Values of f on the member cells, in flat order.
  std::vector<double> gather(const GridFunction& f) const {
    if (!(f.shape() == shape_)) throw ShapeError("cell set and function live on different grids");
    std::vector<double> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i]) out.push_back(f[i]);
    return out;
  }

 private:
  GridShape shape_;
  std::vector<std::uint8_t> mask_;
  std::size_t count_ = 0;
};

namespace detail {

// Mean of phi(s * v) over the sample.
inline double orlicz_mean(std::span<const double> v, const YoungFunction& phi, double s) {
  double acc = 0.0;
  for (double x : v) {
    acc += phi(s * x);
    if (std::isinf(acc)) return acc;
  }
  return acc / static_cast<double>(v.size());
}

}  // namespace detail

/// Luxemburg norm of equally weighted samples:
/// inf { lambda > 0 : mean phi(v / lambda) <= 1 }.
///
/// Works in s = 1 / lambda. The root of mean phi(s v) = 1 is bracketed by the
/// Jensen bounds phi^-1(1)/max v and phi^-1(1)/mean v (widened by doubling
/// when the sample does not confirm them), then located by Illinois false
/// position with bisection fallback until the bracket has relative width
/// <= rel_tol. The returned lambda is on the feasible side.
inline double luxemburg_norm(std::span<const double> v, const YoungFunction& phi, double rel_tol = 1e-9) {
  if (v.empty()) throw MeasureError("Luxemburg norm over an empty set");
  double vmax = 0.0, vsum = 0.0;
  for (double x : v) {
    double a = std::abs(x);
    vmax = std::max(vmax, a);
    vsum += a;
  }
  if (vmax == 0.0) return 0.0;
  double vmean = vsum / static_cast<double>(v.size());
  double unit = phi.unit_level();
  auto g = [&](double s) { return detail::orlicz_mean(v, phi, s) - 1.0; };

  double lo = unit / vmax, hi = unit / vmean;
  double glo = g(lo);
  while (glo > 0.0) {
    hi = lo;
    lo *= 0.5;
    glo = g(lo);
    if (lo < 1e-300) throw BracketError("Luxemburg norm: lower bracket not found");
  }
  if (hi <= lo) hi = lo * 2.0;
  double ghi = g(hi);
  while (!(ghi > 0.0)) {
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = g(hi);
    if (hi > 1e300) throw BracketError("Luxemburg norm: upper bracket not found");
  }

  // Illinois: halve the stale endpoint's value when the same side is kept
  // twice. A bisection step is forced when three steps fail to halve the
  // bracket.
  int side = 0;
  double widths[3] = {hi - lo, hi - lo, hi - lo};
  for (int it = 0; it < 400 && hi - lo > rel_tol * hi; ++it) {
    bool bisect = (hi - lo) > 0.5 * widths[it % 3] && it >= 3;
    widths[it % 3] = hi - lo;
    double s;
    if (!bisect && std::isfinite(glo) && std::isfinite(ghi) && ghi > glo) {
      s = lo - glo * (hi - lo) / (ghi - glo);
      if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    } else {
      s = 0.5 * (lo + hi);
      side = 0;
    }
    double gs = g(s);
    if (gs <= 0.0) {
      lo = s;
      glo = gs;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = s;
      ghi = gs;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  return 1.0 / lo;
}

inline double luxemburg_norm(const GridFunction& f, const CellSet& E, const YoungFunction& phi,
                             double rel_tol = 1e-9) {
  if (E.count() == 0) throw MeasureError("Luxemburg norm over a set of zero measure");
  auto v = E.gather(f);
  return luxemburg_norm(v, phi, rel_tol);
}

/// Mean of phi(|f|) over E (cells carry equal weight on a uniform grid).
inline double orlicz_mean(const GridFunction& f, const CellSet& E, const YoungFunction& phi) {
  if (E.count() == 0) throw MeasureError("mean over a set of zero measure");
  auto v = E.gather(f);
  return detail::orlicz_mean(v, phi, 1.0);
}

/// Checks ||f|| <= 1  <=>  mean phi(|f|) <= 1 on E, each side within tol.
inline bool norm_le_one_equivalence_check(const GridFunction& f, const CellSet& E, const YoungFunction& phi,
                                          double tol = 1e-9) {
  double norm = luxemburg_norm(f, E, phi);
  double mean = orlicz_mean(f, E, phi);
  bool a = norm <= 1.0 + tol;
  bool b = mean <= 1.0 + tol;
  // Near the boundary either answer is acceptable for the other side.
  if (std::abs(norm - 1.0) <= tol || std::abs(mean - 1.0) <= tol) return true;
  return a == b;
}

/// mean |f g| over E <= 2 ||f||_{phi,E} ||g||_{conj phi,E}.
inline VerificationReport generalized_holder_check(const GridFunction& f, const GridFunction& g, const CellSet& E,
                                                   const YoungFunction& phi, double tol = 1e-9) {
  require_same_grid(f, g);
  VerificationReport r;
  r.id = "generalized_holder";
  r.config = {{"young", phi.label()}, {"cells", E.count()}};
  auto fv = E.gather(f);
  auto gv = E.gather(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < fv.size(); ++i) acc += fv[i] * gv[i];
  double lhs = acc / static_cast<double>(fv.size());
  if (lhs == 0.0) {
    r.set_values(0.0, 0.0);
    r.status = Status::Pass;
    return r;
  }
  double nf = luxemburg_norm(fv, phi);
  double ng = luxemburg_norm(gv, young::conjugate(phi));
  double rhs = 2.0 * nf * ng;
  r.set_values(lhs, rhs);
  r.data = {{"norm_f", num(nf)}, {"norm_g_conjugate", num(ng)}};
  if (std::isinf(rhs)) {
    r.status = Status::Pass;
    r.note = "vacuous (RHS infinite)";
    return r;
  }
  r.status = lhs <= rhs + tol ? Status::Pass : Status::Fail;
  return r;
}

/// prod ||f_i||_{phi,E} <= C prod mean phi^(m)(|f_i|) over E, reporting
/// C = lhs / rhs. Skipped unless the product of norms exceeds 1.
inline VerificationReport product_norm_lemma_check(const std::vector<GridFunction>& fs, const CellSet& E,
                                                   const YoungFunction& phi) {
  if (fs.empty()) throw ArgumentError("product lemma needs at least one function");
  VerificationReport r;
  r.id = "product_norm_lemma";
  int m = static_cast<int>(fs.size());
  r.config = {{"young", phi.label()}, {"m", m}, {"cells", E.count()}};
  if (phi.submultiplicative() == Tri::No) {
    r.status = Status::Skipped;
    r.note = "hypothesis-skipped: Young function is not submultiplicative";
    return r;
  }
  auto phim = young::compose(phi, m);
  double lhs = 1.0, rhs = 1.0;
  for (const auto& f : fs) {
    lhs *= luxemburg_norm(f, E, phi);
    rhs *= orlicz_mean(f, E, phim);
  }
  r.set_values(lhs, rhs);
  if (!(lhs > 1.0)) {
    r.status = Status::Skipped;
    r.note = "hypothesis-skipped: product of norms <= 1";
    return r;
  }
  r.data = {{"constant", num(r.ratio)}};
  r.status = std::isfinite(r.ratio) ? Status::Pass : Status::Fail;
  return r;
}

}  // namespace strongmax
