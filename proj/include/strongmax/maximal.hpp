#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/grid.hpp"
#include "strongmax/orlicz.hpp"
#include "strongmax/parallel.hpp"
#include "strongmax/young.hpp"

namespace strongmax {

/// Parameters of a (multilinear, fractional, Orlicz) maximal operator.
struct MaximalQuery {
  Basis basis;
  double alpha = 0.0;
  int m = 1;
  std::vector<YoungFunction> orlicz;   // empty: plain averages
  std::optional<double> phi_exponent;  // phi(t) = t^e; defaults to alpha / n

  double scale_exponent(int n) const { return phi_exponent ? *phi_exponent : alpha / n; }

  void validate(int n) const {
    if (m < 1) throw ArgumentError("m must be >= 1");
    if (!(alpha >= 0.0) || !(alpha < m * n))
      throw DomainError("alpha must satisfy 0 <= alpha < m n");
    if (!orlicz.empty() && static_cast<int>(orlicz.size()) != m)
      throw ArgumentError("orlicz list must have one Young function per slot");
    if (phi_exponent && *phi_exponent < 0.0) throw DomainError("phi must be non-decreasing");
  }
};

namespace detail {

// Value providers compute the rectangle functional V(R) for rectangles made
// of a fixed leading box (all active axes but the last) and a last-axis
// interval [a, b]. Copies are independent, one per worker.

// prod_i avg_R f_i, times |R|^e.
class AverageProvider {
 public:
  AverageProvider(std::vector<const PrefixSum*> sums, double exponent)
      : sums_(std::move(sums)), exponent_(exponent) {
    const auto& s = sums_.front()->shape();
    n_last_ = s.extent[s.last_axis()];
    h_last_ = s.cell_size[s.last_axis()];
    cell_vol_ = s.cell_volume();
    table_.resize(sums_.size() * (n_last_ + 1));
  }

  void set_leading(const Rect& r) {
    const auto& s = sums_.front()->shape();
    lead_cells_ = 1;
    for (int k = 0; k + 1 < s.dims; ++k) lead_cells_ *= r.side(k);
    for (std::size_t i = 0; i < sums_.size(); ++i)
      for (std::size_t j = 0; j <= n_last_; ++j) table_[i * (n_last_ + 1) + j] = sums_[i]->leading_sum(r, j);
  }

  double value(std::size_t a, std::size_t b) const {
    std::size_t cells = lead_cells_ * (b - a + 1);
    double v = 1.0;
    for (std::size_t i = 0; i < sums_.size(); ++i) {
      const long double* t = &table_[i * (n_last_ + 1)];
      double raw = std::max(0.0, static_cast<double>(t[b + 1] - t[a]));
      v *= raw / static_cast<double>(cells);
    }
    if (exponent_ != 0.0) v *= std::pow(static_cast<double>(cells) * cell_vol_, exponent_);
    return v;
  }

 private:
  std::vector<const PrefixSum*> sums_;
  double exponent_;
  std::size_t n_last_ = 0;
  double h_last_ = 1.0;
  double cell_vol_ = 1.0;
  std::size_t lead_cells_ = 1;
  std::vector<long double> table_;
};

// phi(|R|) prod_i ||f_i||_{Psi_i, R}.
class OrliczProvider {
 public:
  OrliczProvider(std::vector<const GridFunction*> fs, std::vector<YoungFunction> psi, double exponent)
      : fs_(std::move(fs)), psi_(std::move(psi)), exponent_(exponent) {}

  void set_leading(const Rect& r) { lead_ = r; }

  double value(std::size_t a, std::size_t b) {
    const auto& s = fs_.front()->shape();
    int last = s.last_axis();
    Rect r = lead_;
    r.lo[last] = a;
    r.hi[last] = b;
    double v = 1.0;
    for (std::size_t i = 0; i < fs_.size(); ++i) {
      buf_.clear();
      const auto& f = *fs_[i];
      for_each_cell(r, s, [&](std::size_t flat) { buf_.push_back(f[flat]); });
      v *= luxemburg_norm(buf_, psi_[i]);
    }
    if (exponent_ != 0.0) v *= std::pow(volume(r, s), exponent_);
    return v;
  }

 private:
  std::vector<const GridFunction*> fs_;
  std::vector<YoungFunction> psi_;
  double exponent_;
  Rect lead_;
  std::vector<double> buf_;
};

// Leading boxes of a product basis: every combination of axis intervals on
// all active axes but the last.
inline std::vector<Rect> leading_boxes(const Basis& b, const GridShape& s) {
  std::vector<Rect> out;
  int lead_axes = s.dims - 1;
  std::vector<Interval> a0 = lead_axes >= 1 ? axis_intervals(b, s, 0) : std::vector<Interval>{{0, 0}};
  std::vector<Interval> a1 = lead_axes >= 2 ? axis_intervals(b, s, 1) : std::vector<Interval>{{0, 0}};
  for (auto [l0, h0] : a0)
    for (auto [l1, h1] : a1) {
      Rect r;
      r.lo = {l0, l1, 0};
      r.hi = {h0, h1, 0};
      out.push_back(r);
    }
  return out;
}

inline void max_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
}

// Writes best[j] into every cell of the leading box at last-axis index j.
inline void paint_leading(const Rect& lead, const GridShape& s, const std::vector<double>& best,
                          std::vector<double>& out) {
  int last = s.last_axis();
  Rect r = lead;
  r.lo[last] = 0;
  r.hi[last] = s.extent[last] - 1;
  std::size_t n = s.extent[last];
  // Row-major with the last active axis fastest: runs of length n.
  for_each_cell(r, s, [&](std::size_t flat) {
    std::size_t j = flat % n;
    out[flat] = std::max(out[flat], best[j]);
  });
}

template <class Provider>
std::vector<double> sweep_product(const GridShape& s, const Basis& b, const Provider& proto) {
  int last = s.last_axis();
  std::size_t n = s.extent[last];
  auto leads = leading_boxes(b, s);
  auto lasts = axis_intervals(b, s, last);
  std::vector<std::uint8_t> allowed;
  if (b.kind == BasisKind::AllRects) {
    allowed.assign(n * n, 0);
    for (auto [a, e] : lasts) allowed[a * n + e] = 1;
  }
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(1, leads.size())));
  std::vector<std::vector<double>> partial(workers);
  parallel_chunks(leads.size(), [&](unsigned w, std::size_t begin, std::size_t end) {
    Provider p = proto;
    auto& out = partial[w];
    out.assign(s.cell_count(), 0.0);
    std::vector<double> best(n);
    for (std::size_t li = begin; li < end; ++li) {
      p.set_leading(leads[li]);
      std::fill(best.begin(), best.end(), 0.0);
      if (b.kind == BasisKind::AllRects) {
        // best[j] = max_{a <= j} max_{e >= j} V(a, e), one O(n^2) pass.
        for (std::size_t a = 0; a < n; ++a) {
          double run = 0.0;
          for (std::size_t e = n; e-- > a;) {
            if (allowed[a * n + e]) run = std::max(run, p.value(a, e));
            best[e] = std::max(best[e], run);
          }
        }
      } else {
        for (auto [a, e] : lasts) {
          double v = p.value(a, e);
          for (std::size_t j = a; j <= e; ++j) best[j] = std::max(best[j], v);
        }
      }
      paint_leading(leads[li], s, best, out);
    }
  });
  std::vector<double> out(s.cell_count(), 0.0);
  for (auto& part : partial)
    if (!part.empty()) max_into(out, part);
  return out;
}

template <class Provider>
std::vector<double> sweep_cubes(const GridShape& s, const Basis& b, const Provider& proto) {
  auto rects = enumerate_basis(b, s);
  int last = s.last_axis();
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(1, rects.size())));
  std::vector<std::vector<double>> partial(workers);
  parallel_chunks(rects.size(), [&](unsigned w, std::size_t begin, std::size_t end) {
    Provider p = proto;
    auto& out = partial[w];
    out.assign(s.cell_count(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const Rect& r = rects[i];
      p.set_leading(r);
      double v = p.value(r.lo[last], r.hi[last]);
      for_each_cell(r, s, [&](std::size_t flat) { out[flat] = std::max(out[flat], v); });
    }
  });
  std::vector<double> out(s.cell_count(), 0.0);
  for (auto& part : partial)
    if (!part.empty()) max_into(out, part);
  return out;
}

template <class Provider>
std::vector<double> sweep(const GridShape& s, const Basis& b, const Provider& proto) {
  if (b.kind == BasisKind::AllRects && s.dims == 3)
    for (int k = 0; k < 3; ++k)
      if (s.extent[k] > 12)
        throw ShapeError("exact all-rectangle maximal functions in 3D are limited to 12 cells per axis");
  return b.is_product() ? sweep_product(s, b, proto) : sweep_cubes(s, b, proto);
}

// Per-point scan: for each cell, every basis rectangle containing it.
template <class Provider>
std::vector<double> scan_reference(const GridShape& s, const Basis& b, const Provider& proto) {
  int last = s.last_axis();
  std::vector<double> out(s.cell_count(), 0.0);
  Provider p = proto;
  if (b.is_product()) {
    std::array<std::vector<Interval>, kMaxDims> axes;
    for (int k = 0; k < kMaxDims; ++k) axes[k] = axis_intervals(b, s, k);
    for (std::size_t f = 0; f < out.size(); ++f) {
      Index3 x = s.unflatten(f);
      std::array<std::vector<Interval>, kMaxDims> hit;
      for (int k = 0; k < kMaxDims; ++k)
        for (auto iv : axes[k])
          if (iv.first <= x[k] && x[k] <= iv.second) hit[k].push_back(iv);
      double best = 0.0;
      for (auto i0 : hit[0])
        for (auto i1 : hit[1])
          for (auto i2 : hit[2]) {
            Rect r;
            r.lo = {i0.first, i1.first, i2.first};
            r.hi = {i0.second, i1.second, i2.second};
            p.set_leading(r);
            best = std::max(best, p.value(r.lo[last], r.hi[last]));
          }
      out[f] = best;
    }
    return out;
  }
  auto rects = enumerate_basis(b, s);
  for (std::size_t f = 0; f < out.size(); ++f) {
    Index3 x = s.unflatten(f);
    double best = 0.0;
    for (const auto& r : rects) {
      if (!r.contains(x)) continue;
      p.set_leading(r);
      best = std::max(best, p.value(r.lo[last], r.hi[last]));
    }
    out[f] = best;
  }
  return out;
}

inline void check_inputs(const std::vector<GridFunction>& fs, const MaximalQuery& q) {
  if (fs.empty()) throw ArgumentError("maximal operator needs at least one function");
  if (static_cast<int>(fs.size()) != q.m)
    throw ArgumentError("expected " + std::to_string(q.m) + " functions, got " + std::to_string(fs.size()));
  for (const auto& f : fs) require_same_grid(fs.front(), f);
  q.validate(fs.front().shape().dims);
}

template <class Run>
GridFunction with_average_provider(const std::vector<GridFunction>& fs, const MaximalQuery& q, Run&& run) {
  check_inputs(fs, q);
  const auto& s = fs.front().shape();
  std::vector<PrefixSum> sums;
  sums.reserve(fs.size());
  for (const auto& f : fs) sums.emplace_back(f);
  std::vector<const PrefixSum*> ptrs;
  for (const auto& p : sums) ptrs.push_back(&p);
  AverageProvider proto(ptrs, q.alpha / s.dims);
  return GridFunction(s, run(s, q.basis, proto));
}

template <class Run>
GridFunction with_orlicz_provider(const std::vector<GridFunction>& fs, const MaximalQuery& q, Run&& run) {
  check_inputs(fs, q);
  const auto& s = fs.front().shape();
  std::vector<YoungFunction> psi = q.orlicz;
  if (psi.empty()) psi.assign(fs.size(), young::identity());
  std::vector<const GridFunction*> ptrs;
  for (const auto& f : fs) ptrs.push_back(&f);
  for (const auto& p : psi) p.unit_level();
  OrliczProvider proto(ptrs, psi, q.scale_exponent(s.dims));
  return GridFunction(s, run(s, q.basis, proto));
}

}  // namespace detail

/// M_{B,alpha}(f_1..f_m)(x) = max over basis rectangles R containing x of
/// prod_i |R|^{-(1 - alpha/(mn))} int_R f_i.
inline GridFunction multilinear_fractional_maximal(const std::vector<GridFunction>& fs, const MaximalQuery& q) {
  return detail::with_average_provider(
      fs, q, [](const auto& s, const auto& b, const auto& p) { return detail::sweep(s, b, p); });
}

inline GridFunction strong_maximal(const GridFunction& f, const Basis& basis = Basis::all()) {
  MaximalQuery q;
  q.basis = basis;
  return multilinear_fractional_maximal({f}, q);
}

/// max over R containing x of phi(|R|) prod_i ||f_i||_{Psi_i, R} with
/// phi(t) = t^e. Norms always go through the Luxemburg solver, also for
/// Psi(t) = t.
inline GridFunction orlicz_maximal(const std::vector<GridFunction>& fs, const MaximalQuery& q) {
  return detail::with_orlicz_provider(
      fs, q, [](const auto& s, const auto& b, const auto& p) { return detail::sweep(s, b, p); });
}

/// Independent per-point implementation, for cross-checking the sweeps.
inline GridFunction maximal_reference(const std::vector<GridFunction>& fs, const MaximalQuery& q) {
  auto run = [](const auto& s, const auto& b, const auto& p) { return detail::scan_reference(s, b, p); };
  if (q.orlicz.empty() && !q.phi_exponent) return detail::with_average_provider(fs, q, run);
  return detail::with_orlicz_provider(fs, q, run);
}

/// Physical measure of {Mf > lambda}.
inline double level_set_measure(const GridFunction& mf, double lambda) {
  std::size_t count = 0;
  for (double v : mf.values())
    if (v > lambda) ++count;
  return static_cast<double>(count) * mf.shape().cell_volume();
}

}  // namespace strongmax
