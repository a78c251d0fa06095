#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/grid.hpp"
#include "strongmax/maximal.hpp"
#include "strongmax/orlicz.hpp"
#include "strongmax/parallel.hpp"
#include "strongmax/quadrature.hpp"
#include "strongmax/report.hpp"
#include "strongmax/rng.hpp"

namespace strongmax {

/// Threshold separating "finite" from "unbounded" grid constants.
inline constexpr double kWeightCap = 1e6;

/// p' = p / (p - 1); infinite for p = 1.
inline double conjugate_exponent(double p) {
  if (!(p >= 1.0)) throw DomainError("exponent must be >= 1");
  return p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
}

inline void require_positive(const GridFunction& w, const char* what = "weight") {
  for (double v : w.values())
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be strictly positive");
}

inline GridFunction pow_weight(const GridFunction& w, double e) {
  return w.map([e](double x) { return std::pow(x, e); });
}

/// w(S) for a cell set.
inline double weighted_measure(const GridFunction& w, const CellSet& E) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (E.contains(i)) acc += w[i];
  return acc * w.shape().cell_volume();
}

/// (w_1..w_m) with exponents p_i >= 1, q > 0 and order alpha >= 0.
struct WeightVector {
  std::vector<GridFunction> w;
  std::vector<double> p;
  double q = 1.0;
  double alpha = 0.0;

  std::size_t m() const { return w.size(); }

  double p_total() const {
    double inv = 0.0;
    for (double pi : p) inv += 1.0 / pi;
    return 1.0 / inv;
  }

  void validate() const {
    if (w.empty()) throw ArgumentError("weight vector is empty");
    if (w.size() != p.size()) throw ArgumentError("need one exponent per weight");
    for (double pi : p)
      if (!(pi >= 1.0)) throw DomainError("exponents p_i must be >= 1");
    if (!(q > 0.0)) throw DomainError("q must be positive");
    if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
    for (const auto& wi : w) {
      require_same_grid(w.front(), wi);
      require_positive(wi);
    }
  }

  /// nu_w = prod w_i.
  GridFunction nu() const {
    std::vector<double> v(w.front().size(), 1.0);
    for (const auto& wi : w)
      for (std::size_t c = 0; c < v.size(); ++c) v[c] *= wi[c];
    return GridFunction(w.front().shape(), std::move(v));
  }

  /// nu-hat_w = prod w_i^(p / p_i).
  GridFunction nu_hat() const {
    double pt = p_total();
    std::vector<double> v(w.front().size(), 1.0);
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t c = 0; c < v.size(); ++c) v[c] *= std::pow(w[i][c], pt / p[i]);
    return GridFunction(w.front().shape(), std::move(v));
  }
};

/// One factor (avg_R g)^e, or (min_R g)^e when use_min is set.
struct AverageFactor {
  GridFunction g;
  double exponent = 1.0;
  bool use_min = false;
};

struct SupResult {
  double value = 0.0;
  Rect witness;

  json to_json() const {
    json lo = json::array(), hi = json::array();
    for (int k = 0; k < kMaxDims; ++k) {
      lo.push_back(witness.lo[k]);
      hi.push_back(witness.hi[k]);
    }
    return {{"value", num(value)}, {"witness_lo", lo}, {"witness_hi", hi}};
  }
};

/// sup over the basis of |R|^beta prod_k (avg_R g_k)^{e_k}. Ties keep the
/// first rectangle in enumeration order, so the witness is deterministic.
inline SupResult sup_average_product(const std::vector<AverageFactor>& fs, const Basis& b,
                                     double volume_exponent = 0.0) {
  if (fs.empty()) throw ArgumentError("no factors");
  const auto& s = fs.front().g.shape();
  for (const auto& f : fs) require_same_grid(fs.front().g, f.g);
  std::vector<PrefixSum> sums;
  for (const auto& f : fs) sums.emplace_back(f.g);
  auto eval = [&](const Rect& r) {
    double v = volume_exponent != 0.0 ? std::pow(volume(r, s), volume_exponent) : 1.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      double base;
      if (fs[k].use_min) {
        base = std::numeric_limits<double>::infinity();
        for_each_cell(r, s, [&](std::size_t c) { base = std::min(base, fs[k].g[c]); });
      } else {
        base = sums[k].average(r);
      }
      v *= std::pow(base, fs[k].exponent);
    }
    return v;
  };

  if (!b.is_product()) {
    SupResult best{-1.0, {}};
    for_each_rect(b, s, [&](const Rect& r) {
      double v = eval(r);
      if (v > best.value) best = {v, r};
    });
    return best;
  }
  std::array<std::vector<Interval>, kMaxDims> axes;
  for (int k = 0; k < kMaxDims; ++k) axes[k] = axis_intervals(b, s, k);
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), axes[0].size()));
  std::vector<SupResult> partial(std::max(1u, workers), SupResult{-1.0, {}});
  parallel_chunks(axes[0].size(), [&](unsigned w, std::size_t begin, std::size_t end) {
    SupResult best{-1.0, {}};
    Rect r;
    for (std::size_t i = begin; i < end; ++i)
      for (auto [a1, b1] : axes[1])
        for (auto [a2, b2] : axes[2]) {
          r.lo = {axes[0][i].first, a1, a2};
          r.hi = {axes[0][i].second, b1, b2};
          double v = eval(r);
          if (v > best.value) best = {v, r};
        }
    partial[w] = best;
  });
  SupResult best{-1.0, {}};
  for (const auto& p : partial)
    if (p.value > best.value) best = p;
  return best;
}

/// [w]_{A_p,B} = sup (avg w)(avg w^(1-p'))^(p/p').
inline SupResult ap_constant_detail(const GridFunction& w, double p, const Basis& b = Basis::all()) {
  if (!(p > 1.0)) throw DomainError("A_p needs p > 1");
  require_positive(w);
  double pp = conjugate_exponent(p);
  return sup_average_product({{w, 1.0}, {pow_weight(w, 1.0 - pp), p / pp}}, b);
}

inline double ap_constant(const GridFunction& w, double p, const Basis& b = Basis::all()) {
  return ap_constant_detail(w, p, b).value;
}

/// [w]_{A_(p,q)} = sup (avg nu^q)^(1/q) prod (avg w_i^(-p_i'))^(1/p_i'),
/// with (inf_R w_i)^(-1) for p_i = 1.
inline SupResult multi_weight_constant_apq_detail(const WeightVector& wv, const Basis& b = Basis::all()) {
  wv.validate();
  std::vector<AverageFactor> fs{{pow_weight(wv.nu(), wv.q), 1.0 / wv.q}};
  for (std::size_t i = 0; i < wv.m(); ++i) {
    if (wv.p[i] == 1.0) {
      fs.push_back({wv.w[i], -1.0, true});
    } else {
      double pp = conjugate_exponent(wv.p[i]);
      fs.push_back({pow_weight(wv.w[i], -pp), 1.0 / pp});
    }
  }
  return sup_average_product(fs, b);
}

inline double multi_weight_constant_apq(const WeightVector& wv, const Basis& b = Basis::all()) {
  return multi_weight_constant_apq_detail(wv, b).value;
}

/// [w]_{A_p-vec} = sup (avg nu-hat) prod (avg w_i^(1-p_i'))^(p/p_i'),
/// with (inf_R w_i)^(-p) for p_i = 1.
inline SupResult multi_weight_constant_ap_detail(const WeightVector& wv, const Basis& b = Basis::all()) {
  wv.validate();
  double pt = wv.p_total();
  std::vector<AverageFactor> fs{{wv.nu_hat(), 1.0}};
  for (std::size_t i = 0; i < wv.m(); ++i) {
    if (wv.p[i] == 1.0) {
      fs.push_back({wv.w[i], -pt, true});
    } else {
      double pp = conjugate_exponent(wv.p[i]);
      fs.push_back({pow_weight(wv.w[i], 1.0 - pp), pt / pp});
    }
  }
  return sup_average_product(fs, b);
}

inline double multi_weight_constant_ap(const WeightVector& wv, const Basis& b = Basis::all()) {
  return multi_weight_constant_ap_detail(wv, b).value;
}

/// sup |R|^(alpha/n + 1/q - 1/p) (avg v)^(1/q) prod (avg w_i^((1-p_i') r))^(1/(r p_i')).
inline SupResult power_bump_check(const WeightVector& wv, const GridFunction& v, double r, const Basis& b = Basis::all()) {
  if (!(r > 1.0)) throw DomainError("power bump needs r > 1");
  wv.validate();
  require_same_grid(wv.w.front(), v);
  require_positive(v, "v");
  int n = v.shape().dims;
  std::vector<AverageFactor> fs{{v, 1.0 / wv.q}};
  for (std::size_t i = 0; i < wv.m(); ++i) {
    double pp = conjugate_exponent(wv.p[i]);
    if (std::isinf(pp)) throw DomainError("power bump needs p_i > 1");
    fs.push_back({pow_weight(wv.w[i], (1.0 - pp) * r), 1.0 / (r * pp)});
  }
  double beta = wv.alpha / n + 1.0 / wv.q - 1.0 / wv.p_total();
  return sup_average_product(fs, b, beta);
}

// ---------------------------------------------------------------------------
// A_infinity

struct AInftyReport {
  bool in_class = true;
  double fitted_delta = 1.0;  // log-log slope over the deepest scales
  double delta = 1.0;         // reported exponent from the sweep grid
  double constant = 1.0;      // C(delta)
  std::vector<double> fractions;  // |E|/|R| per depth
  std::vector<double> profile;    // max w(E)/w(R) per depth
  std::vector<double> deltas;
  std::vector<double> c_of_delta;
  Rect witness_r, witness_e;

  json to_json() const {
    return {{"class", in_class ? "A_infty" : "not A_infty"},
            {"fitted_delta", num(fitted_delta)},
            {"delta", num(delta)},
            {"constant", num(constant)},
            {"fractions", num_array(fractions)},
            {"profile", num_array(profile)},
            {"deltas", num_array(deltas)},
            {"c_of_delta", num_array(c_of_delta)}};
  }
};

/// Sweeps pairs (R, E) with R from the basis and E a one-cell-thick slab at
/// either end of R along one axis, so |E|/|R| = 1/side. Sides 2^j give the
/// profile y_j = max w(E)/w(R) at x_j = 2^-j. Then
/// C(delta) = max_j y_j / x_j^delta for delta in {0.05, ..., 1}, and the
/// slope of log y against log x over the three deepest scales. A slope below
/// 0.05 means C(delta) grows without bound as the scale refines for every
/// delta in the sweep: "fails A_inf".
inline AInftyReport a_infty_classify(const GridFunction& w, const Basis& b = Basis::dyadic(), int max_depth = 16) {
  require_positive(w);
  const auto& s = w.shape();
  PrefixSum ps(w);
  std::vector<double> best(max_depth + 1, 0.0);
  std::vector<Rect> best_r(max_depth + 1), best_e(max_depth + 1);
  for_each_rect(b, s, [&](const Rect& r) {
    double wr = ps.raw_sum(r);
    if (!(wr > 0.0)) return;
    for (int k = 0; k < s.dims; ++k) {
      std::size_t side = r.side(k);
      if (side < 2 || !is_power_of_two(side)) continue;
      int j = std::countr_zero(side);
      if (j > max_depth) continue;
      Rect lo = r, hi = r;
      lo.hi[k] = r.lo[k];
      hi.lo[k] = r.hi[k];
      for (const Rect& e : {lo, hi}) {
        double y = ps.raw_sum(e) / wr;
        if (y > best[j]) {
          best[j] = y;
          best_r[j] = r;
          best_e[j] = e;
        }
      }
    }
  });
  AInftyReport rep;
  std::vector<int> depths;
  for (int j = 1; j <= max_depth; ++j)
    if (best[j] > 0.0) {
      depths.push_back(j);
      rep.fractions.push_back(std::ldexp(1.0, -j));
      rep.profile.push_back(best[j]);
    }
  for (int i = 1; i <= 20; ++i) rep.deltas.push_back(0.05 * i);
  for (double d : rep.deltas) {
    double c = 0.0;
    for (std::size_t i = 0; i < rep.profile.size(); ++i) c = std::max(c, rep.profile[i] / std::pow(rep.fractions[i], d));
    rep.c_of_delta.push_back(c);
  }
  if (depths.size() < 2) {
    // Too few scales to see any decay; Lebesgue-like by default.
    rep.fitted_delta = 1.0;
  } else {
    std::size_t k = std::min<std::size_t>(3, depths.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = depths.size() - k; i < depths.size(); ++i) {
      double x = std::log(rep.fractions[i]), y = std::log(rep.profile[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.fitted_delta = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    int deepest = depths.back();
    rep.witness_r = best_r[deepest];
    rep.witness_e = best_e[deepest];
  }
  rep.in_class = rep.fitted_delta >= 0.05;
  // Largest sweep exponent not exceeding the fitted slope.
  rep.delta = rep.deltas.front();
  rep.constant = rep.c_of_delta.front();
  for (std::size_t i = 0; i < rep.deltas.size(); ++i)
    if (rep.deltas[i] <= rep.fitted_delta + 1e-9) {
      rep.delta = rep.deltas[i];
      rep.constant = rep.c_of_delta[i];
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Dyadic reverse doubling

struct ReverseDoublingReport {
  double d = std::numeric_limits<double>::infinity();
  bool in_class = false;
  Rect parent, child;
};

/// Largest d with d w(I) <= w(J) over dyadic J and children I obtained by
/// halving every side of J (|I| = 2^-n |J|). Membership means d > 1.
inline ReverseDoublingReport reverse_doubling(const GridFunction& w) {
  require_positive(w);
  const auto& s = w.shape();
  for (int k = 0; k < s.dims; ++k)
    if (!is_power_of_two(s.extent[k])) throw ShapeError("reverse doubling needs power-of-two grid extents");
  PrefixSum ps(w);
  ReverseDoublingReport rep;
  bool any = false;
  for_each_rect(Basis::dyadic(), s, [&](const Rect& j) {
    for (int k = 0; k < s.dims; ++k)
      if (j.side(k) < 2) return;
    double wj = ps.raw_sum(j);
    int children = 1 << s.dims;
    for (int c = 0; c < children; ++c) {
      Rect i = j;
      for (int k = 0; k < s.dims; ++k) {
        std::size_t half = j.side(k) / 2;
        if (c >> k & 1)
          i.lo[k] = j.lo[k] + half;
        else
          i.hi[k] = j.lo[k] + half - 1;
      }
      double ratio = wj / ps.raw_sum(i);
      any = true;
      if (ratio < rep.d) {
        rep.d = ratio;
        rep.parent = j;
        rep.child = i;
      }
    }
  });
  if (!any) throw ShapeError("grid has no dyadic parent/child pairs");
  rep.in_class = rep.d > 1.0 + 1e-9;
  return rep;
}

inline double reverse_doubling_constant(const GridFunction& w) { return reverse_doubling(w).d; }

// ---------------------------------------------------------------------------
// Tauberian condition

struct TauberianReport {
  double ratio = 0.0;  // a lower bound for the Tauberian constant
  std::string witness;
  std::size_t sets_tried = 0;
  json to_json() const {
    return {{"lower_bound", num(ratio)}, {"witness", witness}, {"sets_tried", sets_tried},
            {"note", "sup over structured and random sets only: a certified lower bound"}};
  }
};

/// w({M_B 1_E > gamma}) / w(E) for one set E.
inline double tauberian_ratio(const GridFunction& w, const Basis& b, double gamma, const CellSet& E) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
  if (E.count() == 0) throw MeasureError("E must be non-empty");
  const auto& s = w.shape();
  std::vector<double> ind(s.cell_count());
  for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = E.contains(i) ? 1.0 : 0.0;
  auto m = strong_maximal(GridFunction(s, ind), b);
  std::vector<std::uint8_t> level(s.cell_count());
  for (std::size_t i = 0; i < level.size(); ++i) level[i] = m[i] > gamma;
  double we = weighted_measure(w, E);
  return safe_ratio(weighted_measure(w, CellSet(s, level)), we);
}

/// Lower bound for sup_E w({M_B 1_E > gamma}) / w(E) over the whole grid,
/// centred and corner boxes, two-box unions and `trials` random sets.
inline TauberianReport tauberian_constant_estimate(const GridFunction& w, const Basis& b, double gamma, int trials,
                                                   std::uint64_t seed = 1) {
  const auto& s = w.shape();
  TauberianReport rep;
  auto consider = [&](const CellSet& E, const std::string& label) {
    if (E.count() == 0) return;
    double r = tauberian_ratio(w, b, gamma, E);
    ++rep.sets_tried;
    if (r > rep.ratio) {
      rep.ratio = r;
      rep.witness = label;
    }
  };
  auto box = [&](double frac, bool centred) {
    Rect r;
    for (int k = 0; k < s.dims; ++k) {
      std::size_t len = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(s.extent[k] * frac)));
      std::size_t lo = centred ? (s.extent[k] - len) / 2 : 0;
      r.lo[k] = lo;
      r.hi[k] = lo + len - 1;
    }
    return r;
  };
  consider(CellSet::all(s), "whole grid");
  for (double frac : {0.5, 0.25, 0.125, 1.0 / 16}) {
    consider(CellSet::of_rect(s, box(frac, true)), "centred box " + fmt_g(frac));
    consider(CellSet::of_rect(s, box(frac, false)), "corner box " + fmt_g(frac));
  }
  Rng rng = Rng::derive(seed, 0x7a0b);
  auto random_rect = [&](std::size_t max_side) {
    Rect r;
    for (int k = 0; k < s.dims; ++k) {
      std::size_t len = rng.integer(1, std::min<std::size_t>(max_side, s.extent[k]));
      std::size_t lo = rng.integer(0, s.extent[k] - len);
      r.lo[k] = lo;
      r.hi[k] = lo + len - 1;
    }
    return r;
  };
  {
    // Two separated boxes.
    auto a = box(0.125, false);
    Rect bb = a;
    for (int k = 0; k < s.dims; ++k) {
      std::size_t len = a.side(k);
      bb.lo[k] = s.extent[k] - len;
      bb.hi[k] = s.extent[k] - 1;
    }
    std::vector<std::uint8_t> m(s.cell_count(), 0);
    for_each_cell(a, s, [&](std::size_t c) { m[c] = 1; });
    for_each_cell(bb, s, [&](std::size_t c) { m[c] = 1; });
    consider(CellSet(s, m), "two corner boxes");
  }
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> m(s.cell_count(), 0);
    if (t % 2 == 0) {
      int pieces = 1 + static_cast<int>(rng.integer(0, 2));
      for (int i = 0; i < pieces; ++i) for_each_cell(random_rect(std::max<std::size_t>(1, s.extent[0] / 4)), s, [&](std::size_t c) { m[c] = 1; });
    } else {
      Rect r = random_rect(s.extent[0]);
      for_each_cell(r, s, [&](std::size_t c) { m[c] = rng.uniform() < 0.3; });
    }
    consider(CellSet(s, m), "random set " + std::to_string(t));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Power weights |x|^alpha

/// |x|^alpha sampled at cell midpoints; cells whose closure contains the
/// origin get their 16-point per-axis quadrature average instead.
inline GridFunction power_weight(const GridShape& s, double alpha) {
  auto fn = [alpha, d = s.dims](const Point3& x) { return std::pow(euclidean_norm(x, d), alpha); };
  auto touches_origin = [&s](const Index3& c) {
    for (int k = 0; k < s.dims; ++k) {
      double lo = s.origin[k] + static_cast<double>(c[k]) * s.cell_size[k];
      double hi = lo + s.cell_size[k];
      if (lo > 0.0 || hi < 0.0) return false;
    }
    return true;
  };
  return sample_weight(s, fn, touches_origin);
}

struct PowerClassReport {
  bool in_class = false;
  int depth = 0;
  std::vector<double> constants;  // C(d), d = 1..depth
  double decay_ratio = 0.0;       // geometric-mean ratio of late increments
  std::string reason;

  json to_json() const {
    return {{"class", in_class ? "in A_p" : "not in A_p"},
            {"constant", num(constants.empty() ? 0.0 : constants.back())},
            {"decay_ratio", num(decay_ratio)},
            {"reason", reason},
            {"scale_profile", num_array(constants)}};
  }
};

inline int default_power_depth(int n) { return n == 1 ? 20 : n == 2 ? 10 : 6; }

/// A_p classification of |x|^alpha on [0,1]^n. For d = 1..depth the weight
/// is sampled at resolution 2^-d and C(d) is the largest A_p product over
/// the anchored rectangles [0,2^-a_1] x ... x [0,2^-a_n], 0 <= a_k <= d.
/// Inside the class C(d) converges, so its increments decay geometrically;
/// at and beyond the endpoints they stay level or grow. Classified in A_p
/// iff the late increments vanish or shrink by a factor < 0.9 per level.
inline PowerClassReport power_weight_classify(double alpha, double p, int n, int depth = 0) {
  if (n < 1 || n > kMaxDims) throw DomainError("n must be 1, 2 or 3");
  if (!(p > 1.0)) throw DomainError("A_p needs p > 1");
  if (alpha <= -n) throw DomainError("|x|^alpha is not locally integrable for alpha <= -n");
  if (depth <= 0) depth = default_power_depth(n);
  if (depth < 6) throw DomainError("power-weight classification needs depth >= 6");
  double pp = conjugate_exponent(p);
  PowerClassReport rep;
  rep.depth = depth;
  for (int d = 1; d <= depth; ++d) {
    std::size_t cells = std::size_t{1} << d;
    auto s = GridShape::cube(n, cells, 1.0);
    auto w = power_weight(s, alpha);
    PrefixSum pw(w), pd(pow_weight(w, 1.0 - pp));
    double best = 0.0;
    std::array<int, kMaxDims> a{0, 0, 0};
    auto visit = [&](auto&& self, int k) -> void {
      if (k == n) {
        Rect r;
        for (int i = 0; i < n; ++i) r.hi[i] = (cells >> a[i]) - 1;
        best = std::max(best, pw.average(r) * std::pow(pd.average(r), p / pp));
        return;
      }
      for (a[k] = 0; a[k] <= d; ++a[k]) self(self, k + 1);
    };
    visit(visit, 0);
    rep.constants.push_back(best);
  }
  constexpr int kSpan = 4;
  const auto& c = rep.constants;
  double last = c[depth - 1] - c[depth - 2];
  double early = c[depth - 1 - kSpan] - c[depth - 2 - kSpan];
  double scale = c.back();
  if (std::abs(last) <= 1e-9 * scale) {
    rep.in_class = true;
    rep.decay_ratio = 0.0;
    rep.reason = "constant has converged";
  } else if (early <= 1e-12 * scale) {
    rep.in_class = false;
    rep.decay_ratio = std::numeric_limits<double>::infinity();
    rep.reason = "constant started growing at fine scales";
  } else {
    rep.decay_ratio = std::pow(std::abs(last) / early, 1.0 / kSpan);
    rep.in_class = rep.decay_ratio < 0.9;
    rep.reason = rep.in_class ? "increments decay geometrically" : "increments do not decay";
  }
  return rep;
}

}  // namespace strongmax
