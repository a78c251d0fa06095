#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "strongmax/errors.hpp"
#include "strongmax/grid.hpp"
#include "strongmax/maximal.hpp"
#include "strongmax/report.hpp"

namespace strongmax {

/// Ordered rectangles on one grid, with an optional integer tag per rectangle.
struct RectFamily {
  GridShape shape;
  std::vector<Rect> rects;
  std::vector<long> tags;

  std::size_t size() const { return rects.size(); }

  void validate() const {
    if (rects.empty()) throw ArgumentError("rectangle family is empty");
    if (!tags.empty() && tags.size() != rects.size()) throw ArgumentError("tag count does not match family");
    for (const auto& r : rects) check_bounds(r, shape);
  }
};

/// CSV family: one rectangle per line as lo_0,hi_0,...,lo_{n-1},hi_{n-1}
/// (inclusive cell indices), optionally followed by a tag. Blank lines and
/// lines starting with '#' are ignored.
inline RectFamily parse_rect_family(std::istream& is, const GridShape& shape) {
  RectFamily fam;
  fam.shape = shape;
  std::string line;
  std::size_t lineno = 0;
  bool any_tag = false;
  while (std::getline(is, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<long long> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        long long x = std::stoll(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing");
        v.push_back(x);
      } catch (const std::exception&) {
        throw ParseError("family line " + std::to_string(lineno) + ": bad integer '" + cell + "'");
      }
    }
    std::size_t need = 2 * static_cast<std::size_t>(shape.dims);
    if (v.size() != need && v.size() != need + 1)
      throw ParseError("family line " + std::to_string(lineno) + ": expected " + std::to_string(need) +
                       " indices (plus optional tag)");
    Rect r;
    for (int k = 0; k < shape.dims; ++k) {
      if (v[2 * k] < 0 || v[2 * k + 1] < 0) throw ParseError("family line " + std::to_string(lineno) + ": negative index");
      r.lo[k] = static_cast<std::size_t>(v[2 * k]);
      r.hi[k] = static_cast<std::size_t>(v[2 * k + 1]);
    }
    if (!in_bounds(r, shape)) throw BoundsError("family line " + std::to_string(lineno) + ": rectangle outside grid");
    fam.rects.push_back(r);
    fam.tags.push_back(v.size() > need ? static_cast<long>(v.back()) : 0);
    any_tag = any_tag || v.size() > need;
  }
  if (!any_tag) fam.tags.clear();
  if (fam.rects.empty()) throw ArgumentError("rectangle family is empty");
  return fam;
}

struct PackingPoint {
  double delta;
  double integral;  // over the kept union
  bool holds;       // integral <= 2 |union|
};

struct SelectionResult {
  std::vector<std::size_t> kept;  // input indices, in selection order
  double union_before = 0.0;
  double union_after = 0.0;
  double c_emp = 1.0;
  GridFunction overlap;  // sum of kept indicators
  std::size_t max_overlap = 0;
  std::vector<PackingPoint> packing;
  std::optional<double> max_delta;  // none when n = 1
  std::vector<VerificationReport> checks;

  bool all_checks_hold() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.failed(); });
  }

  json to_json() const {
    json j;
    j["kept"] = kept;
    j["union_before"] = num(union_before);
    j["union_after"] = num(union_after);
    j["c_emp"] = num(c_emp);
    j["max_overlap"] = max_overlap;
    if (!packing.empty() || max_delta) {
      json p = json::array();
      for (const auto& pt : packing)
        p.push_back({{"delta", num(pt.delta)}, {"integral", num(pt.integral)}, {"holds", pt.holds}});
      j["packing"] = p;
      j["max_feasible_delta"] = max_delta ? num(*max_delta) : json("n/a");
    } else {
      j["packing"] = "n=1 not applicable";
    }
    json c = json::array();
    for (const auto& ch : checks) c.push_back(ch.to_json());
    j["checks"] = c;
    return j;
  }
};

namespace detail {

inline std::size_t count_marked(const Rect& r, const GridShape& s, const std::vector<std::uint8_t>& mark) {
  std::size_t c = 0;
  for_each_cell(r, s, [&](std::size_t f) { c += mark[f]; });
  return c;
}

inline double packing_integral(const std::vector<std::size_t>& count, double delta, int n, double cell) {
  long double acc = 0.0L;
  double e = 1.0 / (n - 1);
  for (auto c : count)
    if (c) acc += std::exp(std::pow(delta * static_cast<double>(c), e));
  return static_cast<double>(acc) * cell;
}

// |A_i ∩ (A_1 ∪ ... ∪ A_{i-1})| <= theta |A_i| along a sequence.
inline VerificationReport scattered_check(const std::vector<Rect>& seq, const GridShape& s, double theta) {
  VerificationReport r;
  r.id = "scattered";
  r.config = {{"theta", num(theta)}, {"count", seq.size()}};
  std::vector<std::uint8_t> mark(s.cell_count(), 0);
  double worst = 0.0;
  for (const auto& a : seq) {
    double frac = static_cast<double>(count_marked(a, s, mark)) / static_cast<double>(a.cells());
    worst = std::max(worst, frac);
    for_each_cell(a, s, [&](std::size_t f) { mark[f] = 1; });
  }
  r.set_values(worst, theta);
  r.status = worst <= theta ? Status::Pass : Status::Fail;
  return r;
}

}  // namespace detail

/// Greedy covering selection: rectangles in volume-descending order (ties by
/// input order) are kept when at most theta of their volume is already
/// covered by the kept ones.
inline SelectionResult cf_select(const RectFamily& fam, double theta = 0.5) {
  fam.validate();
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");
  const auto& s = fam.shape;
  std::vector<std::size_t> order(fam.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fam.rects[a].cells() > fam.rects[b].cells(); });

  SelectionResult res;
  std::vector<std::uint8_t> covered(s.cell_count(), 0), all(s.cell_count(), 0);
  std::vector<std::size_t> count(s.cell_count(), 0);
  for (auto i : order) {
    const Rect& r = fam.rects[i];
    for_each_cell(r, s, [&](std::size_t f) { all[f] = 1; });
    auto hit = detail::count_marked(r, s, covered);
    if (static_cast<double>(hit) <= theta * static_cast<double>(r.cells())) {
      res.kept.push_back(i);
      for_each_cell(r, s, [&](std::size_t f) {
        covered[f] = 1;
        ++count[f];
      });
    }
  }
  double cell = s.cell_volume();
  auto cells_of = [](const std::vector<std::uint8_t>& m) { return std::accumulate(m.begin(), m.end(), std::size_t{0}); };
  std::size_t n_all = cells_of(all), n_kept = cells_of(covered);
  res.union_before = n_all * cell;
  res.union_after = n_kept * cell;
  res.c_emp = static_cast<double>(n_all) / static_cast<double>(n_kept);
  std::vector<double> cv(count.begin(), count.end());
  res.overlap = GridFunction(s, cv);
  res.max_overlap = *std::max_element(count.begin(), count.end());

  // Exponential packing over the kept union.
  if (s.dims >= 2) {
    double cap = 2.0 * res.union_after;
    for (int i = 1; i <= 20; ++i) {
      double d = 0.05 * i;
      double v = detail::packing_integral(count, d, s.dims, cell);
      res.packing.push_back({d, v, v <= cap});
    }
    double lo = 0.0, hi = 1.0;
    while (detail::packing_integral(count, hi, s.dims, cell) <= cap) hi *= 2.0;
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (detail::packing_integral(count, mid, s.dims, cell) <= cap ? lo : hi) = mid;
    }
    res.max_delta = lo;
  }

  std::vector<Rect> kept_seq;
  double kept_sum = 0.0;
  for (auto i : res.kept) {
    kept_seq.push_back(fam.rects[i]);
    kept_sum += volume(fam.rects[i], s);
  }
  res.checks.push_back(detail::scattered_check(kept_seq, s, theta));
  {
    // |union kept| >= (1 - theta) sum |kept|, through the disjoint pieces
    // E_i = R_i minus the earlier kept rectangles.
    VerificationReport r;
    r.id = "disjointification";
    std::vector<std::uint8_t> mark(s.cell_count(), 0);
    bool each = true;
    double pieces = 0.0;
    for (const auto& a : kept_seq) {
      double fresh = static_cast<double>(a.cells() - detail::count_marked(a, s, mark));
      each = each && fresh >= (1.0 - theta) * static_cast<double>(a.cells()) - 1e-9;
      pieces += fresh * cell;
      for_each_cell(a, s, [&](std::size_t f) { mark[f] = 1; });
    }
    r.set_values((1.0 - theta) * kept_sum, res.union_after);
    r.data = {{"pieces_total", num(pieces)}, {"each_piece_bound", each}};
    r.status = each && std::abs(pieces - res.union_after) <= 1e-9 * res.union_after &&
                       r.lhs <= r.rhs * (1 + 1e-12)
                   ? Status::Pass
                   : Status::Fail;
    res.checks.push_back(r);
  }
  {
    // Every discarded R has avg_R 1_E > theta, so the whole family lies in
    // E ∪ {M 1_E > theta}.
    VerificationReport r;
    r.id = "union_comparability";
    r.config = {{"theta", num(theta)}};
    try {
      GridFunction ind(s, std::vector<double>(covered.begin(), covered.end()));
      auto m = strong_maximal(ind, Basis::all());
      std::size_t lvl = 0;
      for (std::size_t f = 0; f < covered.size(); ++f) lvl += covered[f] || m[f] > theta;
      double bound = static_cast<double>(lvl) / static_cast<double>(n_kept);
      r.set_values(res.c_emp, bound);
      r.status = res.c_emp <= bound * (1 + 1e-12) ? Status::Pass : Status::Fail;
    } catch (const ShapeError& e) {
      r.status = Status::Skipped;
      r.note = std::string("grid too large for the exact level set: ") + e.what();
    }
    res.checks.push_back(r);
  }
  return res;
}

/// Scattered subsequence: A_i is kept (in input order) when at most lambda
/// of its volume meets the earlier kept sets. Reports property (a), the
/// kept-set identity (b), and the least C with
/// w(∪_{s<j} A_s) <= C [w(∪_{s<i} A_s) + w(∪_{i<=s<j, kept} A_s)]
/// over all 1 <= i < j <= N+1 (c).
inline SelectionResult scattered_select(const RectFamily& fam, double lambda, const GridFunction& w) {
  fam.validate();
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0,1)");
  const auto& s = fam.shape;
  if (!(w.shape() == s)) throw ShapeError("weight and family live on different grids");
  std::size_t N = fam.size();

  SelectionResult res;
  std::vector<std::uint8_t> covered(s.cell_count(), 0), all(s.cell_count(), 0);
  std::vector<std::size_t> count(s.cell_count(), 0);
  std::vector<bool> is_kept(N, false);
  for (std::size_t i = 0; i < N; ++i) {
    const Rect& r = fam.rects[i];
    for_each_cell(r, s, [&](std::size_t f) { all[f] = 1; });
    auto hit = detail::count_marked(r, s, covered);
    if (static_cast<double>(hit) <= lambda * static_cast<double>(r.cells())) {
      res.kept.push_back(i);
      is_kept[i] = true;
      for_each_cell(r, s, [&](std::size_t f) {
        covered[f] = 1;
        ++count[f];
      });
    }
  }
  double cell = s.cell_volume();
  auto n_all = std::accumulate(all.begin(), all.end(), std::size_t{0});
  auto n_kept = std::accumulate(covered.begin(), covered.end(), std::size_t{0});
  res.union_before = n_all * cell;
  res.union_after = n_kept * cell;
  res.c_emp = static_cast<double>(n_all) / static_cast<double>(n_kept);
  res.overlap = GridFunction(s, std::vector<double>(count.begin(), count.end()));
  res.max_overlap = *std::max_element(count.begin(), count.end());

  std::vector<Rect> kept_seq;
  for (auto i : res.kept) kept_seq.push_back(fam.rects[i]);
  auto a = detail::scattered_check(kept_seq, s, lambda);
  a.id = "scattered (a)";
  res.checks.push_back(a);
  {
    VerificationReport b;
    b.id = "kept identity (b)";
    bool ok = std::is_sorted(res.kept.begin(), res.kept.end()) &&
              std::adjacent_find(res.kept.begin(), res.kept.end()) == res.kept.end();
    b.status = ok ? Status::Pass : Status::Fail;
    b.data = {{"kept", res.kept.size()}, {"input", N}};
    res.checks.push_back(b);
  }
  {
    // first[c]: earliest input index covering c (N if none). U[j] =
    // w(∪_{s<j} A_s) by bucketing w over first[].
    std::size_t cells = s.cell_count();
    std::vector<std::size_t> first(cells, N), first_kept(cells, N);
    for (std::size_t i = N; i-- > 0;)
      for_each_cell(fam.rects[i], s, [&](std::size_t f) { first[f] = i; });
    auto prefix = [&](const std::vector<std::size_t>& idx) {
      std::vector<long double> bucket(N + 1, 0.0L), out(N + 1, 0.0L);
      for (std::size_t c = 0; c < cells; ++c) bucket[idx[c]] += w[c];
      for (std::size_t j = 1; j <= N; ++j) out[j] = out[j - 1] + bucket[j - 1];
      return out;
    };
    auto U = prefix(first);
    double best = 0.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = N; i-- > 0;) {
      if (is_kept[i])
        for_each_cell(fam.rects[i], s, [&](std::size_t f) { first_kept[f] = i; });
      auto K = prefix(first_kept);  // K[j] = w(∪_{i<=s<j, kept} A_s)
      for (std::size_t j = i + 1; j <= N; ++j) {
        long double den = U[i] + K[j];
        long double lhs = U[j];
        if (lhs == 0.0L) continue;
        double ratio = den > 0.0L ? static_cast<double>(lhs / den) : std::numeric_limits<double>::infinity();
        if (ratio > best) {
          best = ratio;
          bi = i;
          bj = j;
        }
      }
    }
    VerificationReport c;
    c.id = "union control (c)";
    c.set_values(best, 1.0);
    c.data = {{"min_constant", num(best)}, {"i", bi + 1}, {"j", bj + 1}};
    c.status = std::isfinite(best) ? Status::Pass : Status::Fail;
    if (!std::isfinite(best)) c.note = "weight vanishes on kept sets that carry the union mass";
    res.checks.push_back(c);
  }
  return res;
}

}  // namespace strongmax
