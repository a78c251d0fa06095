#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strongmax/errors.hpp"

namespace strongmax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Tri { Yes, No, Unknown };

/// Compact decimal form for labels ("2", "1.5").
inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline double log_plus(double t) { return t > 1.0 ? std::log(t) : 0.0; }

/// Family name plus parameters, as written in config files.
struct YoungSpec {
  std::string family;
  std::vector<double> params;
};

/// A Young function t -> Phi(t) on [0, inf), possibly taking the value +inf.
///
/// Cheap to copy (shared immutable state). Optional closed forms for the
/// inverse and the complementary function bypass the numeric routines.
class YoungFunction {
 public:
  using Map = std::function<double(double)>;

  YoungFunction() : YoungFunction("identity", [](double t) { return t; }, Tri::Yes, [](double y) { return y; }) {}

  YoungFunction(std::string label, Map eval, Tri submultiplicative = Tri::Unknown,
                Map closed_inverse = {}, Map closed_conjugate = {}, YoungSpec spec = {})
      : state_(std::make_shared<State>()) {
    state_->label = std::move(label);
    state_->eval = std::move(eval);
    state_->submult = submultiplicative;
    state_->inverse = std::move(closed_inverse);
    state_->conjugate = std::move(closed_conjugate);
    state_->spec = std::move(spec);
  }

  double operator()(double t) const { return t <= 0.0 ? 0.0 : state_->eval(t); }

  const std::string& label() const { return state_->label; }
  Tri submultiplicative() const { return state_->submult; }
  const YoungSpec& spec() const { return state_->spec; }

  bool has_closed_inverse() const { return static_cast<bool>(state_->inverse); }
  double closed_inverse(double y) const { return state_->inverse(y); }

  bool has_closed_conjugate() const { return static_cast<bool>(state_->conjugate); }
  double closed_conjugate(double s) const { return state_->conjugate(s); }

  /// phi^-1(1), computed once per function.
  double unit_level() const;

  /// True for Phi(t) = t, where Orlicz norms are plain averages.
  bool is_identity() const { return state_->spec.family == "power" && state_->spec.params.size() >= 1 &&
                                    state_->spec.params[0] == 1.0 &&
                                    (state_->spec.params.size() < 2 || state_->spec.params[1] == 1.0); }

 private:
  struct State {
    std::string label;
    Map eval;
    Tri submult = Tri::Unknown;
    Map inverse;
    Map conjugate;
    YoungSpec spec;
    mutable std::once_flag unit_once;
    mutable double unit = 0.0;
  };
  std::shared_ptr<State> state_;
};

/// Smallest t with phi(t) >= y: closed form when available, otherwise
/// doubling bracket plus bisection to relative tolerance `rel_tol`.
inline double inverse(const YoungFunction& phi, double y, double rel_tol = 1e-12) {
  if (!(y >= 0.0)) throw DomainError("inverse needs y >= 0");
  if (y == 0.0) return 0.0;
  if (phi.has_closed_inverse()) return phi.closed_inverse(y);
  constexpr double kCap = 1e300;
  double lo = 0.0, hi = 1.0;
  while (phi(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCap) throw BracketError("inverse: " + phi.label() + " stays below y up to the bracketing cap");
  }
  // Shrink from below as well so tiny y converge quickly.
  if (lo == 0.0) {
    double probe = hi;
    while (probe > 1e-300 && phi(probe * 0.5) >= y) probe *= 0.5;
    hi = probe;
    lo = probe * 0.5;
    if (phi(lo) >= y) lo = 0.0;
  }
  for (int it = 0; it < 4000 && hi - lo > rel_tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (phi(mid) >= y)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Complementary function sup_{t>=0} {s t - phi(t)}.
///
/// Samples a log-spaced grid t in [1e-12, 1e9] (plus t = 0), then refines the
/// best sample with golden-section ascent on its neighbouring bracket. Returns
/// +inf when the objective is still increasing at t = 1e9.
inline double complementary(const YoungFunction& phi, double s) {
  if (!(s >= 0.0)) throw DomainError("complementary needs s >= 0");
  if (s == 0.0) return 0.0;
  if (phi.has_closed_conjugate()) return phi.closed_conjugate(s);
  auto objective = [&](double t) {
    double v = phi(t);
    return std::isinf(v) ? -kInf : s * t - v;
  };
  constexpr int kPerDecade = 8;
  constexpr int kDecades = 21;  // 1e-12 .. 1e9
  std::vector<double> ts{0.0};
  for (int k = 0; k <= kPerDecade * kDecades; ++k) ts.push_back(std::pow(10.0, -12.0 + double(k) / kPerDecade));
  ts.back() = 1e9;
  std::vector<double> gs(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) gs[i] = objective(ts[i]);
  std::size_t last = ts.size() - 1;
  if (gs[last] > gs[last - 1] + 1e-12 * std::abs(gs[last])) return kInf;
  std::size_t best = static_cast<std::size_t>(std::max_element(gs.begin(), gs.end()) - gs.begin());
  double a = ts[best == 0 ? 0 : best - 1];
  double b = ts[std::min(best + 1, last)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = objective(c), gd = objective(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = objective(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = objective(d);
    }
  }
  return std::max({gs[best], gc, gd, 0.0});
}

inline double YoungFunction::unit_level() const {
  std::call_once(state_->unit_once, [this] { state_->unit = inverse(*this, 1.0); });
  return state_->unit;
}

namespace young {

/// c * t^s, s >= 1.
inline YoungFunction power(double s, double c = 1.0) {
  if (!(s >= 1.0) || !(c > 0.0)) throw DomainError("power Young function needs s >= 1 and c > 0");
  auto eval = [s, c](double t) { return s == 1.0 ? c * t : c * std::pow(t, s); };
  auto inv = [s, c](double y) { return s == 1.0 ? y / c : std::pow(y / c, 1.0 / s); };
  YoungFunction::Map conj;
  if (s > 1.0) {
    conj = [s, c](double u) { return (s - 1.0) * c * std::pow(u / (c * s), s / (s - 1.0)); };
  } else {
    conj = [c](double u) { return u <= c ? 0.0 : kInf; };
  }
  std::string label = (c == 1.0 ? "" : fmt_g(c) + "*") + "t^" + fmt_g(s);
  return YoungFunction(label, eval, Tri::Yes, inv, conj, {"power", {s, c}});
}

inline YoungFunction identity() { return power(1.0); }

/// Phi_n(t) = t [1 + (log+ t)^(n-1)]. For n = 1 the logarithmic term is
/// dropped, so Phi_1(t) = t (the one-dimensional weak (1,1) case).
inline YoungFunction phi_n(int n) {
  if (n < 1) throw DomainError("phi_n needs n >= 1");
  if (n == 1) {
    return YoungFunction("Phi_1", [](double t) { return t; }, Tri::Yes, [](double y) { return y; },
                         [](double u) { return u <= 1.0 ? 0.0 : kInf; }, {"phi_n", {1.0}});
  }
  double e = n - 1.0;
  return YoungFunction("Phi_" + std::to_string(n),
                       [e](double t) { return t * (1.0 + std::pow(log_plus(t), e)); }, Tri::Yes, {}, {},
                       {"phi_n", {double(n)}});
}

/// m-fold composition phi o ... o phi.
inline YoungFunction compose(const YoungFunction& phi, int m) {
  if (m < 1) throw DomainError("composition order must be >= 1");
  if (m == 1) return phi;
  YoungSpec spec{phi.spec().family + "^(m)", phi.spec().params};
  spec.params.push_back(m);
  return YoungFunction(
      phi.label() + "^(" + std::to_string(m) + ")",
      [phi, m](double t) {
        for (int i = 0; i < m; ++i) t = phi(t);
        return t;
      },
      phi.submultiplicative(), {}, {}, spec);
}

/// Phi_n^(m), the m-fold composition of Phi_n.
inline YoungFunction phi_n_iter(int n, int m) {
  auto f = compose(phi_n(n), m);
  if (m == 1) return f;
  return YoungFunction("Phi_" + std::to_string(n) + "^(" + std::to_string(m) + ")",
                       [f](double t) { return f(t); }, Tri::Yes, {}, {},
                       {"phi_n_iter", {double(n), double(m)}});
}

/// [t (1 + log+ t)^k]^s.
inline YoungFunction llogl(double k, double s = 1.0) {
  if (!(k >= 0.0) || !(s >= 1.0)) throw DomainError("llogl needs k >= 0 and s >= 1");
  return YoungFunction(
      "[t(1+log+t)^" + fmt_g(k) + "]^" + fmt_g(s),
      [k, s](double t) {
        double base = t * std::pow(1.0 + log_plus(t), k);
        return s == 1.0 ? base : std::pow(base, s);
      },
      Tri::Yes, {}, {}, {"llogl", {k, s}});
}

/// Psi_n(t) = exp(t^(1/(n-1))) - 1 for n >= 2. For n = 1 the limit
/// convention Psi_1(t) = e^t for t > 0, Psi_1(0) = 0 is used.
inline YoungFunction psi_n(int n) {
  if (n < 1) throw DomainError("psi_n needs n >= 1");
  if (n == 1)
    return YoungFunction("Psi_1", [](double t) { return t > 0.0 ? std::exp(t) : 0.0; }, Tri::No,
                         {}, {}, {"psi_n", {1.0}});
  double e = 1.0 / (n - 1.0);
  double back = n - 1.0;
  return YoungFunction(
      "Psi_" + std::to_string(n), [e](double t) { return std::expm1(std::pow(t, e)); }, Tri::No,
      [back](double y) { return std::pow(std::log1p(y), back); }, {}, {"psi_n", {double(n)}});
}

/// The complementary function as a Young function in its own right.
inline YoungFunction conjugate(const YoungFunction& phi) {
  YoungFunction::Map eval;
  if (phi.has_closed_conjugate()) {
    eval = [phi](double s) { return phi.closed_conjugate(s); };
  } else {
    eval = [phi](double s) { return complementary(phi, s); };
  }
  return YoungFunction("conj(" + phi.label() + ")", eval, Tri::Unknown, {}, {},
                       {"conjugate:" + phi.spec().family, phi.spec().params});
}

/// Builds a family member from a config entry.
inline YoungFunction from_spec(const YoungSpec& spec) {
  const auto& p = spec.params;
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi)
      throw ArgumentError("Young family '" + spec.family + "' takes " + std::to_string(lo) + ".." +
                          std::to_string(hi) + " parameters");
  };
  if (spec.family == "power") {
    need(1, 2);
    return power(p[0], p.size() > 1 ? p[1] : 1.0);
  }
  if (spec.family == "identity") {
    need(0, 0);
    return identity();
  }
  if (spec.family == "phi_n") {
    need(1, 1);
    return phi_n(static_cast<int>(p[0]));
  }
  if (spec.family == "phi_n_iter") {
    need(2, 2);
    return phi_n_iter(static_cast<int>(p[0]), static_cast<int>(p[1]));
  }
  if (spec.family == "llogl") {
    need(1, 2);
    return llogl(p[0], p.size() > 1 ? p[1] : 1.0);
  }
  if (spec.family == "psi_n") {
    need(1, 1);
    return psi_n(static_cast<int>(p[0]));
  }
  throw ArgumentError("unknown Young family '" + spec.family + "'");
}

}  // namespace young

/// Log-spaced samples lo..hi inclusive.
inline std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> out(count);
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / std::max(1, count - 1));
  if (count > 0) {
    out.front() = lo;
    out.back() = hi;
  }
  return out;
}

struct TripleCheck {
  bool holds = false;
  double min_ratio = kInf;  // min of B^-1 / (A^-1 C^-1)
  double worst_t = 0.0;
};

/// Checks A^-1(t) C^-1(t) <= B^-1(t) on log-spaced t in [1e-6, 1e9].
inline TripleCheck oneil_triple_check(const YoungFunction& A, const YoungFunction& B,
                                      const YoungFunction& C, int samples = 61) {
  TripleCheck out;
  for (double t : log_space(1e-6, 1e9, samples)) {
    double r = inverse(B, t) / (inverse(A, t) * inverse(C, t));
    if (r < out.min_ratio) {
      out.min_ratio = r;
      out.worst_t = t;
    }
  }
  out.holds = out.min_ratio >= 1.0 - 1e-9;
  return out;
}

enum class TailClass { Convergent, Divergent, Borderline };

inline std::string to_string(TailClass c) {
  switch (c) {
    case TailClass::Convergent: return "convergent";
    case TailClass::Divergent: return "divergent";
    case TailClass::Borderline: return "borderline";
  }
  return "?";
}

struct TailEstimate {
  TailClass cls = TailClass::Borderline;
  double exponent = 0.0;  // fitted log-log slope of the integrand
  bool convergent() const { return cls == TailClass::Convergent; }
};

/// B*_p test: least-squares log-log slope of Phi_n(phi(t)) / t^(p+1) over
/// t in [1e2, 1e8]. Convergent iff slope <= -1 - eps, divergent iff
/// slope >= -1 + eps, borderline otherwise (gated as divergent).
inline TailEstimate bp_star_classify(const YoungFunction& phi, double p, int n, double eps = 0.05) {
  if (!(p > 1.0)) throw DomainError("B*_p needs p > 1");
  auto outer = young::phi_n(n);
  auto ts = log_space(1e2, 1e8, 49);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double t : ts) {
    double g = outer(phi(t));
    if (!std::isfinite(g)) return {TailClass::Divergent, kInf};
    double x = std::log(t);
    double y = std::log(g) - (p + 1.0) * x;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double k = static_cast<double>(ts.size());
  double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  TailEstimate out;
  out.exponent = slope;
  if (slope <= -1.0 - eps)
    out.cls = TailClass::Convergent;
  else if (slope >= -1.0 + eps)
    out.cls = TailClass::Divergent;
  else
    out.cls = TailClass::Borderline;
  return out;
}

/// Sampled constant C in phi(s t) <= C phi(s) phi(t) over s, t in `samples`
/// (pairs where the right side vanishes are skipped).
inline double submultiplicativity_constant(const YoungFunction& phi, const std::vector<double>& samples) {
  double c = 0.0;
  for (double s : samples)
    for (double t : samples) {
      double rhs = phi(s) * phi(t);
      if (rhs > 0.0) c = std::max(c, phi(s * t) / rhs);
    }
  return c;
}

/// Sampled constant C in Phi_n^(m)(t) <= C t [1 + (log+ t)^(n-1)]^m.
inline double composition_bound_constant(int n, int m, const std::vector<double>& samples) {
  auto f = young::phi_n_iter(n, m);
  double c = 0.0;
  for (double t : samples) {
    if (t <= 0.0) continue;
    double lg = n == 1 ? 0.0 : std::pow(log_plus(t), n - 1.0);
    double bound = t * std::pow(1.0 + lg, m);
    c = std::max(c, f(t) / bound);
  }
  return c;
}

/// Young-function sanity checks on sampled points.
struct YoungValidity {
  bool zero_at_origin = false;
  bool nondecreasing = false;
  bool midpoint_convex = false;
  bool unbounded = false;
  bool ok() const { return zero_at_origin && nondecreasing && midpoint_convex && unbounded; }
};

inline YoungValidity check_young(const YoungFunction& phi, double big = 1e12) {
  YoungValidity v;
  v.zero_at_origin = phi(0.0) == 0.0;
  auto ts = log_space(1e-6, 1e6, 121);
  v.nondecreasing = true;
  v.midpoint_convex = true;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (phi(ts[i]) < phi(ts[i - 1])) v.nondecreasing = false;
    double a = ts[i - 1], b = ts[i], m = 0.5 * (a + b);
    double fa = phi(a), fb = phi(b), fm = phi(m);
    if (std::isfinite(fb) && fm > 0.5 * (fa + fb) * (1.0 + 1e-12) + 1e-12) v.midpoint_convex = false;
  }
  v.unbounded = phi(big) > 1e6 * std::max(1.0, phi(1.0));
  return v;
}

}  // namespace strongmax
