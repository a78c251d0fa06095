#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "strongmax/weights.hpp"

using namespace strongmax;

namespace {

GridFunction line(std::vector<double> v) {
  auto s = GridShape::make({v.size()});
  return GridFunction(s, std::move(v));
}

GridFunction random_weight(std::mt19937_64& rng, std::vector<std::size_t> ext, double lo = 0.1, double hi = 10.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  auto s = GridShape::make(ext);
  std::vector<double> v(s.cell_count());
  for (auto& x : v) x = std::exp(u(rng));
  return GridFunction(s, v);
}

// Every index box of a grid with up to two axes, by explicit loops.
void each_box(const GridShape& s, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::size_t n0 = s.extent[0], n1 = s.extent[1];
  for (std::size_t a = 0; a < n0; ++a)
    for (std::size_t b = a; b < n0; ++b)
      for (std::size_t c = 0; c < n1; ++c)
        for (std::size_t d = c; d < n1; ++d) {
          std::vector<std::size_t> cells;
          for (std::size_t i = a; i <= b; ++i)
            for (std::size_t j = c; j <= d; ++j) cells.push_back(i * n1 + j);
          fn(cells);
        }
}

double avg_of(const GridFunction& g, const std::vector<std::size_t>& cells, double e = 1.0) {
  double acc = 0.0;
  for (auto c : cells) acc += std::pow(g[c], e);
  return acc / static_cast<double>(cells.size());
}

double min_of(const GridFunction& g, const std::vector<std::size_t>& cells) {
  double m = INFINITY;
  for (auto c : cells) m = std::min(m, g[c]);
  return m;
}

double brute_apq(const std::vector<GridFunction>& w, const std::vector<double>& p, double q) {
  const auto& s = w.front().shape();
  std::vector<double> nu(s.cell_count(), 1.0);
  for (const auto& wi : w)
    for (std::size_t c = 0; c < nu.size(); ++c) nu[c] *= wi[c];
  GridFunction nuf(s, nu);
  double best = 0.0;
  each_box(s, [&](const auto& cells) {
    double v = std::pow(avg_of(nuf, cells, q), 1.0 / q);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (p[i] == 1.0) {
        v /= min_of(w[i], cells);
      } else {
        double pp = p[i] / (p[i] - 1.0);
        v *= std::pow(avg_of(w[i], cells, -pp), 1.0 / pp);
      }
    }
    best = std::max(best, v);
  });
  return best;
}

double brute_ap_vec(const std::vector<GridFunction>& w, const std::vector<double>& p) {
  const auto& s = w.front().shape();
  double inv = 0.0;
  for (double pi : p) inv += 1.0 / pi;
  double pt = 1.0 / inv;
  std::vector<double> nh(s.cell_count(), 1.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t c = 0; c < nh.size(); ++c) nh[c] *= std::pow(w[i][c], pt / p[i]);
  GridFunction nhf(s, nh);
  double best = 0.0;
  each_box(s, [&](const auto& cells) {
    double v = avg_of(nhf, cells);
    for (std::size_t i = 0; i < w.size(); ++i) {
      double pp = p[i] / (p[i] - 1.0);
      v *= std::pow(avg_of(w[i], cells, 1.0 - pp), pt / pp);
    }
    best = std::max(best, v);
  });
  return best;
}

WeightVector vec(std::vector<GridFunction> w, std::vector<double> p, double q = 1.0, double alpha = 0.0) {
  WeightVector wv;
  wv.w = std::move(w);
  wv.p = std::move(p);
  wv.q = q;
  wv.alpha = alpha;
  return wv;
}

}  // namespace

TEST(ApConstant, ConstantWeightsGiveOne) {
  for (double c : {1.0, 0.3, 17.0})
    for (double p : {1.5, 2.0, 4.0})
      for (auto b : {Basis::all(), Basis::dyadic(), Basis::cubes()}) {
        GridFunction w(GridShape::make({4, 8}), c);
        EXPECT_NEAR(ap_constant(w, p, b), 1.0, 1e-12);
      }
}

TEST(ApConstant, TwoCellHandValue) {
  auto r = ap_constant_detail(line({1, 4}), 2.0);
  EXPECT_NEAR(r.value, 25.0 / 16.0, 1e-14);
  EXPECT_EQ(r.witness.lo[0], 0u);
  EXPECT_EQ(r.witness.hi[0], 1u);
}

TEST(ApConstant, MatchesEnumerationOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    auto w = random_weight(rng, {4, 3});
    for (double p : {1.5, 2.0, 3.0}) {
      double pp = p / (p - 1.0);
      double best = 0.0;
      each_box(w.shape(), [&](const auto& cells) {
        best = std::max(best, avg_of(w, cells) * std::pow(avg_of(w, cells, 1.0 - pp), p - 1.0));
      });
      EXPECT_NEAR(ap_constant(w, p), best, 1e-12 * best);
    }
  }
}

TEST(ApConstant, AtLeastOneByJensen) {
  std::mt19937_64 rng(6);
  auto w = random_weight(rng, {8, 8});
  for (auto b : {Basis::all(), Basis::dyadic(), Basis::cubes()}) EXPECT_GE(ap_constant(w, 2.0, b), 1.0 - 1e-12);
}

TEST(ApConstant, RestrictedBasisIsSmaller) {
  std::mt19937_64 rng(7);
  auto w = random_weight(rng, {8, 8});
  double all = ap_constant(w, 2.5);
  EXPECT_LE(ap_constant(w, 2.5, Basis::dyadic()), all + 1e-12);
  EXPECT_LE(ap_constant(w, 2.5, Basis::cubes()), all + 1e-12);
}

TEST(ApConstant, RejectsBadInput) {
  EXPECT_THROW(ap_constant(line({1, 0}), 2.0), DomainError);
  EXPECT_THROW(ap_constant(line({1, 2}), 1.0), DomainError);
}

TEST(MultiWeightApq, OnesGiveOne) {
  GridFunction one(GridShape::make({4, 4}), 1.0);
  EXPECT_NEAR(multi_weight_constant_apq(vec({one, one, one}, {2, 3, 6}, 2.0)), 1.0, 1e-12);
  EXPECT_NEAR(multi_weight_constant_apq(vec({one, one}, {1, 2}, 0.8)), 1.0, 1e-12);
}

TEST(MultiWeightApq, TwoCellTwoWeightValue) {
  // Full interval: avg nu = 17/2, (avg w^-2)^(1/2) = sqrt(17/32) per weight.
  auto w = line({1, 4});
  EXPECT_NEAR(multi_weight_constant_apq(vec({w, w}, {2, 2}, 1.0)), 289.0 / 64.0, 1e-13);
  EXPECT_NEAR(multi_weight_constant_apq(vec({w, w}, {2, 2}, 1.0)), brute_apq({w, w}, {2, 2}, 1.0), 1e-13);
}

TEST(MultiWeightApq, SingleWeightReduction) {
  std::mt19937_64 rng(8);
  auto w = random_weight(rng, {5, 3});
  for (double p : {1.5, 2.0}) {
    for (double q : {0.7, 2.0, 4.0}) {
      double pp = p / (p - 1.0);
      double best = 0.0;
      each_box(w.shape(), [&](const auto& cells) {
        best = std::max(best, std::pow(avg_of(w, cells, q), 1.0 / q) * std::pow(avg_of(w, cells, -pp), 1.0 / pp));
      });
      EXPECT_NEAR(multi_weight_constant_apq(vec({w}, {p}, q)), best, 1e-12 * best);
    }
  }
}

TEST(MultiWeightApq, MatchesEnumerationOracle) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 4; ++t) {
    auto a = random_weight(rng, {4, 4}), b = random_weight(rng, {4, 4});
    for (std::vector<double> p : {std::vector<double>{2, 3}, {1.5, 1.5}, {1, 4}}) {
      double q = 1.3;
      double want = brute_apq({a, b}, p, q);
      EXPECT_NEAR(multi_weight_constant_apq(vec({a, b}, p, q)), want, 1e-12 * want);
    }
  }
}

TEST(MultiWeightAp, OnesGiveOne) {
  GridFunction one(GridShape::make({6}), 1.0);
  EXPECT_NEAR(multi_weight_constant_ap(vec({one, one}, {2, 5})), 1.0, 1e-12);
}

TEST(MultiWeightAp, SingleWeightIsApConstant) {
  std::mt19937_64 rng(10);
  auto w = random_weight(rng, {6, 5});
  for (double p : {1.2, 2.0, 3.5}) EXPECT_NEAR(multi_weight_constant_ap(vec({w}, {p})), ap_constant(w, p), 1e-12 * ap_constant(w, p));
}

TEST(MultiWeightAp, RandomFourCellsMatchOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 6; ++t) {
    auto a = random_weight(rng, {4}), b = random_weight(rng, {4});
    std::vector<double> p{1.5 + t * 0.3, 2.5};
    double want = brute_ap_vec({a, b}, p);
    EXPECT_NEAR(multi_weight_constant_ap(vec({a, b}, p)), want, 1e-12 * want);
  }
}

TEST(MultiWeightAp, UnitExponentUsesInfimum) {
  // p = (1, 1): p = 1/2 total, factors (min w_i)^(-1/2).
  auto a = line({1, 4}), b = line({2, 1});
  double best = 0.0;
  each_box(a.shape(), [&](const auto& cells) {
    double nh = 0.0;
    for (auto c : cells) nh += std::sqrt(a[c] * b[c]);
    nh /= cells.size();
    best = std::max(best, nh / std::sqrt(min_of(a, cells) * min_of(b, cells)));
  });
  EXPECT_NEAR(multi_weight_constant_ap(vec({a, b}, {1, 1})), best, 1e-13);
}

TEST(WeightVector, ValidatesInputs) {
  auto w = line({1, 2});
  EXPECT_THROW(vec({w}, {0.5}).validate(), DomainError);
  EXPECT_THROW(vec({w, line({1, -1})}, {2, 2}).validate(), DomainError);
  EXPECT_THROW(vec({w}, {2, 2}).validate(), ArgumentError);
  EXPECT_THROW(vec({}, {}).validate(), ArgumentError);
  EXPECT_THROW(vec({w, line({1, 2, 3})}, {2, 2}).validate(), ShapeError);
  EXPECT_NEAR(vec({w, w}, {2, 3}).p_total(), 1.2, 1e-15);
}

TEST(PowerBump, NormalizedOnes) {
  GridFunction one(GridShape::make({4, 4}, {0.5, 0.25}), 1.0);
  // alpha/n + 1/q - 1/p = 1/2 + 1/4 - 3/4 = 0.
  auto wv = vec({one, one}, {2, 4}, 4.0, 1.0);
  EXPECT_NEAR(power_bump_check(wv, one, 1.5).value, 1.0, 1e-12);
}

TEST(PowerBump, SingleWeightReduction) {
  std::mt19937_64 rng(12);
  auto w = random_weight(rng, {4, 4});
  auto v = random_weight(rng, {4, 4});
  double p = 2.0, q = 3.0, r = 1.25, alpha = 0.5;
  double beta = alpha / 2 + 1 / q - 1 / p;
  double pp = 2.0;
  double best = 0.0;
  each_box(w.shape(), [&](const auto& cells) {
    double vol = static_cast<double>(cells.size());
    best = std::max(best, std::pow(vol, beta) * std::pow(avg_of(v, cells), 1 / q) *
                              std::pow(avg_of(w, cells, (1 - pp) * r), 1 / (r * pp)));
  });
  EXPECT_NEAR(power_bump_check(vec({w}, {p}, q, alpha), v, r).value, best, 1e-12 * best);
}

TEST(PowerBump, FractionalMaximalConstruction) {
  // u_i = 1, v = 1, w_i = M_{alpha p_i / m}(u_i).
  auto s = GridShape::cube(2, 16);
  GridFunction one(s, 1.0);
  double alpha = 0.5;
  std::vector<double> p{2.0, 3.0};
  std::vector<GridFunction> w;
  for (double pi : p) {
    MaximalQuery mq;
    mq.alpha = alpha * pi / 2.0;
    w.push_back(multilinear_fractional_maximal({one}, mq));
  }
  double inv = 0.5 + 1.0 / 3.0;
  auto res = power_bump_check(vec(w, p, 1.0 / (inv - alpha / 2.0), alpha), one, 1.1);
  EXPECT_TRUE(std::isfinite(res.value));
  EXPECT_GT(res.value, 0.0);
  EXPECT_LT(res.value, kWeightCap);
}

TEST(PowerBump, RejectsBadExponents) {
  auto w = line({1, 2});
  EXPECT_THROW(power_bump_check(vec({w}, {2}), w, 1.0), DomainError);
  EXPECT_THROW(power_bump_check(vec({w}, {1}), w, 2.0), DomainError);
}

TEST(SupAverageProduct, ParallelMatchesSerial) {
  std::mt19937_64 rng(13);
  auto w = random_weight(rng, {12, 9});
  set_thread_count(1);
  auto a = ap_constant_detail(w, 2.0);
  set_thread_count(4);
  auto b = ap_constant_detail(w, 2.0);
  set_thread_count(0);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.witness.lo, b.witness.lo);
  EXPECT_EQ(a.witness.hi, b.witness.hi);
}

TEST(AInfty, LebesgueMeasurePasses) {
  GridFunction one(GridShape::make({64, 64}), 1.0);
  auto r = a_infty_classify(one);
  EXPECT_TRUE(r.in_class);
  EXPECT_NEAR(r.delta, 1.0, 1e-12);
  EXPECT_NEAR(r.constant, 1.0, 1e-12);
  EXPECT_NEAR(r.fitted_delta, 1.0, 1e-9);
}

TEST(AInfty, SquareRootPowerPasses) {
  auto w = power_weight(GridShape::cube(1, 1024), 0.5);
  EXPECT_TRUE(a_infty_classify(w).in_class);
  EXPECT_TRUE(a_infty_classify(w, Basis::all(), 10).in_class);
}

TEST(AInfty, SlabConcentratedWeightFails) {
  // (1+|x_2|)^-2 on [0,256]^2: half the mass sits in the first unit slab.
  auto s = GridShape::make({256, 256});
  auto w = sample_cell_averages(s, [](const Point3& x) { return 1.0 / ((1 + x[1]) * (1 + x[1])); });
  auto r = a_infty_classify(w);
  EXPECT_FALSE(r.in_class);
  EXPECT_LT(r.fitted_delta, 0.05);
  // Deepest slab [0,1] of [0,256]: (1 - 1/2) / (1 - 1/257).
  EXPECT_NEAR(r.profile.back(), 0.5 * 257.0 / 256.0, 1e-3);
  EXPECT_GT(r.c_of_delta.back(), 100.0);
}

TEST(ReverseDoubling, LebesgueCounts) {
  EXPECT_NEAR(reverse_doubling_constant(GridFunction(GridShape::make({16}), 1.0)), 2.0, 1e-12);
  EXPECT_NEAR(reverse_doubling_constant(GridFunction(GridShape::make({8, 16}), 1.0)), 4.0, 1e-12);
  EXPECT_NEAR(reverse_doubling_constant(GridFunction(GridShape::make({4, 4, 8}), 1.0)), 8.0, 1e-12);
}

TEST(ReverseDoubling, MatchesDirectEnumeration) {
  std::mt19937_64 rng(14);
  auto w = random_weight(rng, {8, 4});
  double best = INFINITY;
  for (std::size_t l0 = 2; l0 <= 8; l0 *= 2)
    for (std::size_t l1 = 2; l1 <= 4; l1 *= 2)
      for (std::size_t a = 0; a < 8; a += l0)
        for (std::size_t b = 0; b < 4; b += l1) {
          auto sum = [&](std::size_t i0, std::size_t n0, std::size_t j0, std::size_t n1) {
            double s = 0;
            for (std::size_t i = i0; i < i0 + n0; ++i)
              for (std::size_t j = j0; j < j0 + n1; ++j) s += w[i * 4 + j];
            return s;
          };
          double parent = sum(a, l0, b, l1);
          for (int c = 0; c < 4; ++c)
            best = std::min(best, parent / sum(a + (c & 1) * l0 / 2, l0 / 2, b + (c >> 1) * l1 / 2, l1 / 2));
        }
  EXPECT_NEAR(reverse_doubling_constant(w), best, 1e-12 * best);
}

TEST(ReverseDoubling, ConcentratedWeightIsFlagged) {
  double prev = INFINITY;
  for (double eps : {1e-2, 1e-5, 1e-10, 1e-14}) {
    std::vector<double> v(16, eps);
    v[5] = 1.0;
    auto r = reverse_doubling(GridFunction(GridShape::make({4, 4}), v));
    EXPECT_LT(r.d, prev);
    prev = r.d;
    if (eps <= 1e-10) {
      EXPECT_FALSE(r.in_class);
    }
  }
}

TEST(ReverseDoubling, NeedsPowerOfTwoGrid) {
  EXPECT_THROW(reverse_doubling_constant(GridFunction(GridShape::make({6}), 1.0)), ShapeError);
}

TEST(ReverseDoubling, SlabWeightHasHalfFactor) {
  // (1+|x_2|)^-2 in two dimensions: d >= 2^(n-1) = 2.
  auto s = GridShape::make({64, 64});
  auto w = sample_cell_averages(s, [](const Point3& x) { return 1.0 / ((1 + x[1]) * (1 + x[1])); });
  EXPECT_GE(reverse_doubling_constant(w), 2.0 * (1 - 1e-2));
}

TEST(Tauberian, WholeGridRatioIsOne) {
  GridFunction one(GridShape::make({32}), 1.0);
  EXPECT_NEAR(tauberian_ratio(one, Basis::all(), 0.5, CellSet::all(one.shape())), 1.0, 1e-15);
}

TEST(Tauberian, IntervalDilationCount) {
  // Cells at gap d < L see average L/(L+d) > 1/2: 2(L-1) extra cells.
  for (std::size_t L : {4u, 16u, 64u}) {
    auto s = GridShape::make({16 * L}, {1.0 / L});
    GridFunction one(s, 1.0);
    auto E = CellSet::of_rect(s, make_rect({{8 * L, 9 * L - 1}}));
    double want = (3.0 * L - 2.0) / L;
    EXPECT_NEAR(tauberian_ratio(one, Basis::all(), 0.5, E), want, 1e-12);
  }
}

TEST(Tauberian, LevelNearOneShrinksToE) {
  auto s = GridShape::make({256});
  GridFunction one(s, 1.0);
  auto E = CellSet::of_rect(s, make_rect({{100, 115}}));
  EXPECT_NEAR(tauberian_ratio(one, Basis::all(), 0.99, E), 1.0, 1e-12);
}

TEST(Tauberian, EstimateIsLowerBoundAndDeterministic) {
  auto s = GridShape::make({32, 32});
  GridFunction one(s, 1.0);
  auto a = tauberian_constant_estimate(one, Basis::all(), 0.5, 6, 3);
  auto b = tauberian_constant_estimate(one, Basis::all(), 0.5, 6, 3);
  EXPECT_GE(a.ratio, 1.0);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_EQ(a.witness, b.witness);
  EXPECT_GT(a.sets_tried, 6u);
  EXPECT_THROW(tauberian_constant_estimate(one, Basis::all(), 1.0, 1), DomainError);
}

TEST(PowerWeight, SingularCellUsesCellAverage) {
  auto s = GridShape::cube(1, 4);
  auto w = power_weight(s, -0.5);
  // Mean of x^-1/2 over [0, 1/4] is 4; 16 Gauss nodes miss a few percent
  // of the endpoint singularity, from below.
  EXPECT_NEAR(w[0], 4.0, 0.15);
  EXPECT_LT(w[0], 4.0);
  EXPECT_GT(w[0], std::pow(0.125, -0.5));
  EXPECT_NEAR(w[2], std::pow(0.625, -0.5), 1e-14);
}

TEST(PowerClassify, ZeroExponentConstantOne) {
  auto r = power_weight_classify(0.0, 2.0, 1);
  EXPECT_TRUE(r.in_class);
  EXPECT_NEAR(r.constants.back(), 1.0, 1e-12);
}

TEST(PowerClassify, OneDimensionalRange) {
  EXPECT_TRUE(power_weight_classify(0.5, 2.0, 1).in_class);
  EXPECT_TRUE(power_weight_classify(-0.5, 2.0, 1).in_class);
  EXPECT_FALSE(power_weight_classify(1.5, 2.0, 1).in_class);
  EXPECT_FALSE(power_weight_classify(1.0, 2.0, 1).in_class);
  EXPECT_TRUE(power_weight_classify(1.5, 3.0, 1).in_class);
  EXPECT_FALSE(power_weight_classify(2.5, 3.0, 1).in_class);
}

TEST(PowerClassify, RectanglesUseOneDimensionalRange) {
  EXPECT_FALSE(power_weight_classify(-1.0, 2.0, 2).in_class);
  EXPECT_FALSE(power_weight_classify(-1.5, 2.0, 2).in_class);
  EXPECT_TRUE(power_weight_classify(0.5, 2.0, 2).in_class);
  EXPECT_FALSE(power_weight_classify(1.5, 2.0, 2).in_class);
}

TEST(PowerClassify, RejectsNonIntegrable) {
  EXPECT_THROW(power_weight_classify(-1.0, 2.0, 1), DomainError);
  EXPECT_THROW(power_weight_classify(-2.5, 2.0, 2), DomainError);
  EXPECT_THROW(power_weight_classify(0.0, 1.0, 1), DomainError);
}
