#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "strongmax/maximal.hpp"

using namespace strongmax;

namespace {

GridFunction spike4() { return GridFunction(GridShape::make({4}), std::vector<double>{1, 0, 0, 0}); }

GridFunction random_grid(std::mt19937_64& rng, std::vector<std::size_t> ext, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0), h(0.5, 2.0);
  std::vector<double> hs;
  for (std::size_t i = 0; i < ext.size(); ++i) hs.push_back(h(rng));
  auto s = GridShape::make(ext, hs);
  std::vector<double> v(s.cell_count());
  for (auto& x : v) x = u(rng) < 0.3 ? 0.0 : scale * u(rng);
  return GridFunction(s, v);
}

// Brute force over the enumerated basis, written without the engine.
std::vector<double> brute(const std::vector<GridFunction>& fs, const Basis& b, double alpha) {
  const auto& s = fs.front().shape();
  std::vector<double> out(s.cell_count(), 0.0);
  int m = static_cast<int>(fs.size());
  for (const auto& r : enumerate_basis(b, s)) {
    double vol = volume(r, s);
    double v = 1.0;
    for (const auto& f : fs) {
      double integral = 0.0;
      for_each_cell(r, s, [&](std::size_t i) { integral += f[i] * s.cell_volume(); });
      v *= integral / std::pow(vol, 1.0 - alpha / (m * s.dims));
    }
    for_each_cell(r, s, [&](std::size_t i) { out[i] = std::max(out[i], v); });
  }
  return out;
}

// Same values, placed on another grid of equal extents.
GridFunction on_grid(const GridFunction& like, const GridFunction& g) {
  return GridFunction(like.shape(), std::vector<double>(g.values().begin(), g.values().end()));
}

void expect_close(const GridFunction& a, const std::vector<double>& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(a[i], b[i], rel * std::max(1e-300, std::abs(b[i]))) << i;
}

}  // namespace

TEST(StrongMaximal, ConstantIsFixed) {
  GridFunction f(GridShape::make({5, 4}, {0.3, 0.7}), 2.5);
  for (auto b : {Basis::all(), Basis::cubes()}) {
    auto mf = strong_maximal(f, b);
    for (double v : mf.values()) EXPECT_NEAR(v, 2.5, 1e-15);
  }
}

TEST(StrongMaximal, SpikeProfile) {
  auto mf = strong_maximal(spike4());
  std::vector<double> want{1, 0.5, 1.0 / 3, 0.25};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(mf[i], want[i]);
}

TEST(StrongMaximal, DominatesFunction) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    auto f = random_grid(rng, {7, 9});
    auto mf = strong_maximal(f);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_GE(mf[i], f[i]);
  }
}

TEST(StrongMaximal, DyadicBelowAll) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    auto f = random_grid(rng, {8, 16});
    auto all = strong_maximal(f, Basis::all());
    auto dy = strong_maximal(f, Basis::dyadic());
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LE(dy[i], all[i]);
  }
}

TEST(StrongMaximal, Sublinear) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    auto f = random_grid(rng, {6, 6});
    auto g = on_grid(f, random_grid(rng, {6, 6}));
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
    GridFunction sum(f.shape(), v);
    auto mf = strong_maximal(f), mg = strong_maximal(g), ms = strong_maximal(sum);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LE(ms[i], mf[i] + mg[i] + 1e-12 * (mf[i] + mg[i]));
  }
}

TEST(StrongMaximal, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  for (auto ext : std::vector<std::vector<std::size_t>>{{9}, {5, 7}, {3, 4, 5}}) {
    auto f = random_grid(rng, ext);
    for (auto b : {Basis::all(), Basis::cubes()}) expect_close(strong_maximal(f, b), brute({f}, b, 0.0), 1e-12);
  }
  auto f = random_grid(rng, {8, 4});
  expect_close(strong_maximal(f, Basis::dyadic()), brute({f}, Basis::dyadic(), 0.0), 1e-12);
}

TEST(Fractional, ConstantBilinear) {
  GridFunction one(GridShape::make({4, 4}), 1.0);
  MaximalQuery q;
  q.m = 2;
  auto mf = multilinear_fractional_maximal({one, one}, q);
  for (double v : mf.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Fractional, HalfOrderSpike) {
  MaximalQuery q;
  q.alpha = 0.5;
  auto mf = multilinear_fractional_maximal({spike4()}, q);
  std::vector<double> want{1, 1 / std::sqrt(2.0), 1 / std::sqrt(3.0), 0.5};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mf[i], want[i], 1e-15);
}

TEST(Fractional, BilinearSpikeTimesOne) {
  MaximalQuery q;
  q.m = 2;
  auto mf = multilinear_fractional_maximal({spike4(), GridFunction(GridShape::make({4}), 1.0)}, q);
  std::vector<double> want{1, 0.5, 1.0 / 3, 0.25};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(mf[i], want[i]);
}

TEST(Fractional, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  for (double alpha : {0.0, 0.7, 2.5}) {
    auto f = random_grid(rng, {6, 5}), g = random_grid(rng, {6, 5});
    auto g2 = on_grid(f, g);
    MaximalQuery q;
    q.m = 2;
    q.alpha = alpha;
    expect_close(multilinear_fractional_maximal({f, g2}, q), brute({f, g2}, Basis::all(), alpha), 1e-12);
  }
}

TEST(Fractional, ValidatesArguments) {
  auto f = spike4();
  MaximalQuery q;
  q.alpha = 1.0;  // m n = 1
  EXPECT_THROW(multilinear_fractional_maximal({f}, q), DomainError);
  q.alpha = 0.0;
  q.m = 2;
  EXPECT_THROW(multilinear_fractional_maximal({f}, q), ArgumentError);
  GridFunction g(GridShape::make({5}), 1.0);
  EXPECT_THROW(multilinear_fractional_maximal({f, g}, q), ShapeError);
  GridFunction big(GridShape::make({13, 2, 2}), 1.0);
  EXPECT_THROW(strong_maximal(big), ShapeError);
  EXPECT_NO_THROW(strong_maximal(big, Basis::cubes()));
}

TEST(Orlicz, IdentityReducesToFractional) {
  std::mt19937_64 rng(12);
  for (double alpha : {0.0, 0.4, 1.3}) {
    auto f = random_grid(rng, {5, 6}, 3.0), g = random_grid(rng, {5, 6}, 3.0);
    auto g2 = on_grid(f, g);
    MaximalQuery q;
    q.m = 2;
    q.alpha = alpha;
    auto plain = multilinear_fractional_maximal({f, g2}, q);
    q.orlicz = {young::identity(), young::identity()};
    auto orl = orlicz_maximal({f, g2}, q);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(orl[i], plain[i], 1e-8 * plain[i]);
  }
}

TEST(Orlicz, ConstantUnderSquare) {
  GridFunction f(GridShape::make({4, 3}), 1.75);
  MaximalQuery q;
  q.orlicz = {young::power(2.0)};
  q.phi_exponent = 0.0;
  auto mf = orlicz_maximal({f}, q);
  for (double v : mf.values()) EXPECT_NEAR(v, 1.75, 1e-8);
}

TEST(Orlicz, LogBumpDominatesFractional) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 5; ++t) {
    auto f = random_grid(rng, {16}, 4.0), g = random_grid(rng, {16}, 4.0);
    auto g2 = on_grid(f, g);
    MaximalQuery q;
    q.m = 2;
    q.alpha = 0.5;
    auto plain = multilinear_fractional_maximal({f, g2}, q);
    q.orlicz = {young::phi_n(2), young::phi_n(2)};
    auto bump = orlicz_maximal({f, g2}, q);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_GE(bump[i], plain[i] * (1 - 1e-9));
  }
}

TEST(DualImplementations, AgreeExactly) {
  std::mt19937_64 rng(15);
  std::vector<std::vector<std::size_t>> shapes{{16}, {16, 16}, {7, 11}, {4, 4, 4}, {3, 5, 6}};
  for (const auto& ext : shapes) {
    auto f = random_grid(rng, ext, 2.0);
    std::vector<Basis> bases{Basis::all(), Basis::cubes()};
    bool pow2 = true;
    for (auto e : ext) pow2 = pow2 && is_power_of_two(e);
    if (pow2) bases.push_back(Basis::dyadic());
    for (const auto& b : bases) {
      MaximalQuery q;
      q.basis = b;
      auto fast = multilinear_fractional_maximal({f}, q);
      auto ref = maximal_reference({f}, q);
      for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(fast[i], ref[i]) << to_string(b.kind);
    }
  }
}

TEST(DualImplementations, OrliczAgreeExactly) {
  std::mt19937_64 rng(16);
  auto f = random_grid(rng, {6, 5}, 2.0);
  MaximalQuery q;
  q.orlicz = {young::phi_n(2)};
  q.alpha = 0.5;
  auto fast = orlicz_maximal({f}, q);
  auto ref = maximal_reference({f}, q);
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(fast[i], ref[i]);
}

TEST(DualImplementations, ThreadCountInvariant) {
  std::mt19937_64 rng(17);
  auto f = random_grid(rng, {24, 20}, 2.0);
  set_thread_count(1);
  auto a = strong_maximal(f);
  set_thread_count(4);
  auto b = strong_maximal(f);
  set_thread_count(0);
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(LevelSet, Examples) {
  GridFunction one(GridShape::make({3}), 1.0);
  EXPECT_EQ(level_set_measure(one, 2.0), 0.0);
  EXPECT_EQ(level_set_measure(one, 1.0), 0.0);
  EXPECT_EQ(level_set_measure(one, 0.0), 3.0);
  auto mf = strong_maximal(spike4());
  EXPECT_EQ(level_set_measure(mf, 0.4), 2.0);
}
