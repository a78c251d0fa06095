#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "strongmax/grid.hpp"
#include "strongmax/grid_io.hpp"
#include "strongmax/quadrature.hpp"

using namespace strongmax;

namespace {

GridFunction grid2(std::vector<double> v, std::size_t r, std::size_t c) {
  return GridFunction(GridShape::make({r, c}), std::move(v));
}

// Direct summation oracle.
double direct_integral(const GridFunction& f, const Rect& r) {
  double s = 0.0;
  for_each_cell(r, f.shape(), [&](std::size_t i) { s += f[i]; });
  return s * f.shape().cell_volume();
}

GridFunction random_grid(std::mt19937_64& rng, int dims, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> ext(1, max_n);
  std::uniform_real_distribution<double> h(0.1, 2.0), val(0.0, 10.0);
  std::vector<std::size_t> e;
  std::vector<double> hs;
  for (int k = 0; k < dims; ++k) {
    e.push_back(ext(rng));
    hs.push_back(h(rng));
  }
  auto s = GridShape::make(e, hs);
  std::vector<double> v(s.cell_count());
  for (auto& x : v) x = val(rng);
  return GridFunction(s, v);
}

}  // namespace

TEST(PrefixSum, FullGridIntegral) {
  auto f = grid2({1, 2, 3, 4}, 2, 2);
  PrefixSum p(f);
  EXPECT_DOUBLE_EQ(rect_integral(p, full_rect(f.shape())), 10.0);
}

TEST(PrefixSum, RowAndSingleCell) {
  auto f = grid2({1, 2, 3, 4}, 2, 2);
  PrefixSum p(f);
  EXPECT_DOUBLE_EQ(rect_integral(p, make_rect({{0, 0}, {0, 1}})), 3.0);
  EXPECT_DOUBLE_EQ(rect_integral(p, make_rect({{1, 1}, {1, 1}})), 4.0);
  EXPECT_DOUBLE_EQ(rect_average(p, make_rect({{0, 1}, {1, 1}})), 3.0);
}

TEST(PrefixSum, OneDimensionalPrefix) {
  GridFunction f(GridShape::make({4}), std::vector<double>{1, 0, 0, 0});
  PrefixSum p(f);
  EXPECT_DOUBLE_EQ(rect_integral(p, make_rect({{0, 1}})), 1.0);
}

TEST(PrefixSum, ZeroFunction) {
  GridFunction f(GridShape::make({3, 5}, {0.5, 2.0}));
  PrefixSum p(f);
  for (const auto& r : enumerate_basis(Basis::all(), f.shape())) EXPECT_EQ(rect_integral(p, r), 0.0);
}

TEST(PrefixSum, ConstantFunctionGivesCTimesVolume) {
  auto s = GridShape::make({3, 4, 2}, {0.5, 1.5, 2.0});
  GridFunction f(s, 2.5);
  PrefixSum p(f);
  for (const auto& r : enumerate_basis(Basis::all(), s))
    EXPECT_NEAR(rect_integral(p, r), 2.5 * volume(r, s), 1e-12 * volume(r, s));
}

TEST(PrefixSum, OutOfBoundsThrows) {
  auto f = grid2({1, 2, 3, 4}, 2, 2);
  PrefixSum p(f);
  EXPECT_THROW(rect_integral(p, make_rect({{0, 2}, {0, 0}})), BoundsError);
  Rect inverted = make_rect({{1, 0}, {0, 0}});
  EXPECT_THROW(rect_integral(p, inverted), BoundsError);
}

TEST(PrefixSum, RandomGridsMatchDirectSummation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    int dims = 1 + trial % 3;
    auto f = random_grid(rng, dims, dims == 3 ? 6 : 16);
    PrefixSum p(f);
    for_each_rect(Basis::all(), f.shape(), [&](const Rect& r) {
      double want = direct_integral(f, r);
      EXPECT_NEAR(rect_integral(p, r), want, 1e-12 * std::max(1.0, want));
    });
  }
}

TEST(Basis, AllRectsCount1D) { EXPECT_EQ(enumerate_basis(Basis::all(), GridShape::make({4})).size(), 10u); }

TEST(Basis, DyadicCount1D) {
  auto rects = enumerate_basis(Basis::dyadic(), GridShape::make({4}));
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& r : rects) got.insert({r.lo[0], r.hi[0]});
  std::set<std::pair<std::size_t, std::size_t>> want{{0, 3}, {0, 1}, {2, 3}, {0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_EQ(rects.size(), 7u);
  EXPECT_EQ(got, want);
}

TEST(Basis, SingleCell2D) { EXPECT_EQ(enumerate_basis(Basis::all(), GridShape::make({1, 1})).size(), 1u); }

TEST(Basis, AllRectsCountAndNoDuplicates) {
  auto s = GridShape::make({3, 5, 2});
  auto rects = enumerate_basis(Basis::all(), s);
  std::set<Rect> uniq(rects.begin(), rects.end());
  EXPECT_EQ(uniq.size(), rects.size());
  EXPECT_EQ(rects.size(), std::size_t(6 * 15 * 3));
  // Every index-range pair appears.
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a; b < 3; ++b)
      for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t d = c; d < 5; ++d)
          for (std::size_t e = 0; e < 2; ++e)
            for (std::size_t g = e; g < 2; ++g) EXPECT_TRUE(uniq.count(make_rect({{a, b}, {c, d}, {e, g}})));
  for (const auto& r : rects) EXPECT_TRUE(in_bounds(r, s));
}

TEST(Basis, DyadicIsSubsetOfAll) {
  auto s = GridShape::make({8, 4});
  auto all = enumerate_basis(Basis::all(), s);
  std::set<Rect> uniq(all.begin(), all.end());
  auto dy = enumerate_basis(Basis::dyadic(), s);
  EXPECT_EQ(dy.size(), std::size_t(15 * 7));
  for (const auto& r : dy) {
    EXPECT_TRUE(uniq.count(r));
    for (int k = 0; k < 2; ++k) {
      EXPECT_TRUE(is_power_of_two(r.side(k)));
      EXPECT_EQ(r.lo[k] % r.side(k), 0u);
    }
  }
}

TEST(Basis, DyadicNeedsPowerOfTwo) {
  EXPECT_THROW(enumerate_basis(Basis::dyadic(), GridShape::make({6})), ShapeError);
}

TEST(Basis, CubesHaveEqualPhysicalSides) {
  auto s = GridShape::make({8, 4}, {0.5, 1.0});
  auto cubes = enumerate_basis(Basis::cubes(), s);
  EXPECT_FALSE(cubes.empty());
  for (const auto& r : cubes)
    EXPECT_NEAR(side_length(r, s, 0), side_length(r, s, 1), std::max(s.cell_size[0], s.cell_size[1]));
}

TEST(Basis, SideBoundsFilter) {
  Basis b = Basis::all();
  b.min_side = 2.0;
  b.max_side = 3.0;
  auto rects = enumerate_basis(b, GridShape::make({5}));
  for (const auto& r : rects) {
    EXPECT_GE(r.side(0), 2u);
    EXPECT_LE(r.side(0), 3u);
  }
  EXPECT_EQ(rects.size(), 4u + 3u);
}

TEST(GridFunction, RejectsInvalidValues) {
  auto s = GridShape::make({2});
  EXPECT_THROW(GridFunction(s, std::vector<double>{1.0, -1.0}), DomainError);
  EXPECT_THROW(GridFunction(s, std::vector<double>{1.0, std::nan("")}), DomainError);
  EXPECT_THROW(GridFunction(s, std::vector<double>{1.0}), ShapeError);
  EXPECT_THROW(GridShape::make({0}), ShapeError);
  EXPECT_THROW(GridShape::make({2}, {-1.0}), ShapeError);
  EXPECT_THROW(GridShape::make({2, 2, 2, 2}), ShapeError);
}

TEST(GridIO, CsvRoundTrip) {
  auto s = GridShape::make({2, 3}, {0.25, 0.5}, {-1.0, 2.0});
  GridFunction f(s, std::vector<double>{1, 2.5, 3, 0.1, 1e-300, 7});
  std::stringstream ss;
  write_grid(ss, f);
  auto g = read_grid(ss);
  EXPECT_EQ(g.shape(), s);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], g[i]);
}

TEST(GridIO, BinaryRoundTrip) {
  auto s = GridShape::make({3, 2, 2});
  std::vector<double> v(12);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + i);
  GridFunction f(s, v);
  std::stringstream ss;
  write_grid(ss, f, GridEncoding::Binary);
  auto g = read_grid(ss);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], g[i]);
}

TEST(GridIO, RejectsBadInput) {
  std::stringstream empty;
  EXPECT_THROW(read_grid(empty), ParseError);
  std::stringstream short_data("strongmax-grid 1\ndims 1\nshape 3\ncell_size 1\norigin 0\nencoding csv\ndata\n1,2\n");
  EXPECT_THROW(read_grid(short_data), ParseError);
  std::stringstream negative("strongmax-grid 1\ndims 1\nshape 2\ncell_size 1\norigin 0\nencoding csv\ndata\n1,-2\n");
  EXPECT_THROW(read_grid(negative), ParseError);
  std::stringstream junk("hello\n");
  EXPECT_THROW(read_grid(junk), ParseError);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomials) {
  const auto& g = gauss16();
  double sum_w = 0.0, x30 = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    sum_w += g.weights[i];
    x30 += g.weights[i] * std::pow(g.nodes[i], 30);
  }
  EXPECT_NEAR(sum_w, 2.0, 1e-14);
  EXPECT_NEAR(x30, 2.0 / 31.0, 1e-13);
}

TEST(Quadrature, CellAverageOfSeparableFunction) {
  auto s = GridShape::make({4, 4}, {0.5, 0.5});
  double avg = cell_average(s, {1, 2, 0}, [](const Point3& x) { return x[0] * x[1] * x[1]; });
  // x in [0.5,1], y in [1,1.5]
  double want = (0.75) * ((1.5 * 1.5 * 1.5 - 1.0) / 3.0 / 0.5);
  EXPECT_NEAR(avg, want, 1e-13);
}
