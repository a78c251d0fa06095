#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "strongmax/grid.hpp"
#include "strongmax/rng.hpp"

namespace strongmax {

/// Seeded test functions on the unit cube [0,1]^n. Every entry is defined in
/// physical coordinates, so sampling the same entry at resolutions N and 2N
/// gives two discretizations of one function.
struct CorpusEntry {
  enum class Kind { Rect, Bumps, Spike, Noise } kind;
  std::string label;
  int dims = 1;
  // Rect / Spike: box [lo, hi) per axis with height.
  Point3 lo{}, hi{};
  double height = 1.0;
  // Bumps: three tensor Gaussians (centre, width, amplitude).
  std::vector<Point3> centre;
  std::vector<double> width, amp;
  // Noise: log-normal values on a fixed lattice of `lattice` cells per axis.
  std::size_t lattice = 8;
  std::vector<double> noise;

  double operator()(const Point3& x) const {
    switch (kind) {
      case Kind::Rect:
      case Kind::Spike:
        for (int k = 0; k < dims; ++k)
          if (x[k] < lo[k] || x[k] >= hi[k]) return 0.0;
        return height;
      case Kind::Bumps: {
        double v = 0.0;
        for (std::size_t b = 0; b < amp.size(); ++b) {
          double e = 0.0;
          for (int k = 0; k < dims; ++k) {
            double d = (x[k] - centre[b][k]) / width[b];
            e += d * d;
          }
          v += amp[b] * std::exp(-0.5 * e);
        }
        return v;
      }
      case Kind::Noise: {
        std::size_t flat = 0;
        for (int k = 0; k < dims; ++k) {
          auto i = static_cast<std::size_t>(std::floor(x[k] * static_cast<double>(lattice)));
          flat = flat * lattice + std::min(i, lattice - 1);
        }
        return noise[flat];
      }
    }
    return 0.0;
  }

  /// Midpoint samples on the N^n grid over [0,1]^n.
  GridFunction sample(std::size_t n_cells) const {
    return GridFunction::from_midpoints(GridShape::cube(dims, n_cells, 1.0), *this);
  }
};

/// Physical side of the spike entries: one cell at resolution 32.
inline constexpr double kSpikeSide = 1.0 / 32.0;

/// `count` entries cycling through rectangle indicators, bump sums, spikes
/// and lattice noise. Box corners sit on the 1/32 lattice so every
/// resolution that is a multiple of 32 samples them exactly.
inline std::vector<CorpusEntry> make_corpus(int dims, std::size_t count, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0xc0de + static_cast<std::uint64_t>(dims));
  std::vector<CorpusEntry> out;
  auto snap = [](double v) { return std::round(v * 32.0) / 32.0; };
  for (std::size_t i = 0; i < count; ++i) {
    CorpusEntry e;
    e.dims = dims;
    switch (i % 4) {
      case 0: {
        e.kind = CorpusEntry::Kind::Rect;
        e.label = "rect";
        for (int k = 0; k < dims; ++k) {
          double len = snap(rng.uniform(2.0 / 32.0, 0.6));
          double a = snap(rng.uniform(0.0, 1.0 - len));
          e.lo[k] = a;
          e.hi[k] = a + len;
        }
        e.height = std::exp(rng.uniform(-1.0, 2.0));
        break;
      }
      case 1: {
        e.kind = CorpusEntry::Kind::Bumps;
        e.label = "bumps";
        for (int b = 0; b < 3; ++b) {
          Point3 c{};
          for (int k = 0; k < dims; ++k) c[k] = rng.uniform(0.15, 0.85);
          e.centre.push_back(c);
          e.width.push_back(rng.uniform(0.03, 0.2));
          e.amp.push_back(std::exp(rng.uniform(-1.0, 2.0)));
        }
        break;
      }
      case 2: {
        e.kind = CorpusEntry::Kind::Spike;
        e.label = "spike";
        for (int k = 0; k < dims; ++k) {
          double a = snap(rng.uniform(0.0, 1.0 - kSpikeSide));
          e.lo[k] = a;
          e.hi[k] = a + kSpikeSide;
        }
        // Fixed mass between 1 and 20.
        double mass = std::exp(rng.uniform(0.0, 3.0));
        e.height = mass / std::pow(kSpikeSide, dims);
        break;
      }
      default: {
        e.kind = CorpusEntry::Kind::Noise;
        e.label = "noise";
        std::size_t cells = 1;
        for (int k = 0; k < dims; ++k) cells *= e.lattice;
        for (std::size_t c = 0; c < cells; ++c) e.noise.push_back(std::exp(0.75 * rng.normal()));
        break;
      }
    }
    e.label += "-" + std::to_string(i);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace strongmax
