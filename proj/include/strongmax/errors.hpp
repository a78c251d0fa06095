#pragma once

#include <stdexcept>
#include <string>

namespace strongmax {

// Grids of mismatched or unsupported shape.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rectangles or indices outside a grid.
struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Values outside the mathematical domain of an operation (non-positive
// weights, exponents out of range, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Norms over sets of zero measure.
struct MeasureError : std::domain_error {
  using std::domain_error::domain_error;
};

// Invalid arguments to an algorithm (empty families, lambda <= 0, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A root bracket could not be established.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace strongmax
