#pragma once

#include <array>
#include <cstdint>

namespace hosim::gf {

/// An element of GF(2^m), stored as an integer in [0, 2^m). Valid widths are
/// 1..8 so that one or more symbols always pack into a byte.
using Element = std::uint8_t;

unsigned poly_degree(unsigned poly);

/// Carry-less product of two GF(2)[x] polynomials (bit-packed coefficients).
unsigned poly_mul_raw(unsigned a, unsigned b);

/// Remainder of a modulo divisor in GF(2)[x].
unsigned poly_mod(unsigned a, unsigned divisor);

/// Exhaustive trial division; exact for the degrees this library supports.
bool is_irreducible(unsigned poly, unsigned degree);

/// Conventional irreducible polynomial for each supported width.
unsigned default_reduction_poly(unsigned bit_width);

/// GF(2^m) arithmetic, 1 <= m <= 8.
///
/// Multiplication and inversion go through log/antilog tables built once at
/// construction (the tables are keyed to a generator of the multiplicative
/// group, so non-primitive reduction polynomials work too). A Field is
/// immutable after construction and safe to share across threads.
class Field {
 public:
  /// Throws std::invalid_argument if the width is outside 1..8 or the
  /// polynomial does not have degree exactly m or is reducible.
  /// reduction_poly == 0 selects the conventional default for the width.
  explicit Field(unsigned bit_width = 4, unsigned reduction_poly = 0);

  unsigned bit_width() const { return bit_width_; }
  unsigned size() const { return size_; }  // q = 2^m
  unsigned reduction_poly() const { return poly_; }
  Element element_mask() const { return static_cast<Element>(size_ - 1); }
  bool valid(Element a) const { return a < size_; }

  /// Carry-less XOR; identical to subtraction in characteristic 2.
  Element add(Element a, Element b) const;

  Element mul(Element a, Element b) const;

  /// Throws std::domain_error for a == 0.
  Element inv(Element a) const;

  /// a / b. Throws std::domain_error for b == 0.
  Element div(Element a, Element b) const;

 private:
  void check(Element a) const;

  unsigned bit_width_ = 0;
  unsigned size_ = 0;
  unsigned poly_ = 0;
  unsigned order_ = 0;  // q - 1
  std::array<std::uint8_t, 256> log_{};
  std::array<std::uint8_t, 512> exp_{};
};

}  // namespace hosim::gf
