#include "hosim/gf.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

namespace hosim::gf {

unsigned poly_degree(unsigned poly) {
  unsigned d = 0;
  while (poly >> (d + 1)) ++d;
  return d;
}

unsigned poly_mul_raw(unsigned a, unsigned b) {
  unsigned acc = 0;
  while (b) {
    if (b & 1u) acc ^= a;
    a <<= 1;
    b >>= 1;
  }
  return acc;
}

unsigned poly_mod(unsigned a, unsigned divisor) {
  if (divisor == 0) throw std::invalid_argument("gf: polynomial division by zero");
  const unsigned dd = poly_degree(divisor);
  while (a >= (1u << dd)) {
    const unsigned shift = poly_degree(a) - dd;
    a ^= divisor << shift;
  }
  return a;
}

bool is_irreducible(unsigned poly, unsigned degree) {
  if (poly_degree(poly) != degree) return false;
  if (degree == 0) return false;
  if (degree == 1) return true;
  // A reducible polynomial of degree d has a factor of degree <= d/2.
  for (unsigned g = 2; poly_degree(g) <= degree / 2; ++g) {
    if (poly_mod(poly, g) == 0) return false;
  }
  return true;
}

unsigned default_reduction_poly(unsigned bit_width) {
  switch (bit_width) {
    case 1: return 0x3;    // x + 1
    case 2: return 0x7;    // x^2 + x + 1
    case 3: return 0xB;    // x^3 + x + 1
    case 4: return 0x13;   // x^4 + x + 1
    case 5: return 0x25;   // x^5 + x^2 + 1
    case 6: return 0x43;   // x^6 + x + 1
    case 7: return 0x83;   // x^7 + x + 1
    case 8: return 0x11D;  // x^8 + x^4 + x^3 + x^2 + 1
    default:
      throw std::invalid_argument("gf: bit width must be in 1..8");
  }
}

Field::Field(unsigned bit_width, unsigned reduction_poly) {
  if (bit_width < 1 || bit_width > 8)
    throw std::invalid_argument("gf: bit width must be in 1..8");
  if (reduction_poly == 0) reduction_poly = default_reduction_poly(bit_width);
  if (poly_degree(reduction_poly) != bit_width)
    throw std::invalid_argument("gf: reduction polynomial degree " +
                                std::to_string(poly_degree(reduction_poly)) +
                                " does not match field width " + std::to_string(bit_width));
  if (!is_irreducible(reduction_poly, bit_width))
    throw std::invalid_argument("gf: reduction polynomial is reducible");

  bit_width_ = bit_width;
  size_ = 1u << bit_width;
  poly_ = reduction_poly;
  order_ = size_ - 1;

  auto raw_mul = [this](unsigned a, unsigned b) {
    return poly_mod(poly_mul_raw(a, b), poly_);
  };

  // The multiplicative group of a finite field is cyclic; find a generator
  // (x itself may not be one when the polynomial is irreducible but not
  // primitive) and lay out the log/antilog tables from it.
  unsigned generator = 0;
  for (unsigned g = 2; g < size_; ++g) {
    unsigned v = 1;
    unsigned order = 0;
    do {
      v = raw_mul(v, g);
      ++order;
    } while (v != 1);
    if (order == order_) {
      generator = g;
      break;
    }
  }
  if (generator == 0 && size_ == 2) generator = 1;  // GF(2): the group is {1}
  if (generator == 0) throw std::logic_error("gf: no generator found");

  unsigned v = 1;
  for (unsigned i = 0; i < order_; ++i) {
    exp_[i] = static_cast<std::uint8_t>(v);
    log_[v] = static_cast<std::uint8_t>(i);
    v = raw_mul(v, generator);
  }
  // Doubled range so mul can index log_[a] + log_[b] without a modulo.
  for (unsigned i = order_; i < 2 * order_ + 1; ++i) exp_[i] = exp_[i - order_];
}

void Field::check(Element a) const {
  assert(valid(a) && "gf: element out of field range");
  (void)a;
}

Element Field::add(Element a, Element b) const {
  check(a);
  check(b);
  return static_cast<Element>(a ^ b);
}

Element Field::mul(Element a, Element b) const {
  check(a);
  check(b);
  if (a == 0 || b == 0) return 0;
  return exp_[static_cast<unsigned>(log_[a]) + log_[b]];
}

Element Field::inv(Element a) const {
  check(a);
  if (a == 0) throw std::domain_error("gf: zero has no multiplicative inverse");
  return exp_[order_ - log_[a]];
}

Element Field::div(Element a, Element b) const {
  return mul(a, inv(b));
}

}  // namespace hosim::gf
