#include <doctest.h>

#include <cstdint>

#include "hosim/gf.hpp"
#include "hosim/rng.hpp"

using hosim::gf::Element;
using hosim::gf::Field;

namespace {

// Independent oracle: shift-and-reduce multiplication with explicit long
// division, sharing no code with the table-driven Field.
unsigned oracle_mul(unsigned a, unsigned b, unsigned poly, unsigned m) {
  unsigned product = 0;
  for (unsigned bit = 0; bit < m; ++bit)
    if (b & (1u << bit)) product ^= a << bit;
  for (int d = 2 * static_cast<int>(m) - 2; d >= static_cast<int>(m); --d)
    if (product & (1u << d)) product ^= poly << (d - static_cast<int>(m));
  return product;
}

Element oracle_inv(unsigned a, unsigned poly, unsigned m) {
  for (unsigned x = 1; x < (1u << m); ++x)
    if (oracle_mul(a, x, poly, m) == 1) return static_cast<Element>(x);
  FAIL("no inverse found");
  return 0;
}

}  // namespace

TEST_CASE("polynomial helpers") {
  CHECK(hosim::gf::poly_degree(0x13) == 4);
  CHECK(hosim::gf::poly_mul_raw(0x3, 0x3) == 0x5);  // (x+1)^2 = x^2+1
  CHECK(hosim::gf::poly_mod(0x13, 0x13) == 0);
  CHECK(hosim::gf::is_irreducible(0x13, 4));
  CHECK(hosim::gf::is_irreducible(0x1F, 4));   // x^4+x^3+x^2+x+1, not primitive
  CHECK(!hosim::gf::is_irreducible(0x11, 4));  // x^4+1 = (x+1)^4
  CHECK(!hosim::gf::is_irreducible(0x15, 4));  // x^4+x^2+1 = (x^2+x+1)^2
}

TEST_CASE("field construction rejects bad specs") {
  CHECK_THROWS_AS(Field(0), std::invalid_argument);
  CHECK_THROWS_AS(Field(9), std::invalid_argument);
  CHECK_THROWS_AS(Field(4, 0x11), std::invalid_argument);  // reducible
  CHECK_THROWS_AS(Field(4, 0xB), std::invalid_argument);   // degree 3, not 4
  CHECK_THROWS_AS(Field(4, 0x33), std::invalid_argument);  // degree 5
}

TEST_CASE("addition is carry-less xor") {
  Field f(4);
  CHECK(f.add(0x9, 0x9) == 0x0);  // self-inverse in characteristic 2
  CHECK(f.add(0x5, 0x0) == 0x5);
  CHECK(f.add(0x5, 0x3) == (0x5 ^ 0x3));
  for (unsigned a = 0; a < 16; ++a) CHECK(f.add(a, a) == 0);
}

TEST_CASE("multiplication matches the long-division oracle") {
  Field f(4, 0x13);
  CHECK(f.mul(0x7, 0x1) == 0x7);
  CHECK(f.mul(0x2, 0x8) == 0x3);  // x * x^3 = x^4 = x + 1 under x^4+x+1
  CHECK(f.mul(0x9, 0x9) == 0xD);
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b)
      CHECK(f.mul(a, b) == oracle_mul(a, b, 0x13, 4));
}

TEST_CASE("inverse matches exhaustive search") {
  Field f(4);
  CHECK(f.inv(0x1) == 0x1);
  CHECK(f.inv(0x2) == 0x9);
  CHECK_THROWS_AS(f.inv(0x0), std::domain_error);
  for (unsigned a = 1; a < 16; ++a) {
    CHECK(f.inv(a) == oracle_inv(a, 0x13, 4));
    CHECK(f.mul(a, f.inv(a)) == 1);
    CHECK(f.div(1, a) == f.inv(a));
  }
}

TEST_CASE("field axioms hold exhaustively for every width") {
  for (unsigned m = 1; m <= 8; ++m) {
    CAPTURE(m);
    Field f(m);
    const unsigned q = f.size();
    for (unsigned a = 0; a < q; ++a) {
      CHECK(f.mul(a, 1) == a);
      if (a != 0) CHECK(f.mul(a, f.inv(a)) == 1);
    }
    // Commutativity over all pairs, exhaustive for small widths.
    if (m <= 4) {
      for (unsigned a = 0; a < q; ++a)
        for (unsigned b = 0; b < q; ++b)
          CHECK(f.mul(a, b) == f.mul(b, a));
    }
  }
}

TEST_CASE("associativity and distributivity on sampled triples") {
  Field f(4);
  hosim::rng::Stream rng(42);
  for (int i = 0; i < 20000; ++i) {
    const auto a = static_cast<Element>(rng.uniform_int(16));
    const auto b = static_cast<Element>(rng.uniform_int(16));
    const auto c = static_cast<Element>(rng.uniform_int(16));
    CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
    CHECK(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)));
    CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
  }
}

TEST_CASE("non-primitive reduction polynomial still yields a field") {
  Field f(4, 0x1F);
  for (unsigned a = 1; a < 16; ++a) CHECK(f.mul(a, f.inv(a)) == 1);
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b)
      CHECK(f.mul(a, b) == oracle_mul(a, b, 0x1F, 4));
}

TEST_CASE("GF(256) inverses are exhaustive too") {
  Field f(8);
  for (unsigned a = 1; a < 256; ++a)
    CHECK(f.mul(a, f.inv(a)) == 1);
}
