#include "hosim/rlc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hosim::rlc {

namespace {

void require_packable(const gf::Field& field) {
  const unsigned m = field.bit_width();
  if (m != 1 && m != 2 && m != 4 && m != 8)
    throw std::invalid_argument(
        "rlc: payload coding needs a symbol width that packs into bytes (1, 2, 4 or 8)");
}

// acc += c * src, applied per packed symbol. XOR handles the addition for
// every symbol width at once; only the scaling needs the symbol split.
void accumulate_scaled(std::vector<std::uint8_t>& acc, std::span<const std::uint8_t> src,
                       gf::Element c, const gf::Field& field) {
  if (c == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < src.size(); ++i) acc[i] ^= src[i];
    return;
  }
  const unsigned m = field.bit_width();
  const unsigned mask = field.element_mask();
  for (std::size_t i = 0; i < src.size(); ++i) {
    unsigned out = 0;
    for (unsigned shift = 0; shift < 8; shift += m) {
      const auto sym = static_cast<gf::Element>((src[i] >> shift) & mask);
      out |= static_cast<unsigned>(field.mul(c, sym)) << shift;
    }
    acc[i] ^= static_cast<std::uint8_t>(out) & 0xFFu;
  }
}

void scale_in_place(std::vector<gf::Element>& coeffs, std::vector<std::uint8_t>& payload,
                    gf::Element c, const gf::Field& field) {
  for (auto& v : coeffs) v = field.mul(v, c);
  const unsigned m = field.bit_width();
  const unsigned mask = field.element_mask();
  for (auto& byte : payload) {
    unsigned out = 0;
    for (unsigned shift = 0; shift < 8; shift += m) {
      const auto sym = static_cast<gf::Element>((byte >> shift) & mask);
      out |= static_cast<unsigned>(field.mul(c, sym)) << shift;
    }
    byte = static_cast<std::uint8_t>(out);
  }
}

}  // namespace

std::vector<gf::Element> coefficient_vector(std::uint16_t seed, std::size_t count,
                                            const gf::Field& field) {
  CoefficientPrng prng(seed);
  std::vector<gf::Element> coeffs(count);
  for (auto& c : coeffs) c = prng.next_coefficient(field);
  return coeffs;
}

void SourceBlock::validate() const {
  if (packets.empty()) throw std::invalid_argument("rlc: source block has no packets");
  const std::size_t size = packets.front().size();
  if (size == 0) throw std::invalid_argument("rlc: source packets must be non-empty");
  for (const auto& p : packets) {
    if (p.size() != size)
      throw std::invalid_argument("rlc: source packets must share one length");
  }
}

std::vector<std::uint8_t> CodedPacket::serialize() const {
  std::vector<std::uint8_t> wire;
  wire.reserve(2 + payload.size());
  wire.push_back(static_cast<std::uint8_t>(seed >> 8));
  wire.push_back(static_cast<std::uint8_t>(seed & 0xFF));
  wire.insert(wire.end(), payload.begin(), payload.end());
  return wire;
}

CodedPacket CodedPacket::deserialize(std::span<const std::uint8_t> wire) {
  if (wire.size() < 2)
    throw std::invalid_argument("rlc: coded packet wire form is shorter than its header");
  CodedPacket pkt;
  pkt.seed = static_cast<std::uint16_t>((wire[0] << 8) | wire[1]);
  pkt.payload.assign(wire.begin() + 2, wire.end());
  return pkt;
}

CodedPacket encode(const SourceBlock& block, std::uint16_t seed, const gf::Field& field) {
  block.validate();
  require_packable(field);
  const auto coeffs = coefficient_vector(seed, block.count(), field);
  CodedPacket pkt;
  pkt.seed = seed;
  pkt.payload.assign(block.packet_size(), 0);
  for (std::size_t i = 0; i < block.count(); ++i)
    accumulate_scaled(pkt.payload, block.packets[i], coeffs[i], field);
  return pkt;
}

Decoder::Decoder(std::size_t source_count, std::size_t packet_size, const gf::Field& field)
    : field_(field), n_src_(source_count), packet_size_(packet_size) {
  if (source_count == 0) throw std::invalid_argument("rlc: decoder needs at least one source");
  if (packet_size == 0) throw std::invalid_argument("rlc: packet size must be positive");
  require_packable(field);
  rows_.reserve(source_count);
}

bool Decoder::ingest(const CodedPacket& pkt) {
  if (pkt.payload.size() != packet_size_)
    throw std::invalid_argument("rlc: payload length " + std::to_string(pkt.payload.size()) +
                                " does not match decoder packet size " +
                                std::to_string(packet_size_));

  auto coeffs = coefficient_vector(pkt.seed, n_src_, field_);
  auto payload = pkt.payload;

  // Forward-reduce against the existing basis.
  for (const Row& row : rows_) {
    const gf::Element factor = coeffs[row.pivot];
    if (factor == 0) continue;
    for (std::size_t i = 0; i < n_src_; ++i)
      coeffs[i] = field_.add(coeffs[i], field_.mul(factor, row.coeffs[i]));
    accumulate_scaled(payload, row.payload, factor, field_);
  }

  const auto pivot_it = std::find_if(coeffs.begin(), coeffs.end(),
                                     [](gf::Element c) { return c != 0; });
  if (pivot_it == coeffs.end()) return false;  // dependent or all-zero vector
  const auto pivot = static_cast<std::size_t>(pivot_it - coeffs.begin());

  scale_in_place(coeffs, payload, field_.inv(coeffs[pivot]), field_);

  // Back-substitute so the basis stays in reduced row-echelon form.
  for (Row& row : rows_) {
    const gf::Element factor = row.coeffs[pivot];
    if (factor == 0) continue;
    for (std::size_t i = 0; i < n_src_; ++i)
      row.coeffs[i] = field_.add(row.coeffs[i], field_.mul(factor, coeffs[i]));
    accumulate_scaled(row.payload, payload, factor, field_);
  }

  Row fresh{std::move(coeffs), std::move(payload), pivot};
  const auto pos = std::lower_bound(rows_.begin(), rows_.end(), pivot,
                                    [](const Row& r, std::size_t p) { return r.pivot < p; });
  rows_.insert(pos, std::move(fresh));
  return true;
}

std::optional<SourceBlock> Decoder::try_decode() const {
  if (!ready()) return std::nullopt;
  // Full rank in reduced form means row i carries exactly source packet i.
  SourceBlock block;
  block.packets.reserve(n_src_);
  for (const Row& row : rows_) block.packets.push_back(row.payload);
  return block;
}

double decode_probability(std::size_t received, std::size_t source_count,
                          unsigned field_size) {
  if (field_size < 2) throw std::invalid_argument("rlc: field size must be at least 2");
  if (source_count == 0) throw std::invalid_argument("rlc: source count must be positive");
  if (received < source_count) return 0.0;
  double product = 1.0;
  for (std::size_t j = 0; j < source_count; ++j) {
    const double exponent = static_cast<double>(received - j);
    product *= 1.0 - std::pow(static_cast<double>(field_size), -exponent);
  }
  return product;
}

CodingStats expected_transmission_count(std::size_t source_count, unsigned field_size,
                                        double tail_tol) {
  if (tail_tol <= 0 || tail_tol >= 1)
    throw std::invalid_argument("rlc: tail tolerance must be in (0, 1)");
  if (field_size < 2) throw std::invalid_argument("rlc: field size must be at least 2");
  if (source_count == 0) throw std::invalid_argument("rlc: source count must be positive");

  const double q = field_size;
  double expected = static_cast<double>(source_count);
  std::size_t k = source_count;
  while (true) {
    expected += 1.0 - decode_probability(k, source_count, field_size);
    // 1 - Pd(k, N) <= q^(N-k) summed geometrically bounds the rest.
    const double tail_bound =
        2.0 * std::pow(q, static_cast<double>(source_count) - static_cast<double>(k) - 1.0);
    if (tail_bound < tail_tol) break;
    ++k;
  }

  CodingStats stats;
  stats.expected_transmissions = expected;
  stats.epsilon = expected / static_cast<double>(source_count) - 1.0;
  stats.field_size = field_size;
  return stats;
}

}  // namespace hosim::rlc
