#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hosim/gf.hpp"

namespace hosim::rlc {

/// Deterministic generator for coding coefficients. One 16-bit seed fully
/// describes the coefficient vector of a coded packet, which is what lets
/// the wire header stay at two bytes.
///
/// Definition (part of the wire contract, do not change):
///   state0 = (seed << 16) ^ 0x9E3779B9            (never zero)
///   step:   x ^= x << 13; x ^= x >> 17; x ^= x << 5   (all 32-bit)
///   output: (x * 0x9E3779B1) >> (32 - m)          (top m bits)
class CoefficientPrng {
 public:
  explicit CoefficientPrng(std::uint16_t seed)
      : state_((static_cast<std::uint32_t>(seed) << 16) ^ 0x9E3779B9u) {}

  std::uint32_t next_word() {
    std::uint32_t x = state_;
    x ^= x << 13;
    x ^= x >> 17;
    x ^= x << 5;
    state_ = x;
    return x * 0x9E3779B1u;
  }

  gf::Element next_coefficient(const gf::Field& field) {
    return static_cast<gf::Element>(next_word() >> (32u - field.bit_width()));
  }

 private:
  std::uint32_t state_;
};

std::vector<gf::Element> coefficient_vector(std::uint16_t seed, std::size_t count,
                                            const gf::Field& field);

/// The packets a coded stream protects. All payloads share one length.
struct SourceBlock {
  std::vector<std::vector<std::uint8_t>> packets;

  std::size_t count() const { return packets.size(); }
  std::size_t packet_size() const { return packets.empty() ? 0 : packets.front().size(); }

  /// Throws std::invalid_argument on an empty block, an empty payload, or
  /// payloads of unequal length.
  void validate() const;

  bool operator==(const SourceBlock&) const = default;
};

/// One coded packet: a 2-byte coefficient seed plus the combined payload.
struct CodedPacket {
  std::uint16_t seed = 0;
  std::vector<std::uint8_t> payload;

  /// Wire layout: big-endian seed, then the payload bytes.
  std::vector<std::uint8_t> serialize() const;
  static CodedPacket deserialize(std::span<const std::uint8_t> wire);

  bool operator==(const CodedPacket&) const = default;
};

/// Random linear combination of the block under the seed's coefficients.
/// Bytes are processed as packed field symbols (two per byte for m = 4).
/// Deterministic: the same (block, seed, field) always yields one output.
CodedPacket encode(const SourceBlock& block, std::uint16_t seed, const gf::Field& field);

/// Online Gaussian elimination over GF(2^m). Rows are kept in reduced
/// row-echelon form, so a full-rank decoder reads the sources straight out
/// of its combined payloads. Single-owner mutable; clone for concurrency.
class Decoder {
 public:
  Decoder(std::size_t source_count, std::size_t packet_size, const gf::Field& field);

  /// Regenerates the packet's coefficient vector from its seed and reduces
  /// it against the basis. Returns true iff the packet was innovative
  /// (raised the rank). Throws std::invalid_argument on a payload length
  /// mismatch. Duplicate and zero-coefficient packets return false.
  bool ingest(const CodedPacket& pkt);

  std::size_t rank() const { return rows_.size(); }
  std::size_t source_count() const { return n_src_; }
  bool ready() const { return rank() == n_src_; }

  /// Returns the reconstructed block at full rank, std::nullopt otherwise.
  /// Never mutates the decoder.
  std::optional<SourceBlock> try_decode() const;

 private:
  struct Row {
    std::vector<gf::Element> coeffs;
    std::vector<std::uint8_t> payload;
    std::size_t pivot = 0;
  };

  gf::Field field_;
  std::size_t n_src_;
  std::size_t packet_size_;
  std::vector<Row> rows_;  // sorted by pivot, normalized, mutually reduced
};

/// Probability that `received` coded packets over a field of `field_size`
/// elements contain `source_count` linearly independent ones. Zero whenever
/// received < source_count; strictly increasing in `received`.
double decode_probability(std::size_t received, std::size_t source_count,
                          unsigned field_size);

/// Analytic transmission overhead of the code.
struct CodingStats {
  double expected_transmissions = 0;  // E[K]
  double epsilon = 0;                 // E[K]/N - 1, always >= 0
  unsigned field_size = 0;
};

/// Expected number of transmitted coded packets until a receiver reaches
/// full rank: N + sum over k>=N of (1 - Pd(k, N)). The series is truncated
/// once a geometric bound on the remaining tail drops below tail_tol.
CodingStats expected_transmission_count(std::size_t source_count, unsigned field_size,
                                        double tail_tol = 1e-12);

}  // namespace hosim::rlc
