// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_RANGE_CODER_HPP_
#define RDC_RANGE_CODER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "rdc/common.hpp"

namespace rdc {

// Probability precision of the coder: CDF tables quantize to 16-bit
// cumulative frequencies. Part of the bitstream format contract.
inline constexpr int kCdfPrecision = 16;
inline constexpr uint32_t kCdfTotal = 1u << kCdfPrecision;

// Default half-width of the integer support window; values outside escape to
// a raw-bits bypass.
inline constexpr int kTailMax = 64;

// Quantized CDF over a contiguous integer support [offset, offset + n), plus
// a trailing escape slot for everything else. cdf has n + 2 entries:
// cdf[0] = 0, cdf[n+1] = kCdfTotal, strictly increasing, where bin n is the
// escape symbol.
struct CdfTable {
  int32_t offset = 0;
  std::vector<uint32_t> cdf;

  int num_regular() const { return static_cast<int>(cdf.size()) - 2; }
  int escape_index() const { return num_regular(); }
  bool contains(int32_t v) const {
    return v >= offset && v < offset + num_regular();
  }
  // Table probability of a regular bin.
  double bin_probability(int bin) const {
    return static_cast<double>(cdf[bin + 1] - cdf[bin]) / kCdfTotal;
  }
};

// Builds a CdfTable from a continuous CDF evaluated at half-integer bin
// edges. The support starts as [center - tail_max, center + tail_max] and is
// trimmed to bins whose mass survives 16-bit quantization; trimmed-off values
// go through the escape path. Edges are rounded independently so every
// regular bin reproduces its continuous probability within one table unit.
CdfTable quantize_cdf(const std::function<double(double)>& cont_cdf,
                      int32_t center, int tail_max = kTailMax);

// Byte-oriented range encoder, 32-bit range with 16-bit frequencies and lazy
// carry propagation. Integer-only so output is bit-exact across platforms.
class RangeEncoder {
 public:
  void encode(uint32_t cum, uint32_t freq);
  void encode_symbol(const CdfTable& table, int bin);
  // Writes a value through the table, escaping when outside the support.
  void encode_value(const CdfTable& table, int32_t value);
  // Raw-bits bypass (exact, power-of-two subdivision).
  void encode_bits(uint32_t value, int nbits);
  std::vector<uint8_t> finish();

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_count_ = 1;
  bool first_byte_ = true;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(const std::vector<uint8_t>& data);
  RangeDecoder(const uint8_t* data, size_t len);

  uint32_t decode_freq();
  void decode_update(uint32_t cum, uint32_t freq);
  int decode_symbol(const CdfTable& table);
  int32_t decode_value(const CdfTable& table);
  uint32_t decode_bits(int nbits);

 private:
  uint8_t next_byte();

  const uint8_t* data_;
  size_t len_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Zigzag mapping for signed escape values.
inline uint32_t zigzag(int32_t v) {
  return (static_cast<uint32_t>(v) << 1) ^ static_cast<uint32_t>(v >> 31);
}
inline int32_t unzigzag(uint32_t u) {
  return static_cast<int32_t>(u >> 1) ^ -static_cast<int32_t>(u & 1);
}

}  // namespace rdc

#endif  // RDC_RANGE_CODER_HPP_
