// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/range_coder.hpp"

#include <algorithm>
#include <cmath>

namespace rdc {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
// Bins whose continuous mass falls below this survive only via escape.
constexpr double kKeepThreshold = 1.5 / kCdfTotal;
}  // namespace

CdfTable quantize_cdf(const std::function<double(double)>& cont_cdf,
                      int32_t center, int tail_max) {
  check(tail_max >= 0, ErrorKind::kParameter, "quantize_cdf: tail_max >= 0");
  int32_t lo = center - tail_max;
  int32_t hi = center + tail_max;  // inclusive
  auto mass = [&](int32_t v) {
    return cont_cdf(v + 0.5) - cont_cdf(v - 0.5);
  };
  while (lo < center && mass(lo) < kKeepThreshold) ++lo;
  while (hi > center && mass(hi) < kKeepThreshold) --hi;

  const int n = hi - lo + 1;
  CdfTable t;
  t.offset = lo;
  t.cdf.resize(static_cast<size_t>(n) + 2);
  const double base = cont_cdf(lo - 0.5);
  t.cdf[0] = 0;
  for (int i = 1; i <= n; ++i) {
    const double c = cont_cdf(lo - 0.5 + i) - base;
    auto q = static_cast<int64_t>(std::llround(c * kCdfTotal));
    t.cdf[i] = static_cast<uint32_t>(std::clamp<int64_t>(q, 0, kCdfTotal - 1));
  }
  // Strictly increasing, and room for the escape slot at the top.
  for (int i = 1; i <= n; ++i)
    t.cdf[i] = std::max(t.cdf[i], t.cdf[i - 1] + 1);
  for (int i = n; i >= 1; --i) {
    const uint32_t cap = kCdfTotal - 1 - static_cast<uint32_t>(n - i);
    t.cdf[i] = std::min(t.cdf[i], cap);
  }
  t.cdf[n + 1] = kCdfTotal;
  return t;
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t byte = cache_;
    do {
      if (first_byte_) {
        // The first pending byte is always zero (no output precedes it, so no
        // carry can reach it); dropping it keeps the flush at four bytes.
        first_byte_ = false;
      } else {
        out_.push_back(static_cast<uint8_t>(byte + carry));
      }
      byte = 0xFF;
    } while (--cache_count_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_count_;
  low_ = (low_ & 0x00FFFFFFull) << 8;
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq) {
  check(freq > 0 && cum + freq <= kCdfTotal, ErrorKind::kCoding,
        "range encoder: invalid (cum, freq)");
  const uint32_t r = range_ >> kCdfPrecision;
  low_ += static_cast<uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTopValue) {
    shift_low();
    range_ <<= 8;
  }
}

void RangeEncoder::encode_symbol(const CdfTable& table, int bin) {
  encode(table.cdf[bin], table.cdf[bin + 1] - table.cdf[bin]);
}

void RangeEncoder::encode_value(const CdfTable& table, int32_t value) {
  if (table.contains(value)) {
    encode_symbol(table, value - table.offset);
  } else {
    encode_symbol(table, table.escape_index());
    encode_bits(zigzag(value), 32);
  }
}

void RangeEncoder::encode_bits(uint32_t value, int nbits) {
  check(nbits > 0 && nbits <= 32, ErrorKind::kCoding, "encode_bits: 1..32 bits");
  // Power-of-two chunks stay exact in the truncated-division coder.
  while (nbits > 0) {
    const int chunk = std::min(nbits, 12);
    nbits -= chunk;
    const uint32_t v = (value >> nbits) & ((1u << chunk) - 1);
    encode(v << (kCdfPrecision - chunk), 1u << (kCdfPrecision - chunk));
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(const std::vector<uint8_t>& data)
    : RangeDecoder(data.data(), data.size()) {}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t len)
    : data_(data), len_(len) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  check(pos_ <= len_, ErrorKind::kTruncated, "range decoder: stream exhausted");
  // Reads past the end would only happen on corrupted input; the flush always
  // appends enough bytes for well-formed streams.
  if (pos_ == len_) {
    ++pos_;
    return 0;
  }
  return data_[pos_++];
}

uint32_t RangeDecoder::decode_freq() {
  const uint32_t r = range_ >> kCdfPrecision;
  return std::min(code_ / r, kCdfTotal - 1);
}

void RangeDecoder::decode_update(uint32_t cum, uint32_t freq) {
  const uint32_t r = range_ >> kCdfPrecision;
  code_ -= r * cum;
  range_ = r * freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

int RangeDecoder::decode_symbol(const CdfTable& table) {
  const uint32_t f = decode_freq();
  // Binary search for the bin with cdf[i] <= f < cdf[i+1].
  int lo = 0, hi = static_cast<int>(table.cdf.size()) - 2;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (table.cdf[static_cast<size_t>(mid)] <= f)
      lo = mid;
    else
      hi = mid - 1;
  }
  decode_update(table.cdf[lo], table.cdf[lo + 1] - table.cdf[lo]);
  return lo;
}

int32_t RangeDecoder::decode_value(const CdfTable& table) {
  const int bin = decode_symbol(table);
  if (bin == table.escape_index()) return unzigzag(decode_bits(32));
  return table.offset + bin;
}

uint32_t RangeDecoder::decode_bits(int nbits) {
  check(nbits > 0 && nbits <= 32, ErrorKind::kCoding, "decode_bits: 1..32 bits");
  uint32_t value = 0;
  while (nbits > 0) {
    const int chunk = std::min(nbits, 12);
    nbits -= chunk;
    const uint32_t f = decode_freq();
    const uint32_t v = f >> (kCdfPrecision - chunk);
    decode_update(v << (kCdfPrecision - chunk), 1u << (kCdfPrecision - chunk));
    value |= v << nbits;
  }
  return value;
}

}  // namespace rdc
