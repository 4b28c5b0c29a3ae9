// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/bitstream.hpp"

#include <cstring>

namespace rdc {

namespace {

// Little-endian primitive writer/reader.
struct Writer {
  std::vector<uint8_t> buf;
  void u8(uint8_t v) { buf.push_back(v); }
  void u16(uint16_t v) {
    for (int i = 0; i < 2; ++i) u8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
};

struct Reader {
  const uint8_t* p;
  size_t len;
  size_t pos = 0;
  void need(size_t n) {
    check(pos + n <= len, ErrorKind::kTruncated, "bitstream truncated");
  }
  uint8_t u8() {
    need(1);
    return p[pos++];
  }
  uint16_t u16() {
    uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(u8()) << (8 * i);
    return v;
  }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }
  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

constexpr size_t kHeaderSize = 4 + 2 + 8 + 4 + 4 + 2 + 2 + 4 + 4 + 2 + 4 + 4 + 4 + 4;

}  // namespace

size_t bitstream_header_size() { return kHeaderSize; }

size_t Bitstream::total_bytes() const {
  return kHeaderSize + z_payload.size() + y_payload.size();
}

std::vector<uint8_t> write_bitstream(const Bitstream& bs) {
  Writer w;
  w.u32(kBitstreamMagic);
  w.u16(kBitstreamVersion);
  w.u64(bs.header.config_hash);
  w.u32(bs.header.width);
  w.u32(bs.header.height);
  w.u16(bs.header.pad_right);
  w.u16(bs.header.pad_bottom);
  w.f32(bs.header.lambda_tag);
  w.f32(bs.header.rho_tag);
  w.u16(bs.header.default_steps);
  w.f32(bs.header.default_gamma);
  w.u32(static_cast<uint32_t>(bs.z_payload.size()));
  w.u32(static_cast<uint32_t>(bs.y_payload.size()));
  w.u32(crc32(w.buf.data(), w.buf.size()));
  w.buf.insert(w.buf.end(), bs.z_payload.begin(), bs.z_payload.end());
  w.buf.insert(w.buf.end(), bs.y_payload.begin(), bs.y_payload.end());
  return std::move(w.buf);
}

Bitstream read_bitstream(const uint8_t* data, size_t len) {
  Reader r{data, len};
  r.need(kHeaderSize);
  const uint32_t crc_expect = crc32(data, kHeaderSize - 4);

  Bitstream bs;
  check(r.u32() == kBitstreamMagic, ErrorKind::kBadMagic,
        "not an rdc bitstream (bad magic)");
  const uint16_t version = r.u16();
  check(version == kBitstreamVersion, ErrorKind::kVersionMismatch,
        "unsupported bitstream version " + std::to_string(version));
  bs.header.config_hash = r.u64();
  bs.header.width = r.u32();
  bs.header.height = r.u32();
  bs.header.pad_right = r.u16();
  bs.header.pad_bottom = r.u16();
  bs.header.lambda_tag = r.f32();
  bs.header.rho_tag = r.f32();
  bs.header.default_steps = r.u16();
  bs.header.default_gamma = r.f32();
  const uint32_t z_len = r.u32();
  const uint32_t y_len = r.u32();
  check(r.u32() == crc_expect, ErrorKind::kBadCrc, "bitstream header CRC mismatch");

  r.need(z_len);
  bs.z_payload.assign(data + r.pos, data + r.pos + z_len);
  r.pos += z_len;
  r.need(y_len);
  bs.y_payload.assign(data + r.pos, data + r.pos + y_len);
  r.pos += y_len;
  return bs;
}

Bitstream read_bitstream(const std::vector<uint8_t>& bytes) {
  return read_bitstream(bytes.data(), bytes.size());
}

}  // namespace rdc
