// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_BITSTREAM_HPP_
#define RDC_BITSTREAM_HPP_

#include <cstdint>
#include <vector>

#include "rdc/common.hpp"

namespace rdc {

inline constexpr uint32_t kBitstreamMagic = 0x42434452u;  // "RDCB" little-endian
inline constexpr uint16_t kBitstreamVersion = 1;

// Container header. Field-by-field layout (little-endian) in docs/FORMAT.md.
struct BitstreamHeader {
  uint64_t config_hash = 0;
  uint32_t width = 0;        // image size before padding
  uint32_t height = 0;
  uint16_t pad_right = 0;    // reflect padding applied before encoding
  uint16_t pad_bottom = 0;
  float lambda_tag = 0.f;    // rate point the weights were trained for
  float rho_tag = 0.f;       // perceptual trade-off tag
  uint16_t default_steps = 0;
  float default_gamma = 0.f;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> z_payload;
  std::vector<uint8_t> y_payload;

  size_t total_bytes() const;
  double bpp() const {
    return static_cast<double>(total_bytes()) * 8.0 /
           (static_cast<double>(header.width) * header.height);
  }
};

std::vector<uint8_t> write_bitstream(const Bitstream& bs);
Bitstream read_bitstream(const std::vector<uint8_t>& bytes);
Bitstream read_bitstream(const uint8_t* data, size_t len);

// Fixed serialized header size in bytes.
size_t bitstream_header_size();

}  // namespace rdc

#endif  // RDC_BITSTREAM_HPP_
