// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_COMMON_HPP_
#define RDC_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rdc {

// Failure categories. The CLI maps these onto distinct exit codes and the
// bitstream/checkpoint readers use the stream-related kinds to tell apart
// truncation, corruption and incompatibility.
enum class ErrorKind {
  kParameter,       // invalid argument to a library call
  kContract,        // precondition violated (shape mismatch, index order, ...)
  kShape,           // tensor shape incompatible with the model configuration
  kSingularity,     // numeric floor hit (e.g. division by vanishing alpha_bar)
  kCoding,          // entropy coder misuse (symbol outside support, no escape)
  kBadMagic,        // container does not start with the expected magic
  kBadCrc,          // header checksum failed
  kTruncated,       // stream ended before the declared payload
  kVersionMismatch, // container written by an incompatible format version
  kHashMismatch,    // bitstream/checkpoint config hash does not match weights
  kConfiguration,   // missing adapter, bad config file, unusable settings
  kSampling,        // non-finite state detected during diffusion sampling
  kSequencing,      // video frames requested out of order
  kIo,              // file not found / unreadable / unwritable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void check(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kSingularity: return "singularity";
    case ErrorKind::kCoding: return "coding";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kBadCrc: return "bad_crc";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kHashMismatch: return "hash_mismatch";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kSampling: return "sampling";
    case ErrorKind::kSequencing: return "sequencing";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

// FNV-1a, used for config hashes and weight-buffer fingerprints.
inline uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

// CRC-32 (IEEE, reflected), for container headers.
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

}  // namespace rdc

#endif  // RDC_COMMON_HPP_
